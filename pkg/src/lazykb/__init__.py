"""lazykb: an embeddable typed knowledge base with lazy model expansion.

Declare finite types, predicates, functions and constants; interpret some of
them; state constraints in comprehension syntax and inductive definitions as
rule lambdas.  Reading anything left open makes the engine complete the
structure (grounding to CNF plus conflict-driven SAT) and caches the result
until the knowledge base changes.

    from lazykb import KnowledgeBase

    kb = KnowledgeBase()
    kb.add_type("Color", ["Red", "Green", "Blue"])
    kb.add_type("Area", ["Belgium", "Holland", "Germany"])
    kb.add_predicate("Border(Area,Area)", [("Belgium", "Holland"),
                                           ("Belgium", "Germany"),
                                           ("Holland", "Germany")])
    coloring = kb.add_function("Coloring(Area) : Color")
    kb.constraint("all(Coloring(a) != Coloring(b) for (a,b) in Border)")
    coloring["Belgium"]          # triggers one solve, then reads are cached
"""

from .errors import (DeclarationError, DefinitionError, InterpretationError,
                     KBError, ParseError, SolverError, TypeCheckError,
                     UnsatisfiableError, UnsupportedFragmentError)
from .kbcore import ExpansionResult, KnowledgeBase
from .vocabulary import (FunctionView, RelationView, Structure, SymbolDecl,
                         TypeView, Vocabulary, parse_typed_name)

__version__ = "0.1.0"

__all__ = [
    "KnowledgeBase", "ExpansionResult",
    "Vocabulary", "Structure", "SymbolDecl", "parse_typed_name",
    "TypeView", "RelationView", "FunctionView",
    "KBError", "ParseError", "TypeCheckError", "DeclarationError",
    "InterpretationError", "DefinitionError", "UnsupportedFragmentError",
    "UnsatisfiableError", "SolverError",
    "__version__",
]
