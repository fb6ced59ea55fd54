"""Exception types shared across the package.

Every error raised on a user-facing path derives from KBError so embedders
can catch one type at the boundary.  Parse-time problems carry a position;
semantic problems carry the offending symbol where known.
"""

from __future__ import annotations


class KBError(Exception):
    """Base class for all knowledge-base errors."""


class ParseError(KBError):
    """Malformed source text (typed names, constraints, scripts)."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


class TypeCheckError(KBError):
    """Expression is well-formed but ill-typed against the vocabulary."""


class DeclarationError(KBError):
    """Bad declaration: duplicate name, unknown sort, wrong shape."""


class InterpretationError(KBError):
    """Interpretation data does not fit the declared symbol."""


class DefinitionError(KBError):
    """Ill-formed inductive definition (bad head, rule arity, negative cycle)."""


class UnsupportedFragmentError(KBError):
    """Input is outside the groundable fragment (e.g. negated recursion
    over an unfilled parameter, mutual recursion over unfilled parameters)."""


class UnsatisfiableError(KBError):
    """Raised when a value is demanded from a KB whose theory has no model."""


class SolverError(KBError):
    """Internal solver invariant broke; indicates a bug, not bad input."""
