"""Host-language bindings for the lazykb engine.

The engine is reached exclusively through its flat foreign-function
boundary; this package wraps that surface in ordinary Python objects.
"""

from .graphs import GraphKB, is_tree
from .kb import KB, KBError, Unsatisfiable

__all__ = ["KB", "KBError", "Unsatisfiable", "GraphKB", "is_tree"]
