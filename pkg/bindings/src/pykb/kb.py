"""Pythonic face over the flat knowledge-base boundary.

A :class:`KB` owns one engine handle and turns the declared symbols into
attributes of the object itself: types and relations behave as mutable
sets, functions as mappings, constants as plain values.  Everything is
also callable in first-order style, so the same expression works inside
a constraint string and at the prompt.

The class stays a thin adapter.  Every operation is one or two calls
across the foreign-function surface (:mod:`lazykb.capi`), with JSON on
the wire and no engine state cached on this side.
"""

import json
from collections.abc import Mapping, MutableSet

from lazykb import capi

__all__ = ["KB", "KBError", "Unsatisfiable"]


class KBError(Exception):
    """Engine failure surfaced through the boundary.

    The numeric ``code`` is the boundary's error class; the message is
    the engine's own description.
    """

    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


class Unsatisfiable(KBError):
    """The theory admits no model over the current structure."""


def _unwrap(result):
    """Return the payload of a boundary call, or raise.

    Host-level misuse travels as a ``ClassName: message`` payload and is
    re-raised as the named built-in so container protocols keep working
    (a missing function argument must surface as ``KeyError``).
    """
    code, payload = result
    if code == capi.OK:
        return payload
    if code == capi.ERR_BAD_CALL:
        name, _, message = payload.partition(": ")
        if name == "KeyError":
            raise KeyError(message)
        if name == "TypeError":
            raise TypeError(message)
        raise ValueError(message)
    if code == capi.ERR_UNSAT:
        raise Unsatisfiable(code, payload)
    raise KBError(code, payload)


def _encode_interp(kind, value):
    """JSON-encode an interpretation following the boundary conventions.

    Predicates take any iterable of tuples (bare values allowed when
    unary); functions take a mapping or an iterable of (args, value)
    pairs; constants take the value itself; types take a value list.
    """
    if kind == "type":
        return json.dumps(list(value))
    if kind == "predicate":
        rows = [list(t) if isinstance(t, (tuple, list)) else [t] for t in value]
        return json.dumps(rows)
    if kind == "constant":
        return json.dumps(value)
    items = value.items() if isinstance(value, Mapping) else value
    rows = []
    for key, val in items:
        rows.append([list(key) if isinstance(key, (tuple, list)) else [key], val])
    return json.dumps(rows)


class KB:
    """A knowledge base: typed vocabulary, partial structure, theory.

    Symbols declared through :meth:`Type`, :meth:`Predicate`,
    :meth:`Function` and :meth:`Constant` appear as attributes.  Reading
    an attribute whose symbol has no interpretation yet makes the engine
    complete one lazily; assigning an attribute installs an
    interpretation and invalidates any cached model.

    Keyword options are passed straight to the engine (``debug``,
    ``unfold_depth``, ``fixpoint_mode``).
    """

    def __init__(self, name="kb", **options):
        object.__setattr__(self, "_handle", None)
        blob = json.dumps({"name": name, **options})
        object.__setattr__(self, "_handle", int(_unwrap(capi.kb_new(blob))))

    # -- lifecycle -------------------------------------------------------

    def close(self):
        if self._handle is not None:
            capi.kb_release(self._handle)
            object.__setattr__(self, "_handle", None)

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass

    def __repr__(self):
        state = self._handle if self._handle is not None else "closed"
        return f"<KB {state}>"

    # -- declarations ------------------------------------------------------

    def Type(self, name, interpretation=None):
        """Declare a finite type, optionally with its value list."""
        self._declare(name, "type", interpretation)

    def Predicate(self, typed_name, interpretation=None):
        """Declare a relation, e.g. ``Border(Area, Area)``."""
        self._declare(typed_name, "predicate", interpretation)

    def Function(self, typed_name, interpretation=None):
        """Declare a function, e.g. ``Coloring(Area): Color``."""
        self._declare(typed_name, "function", interpretation)

    def Constant(self, typed_name, interpretation=None):
        """Declare a constant, e.g. ``limit: Number``."""
        self._declare(typed_name, "constant", interpretation)

    def _declare(self, typed_name, kind, interpretation):
        blob = "" if interpretation is None else _encode_interp(kind, interpretation)
        _unwrap(capi.kb_declare(self._handle, typed_name, blob))

    def Constraint(self, source):
        """Add a boolean comprehension the models must satisfy."""
        _unwrap(capi.kb_constraint(self._handle, source))

    def Define(self, head, rule=None):
        """Add an inductive definition.

        Either ``Define(head, rule)`` for a single rule, or
        ``Define([(head, rule), ...])`` where repeated heads contribute
        alternative rules to one definition.
        """
        if rule is not None:
            _unwrap(capi.kb_define(self._handle, head, json.dumps(rule)))
            return
        grouped = {}
        for h, r in head:
            grouped.setdefault(h, []).append(r)
        # declare every head first so mutually recursive bodies resolve
        for h in grouped:
            base = h.split("(")[0].split(":")[0].strip()
            code, _ = capi.kb_symbol(self._handle, base)
            if code != capi.OK:
                _unwrap(capi.kb_declare(self._handle, h, ""))
        for h, rules in grouped.items():
            _unwrap(capi.kb_define(self._handle, h, json.dumps(rules)))

    # -- solving -----------------------------------------------------------

    @property
    def satisfiable(self):
        return _unwrap(capi.kb_satisfiable(self._handle)) == "true"

    def __bool__(self):
        return self.satisfiable

    @property
    def solver_invocations(self):
        """How many times the engine has actually run its solver."""
        return int(_unwrap(capi.kb_solver_invocations(self._handle)))

    def expand(self):
        """Force a solve and return the full model as plain data."""
        return json.loads(_unwrap(capi.kb_expand(self._handle)))

    def models(self, limit=0):
        """Enumerate models (all of them when ``limit`` is 0)."""
        return json.loads(_unwrap(capi.kb_enumerate(self._handle, limit)))

    def symbols(self):
        return json.loads(_unwrap(capi.kb_symbols(self._handle)))

    def dump(self):
        return _unwrap(capi.kb_dump(self._handle))

    # -- symbols as attributes ----------------------------------------------

    def _symbol(self, name):
        code, payload = capi.kb_symbol(self._handle, name)
        return json.loads(payload) if code == capi.OK else None

    def __getattr__(self, name):
        # reached only when normal lookup misses: treat as a symbol name
        if name.startswith("_"):
            raise AttributeError(name)
        info = self._symbol(name)
        if info is None:
            raise AttributeError(f"no symbol {name!r} declared in this KB")
        kind = info["kind"]
        if kind == "type":
            return TypeProxy(self, name)
        if kind == "predicate":
            return RelationProxy(self, name, len(info["args"]))
        if kind == "constant":
            return json.loads(_unwrap(capi.kb_materialize(self._handle, name)))
        return FunctionProxy(self, name, len(info["args"]))

    def __setattr__(self, name, value):
        if name.startswith("_"):
            object.__setattr__(self, name, value)
            return
        info = self._symbol(name) if self._handle is not None else None
        if info is None:
            object.__setattr__(self, name, value)
            return
        _unwrap(capi.kb_assign(self._handle, name, _encode_interp(info["kind"], value)))


class _Proxy:
    """Live view of one symbol; every operation crosses the boundary."""

    def __init__(self, kb, name, arity=1):
        self._kb = kb
        self._name = name
        self._arity = arity

    @property
    def _h(self):
        return self._kb._handle

    def __repr__(self):
        # deliberately does not read the symbol: repr must never trigger a solve
        return f"<{type(self).__name__} {self._name}>"


class TypeProxy(_Proxy, MutableSet):
    """A type's value collection, growable before the first solve."""

    def _values(self):
        return json.loads(_unwrap(capi.kb_type_values(self._h, self._name)))

    def __contains__(self, value):
        return value in self._values()

    def __iter__(self):
        return iter(self._values())

    def __len__(self):
        return len(self._values())

    def add(self, value):
        _unwrap(capi.kb_type_add(self._h, self._name, json.dumps(value)))

    def discard(self, value):
        _unwrap(capi.kb_type_discard(self._h, self._name, json.dumps(value)))

    def __call__(self, value):
        return value in self

    @classmethod
    def _from_iterable(cls, it):
        return set(it)


class RelationProxy(_Proxy, MutableSet):
    """A relation as a set of tuples (bare values when unary).

    Reading from a relation that has no interpretation solves the KB
    first; the extension seen belongs to the computed model.  Membership
    of a value outside the column types is simply ``False``.
    """

    def _json(self, item):
        if self._arity == 1 and not isinstance(item, (tuple, list)):
            item = (item,)
        return json.dumps(list(item) if isinstance(item, (tuple, list)) else item)

    def __contains__(self, item):
        try:
            blob = self._json(item)
        except TypeError:
            return False
        try:
            return _unwrap(capi.kb_rel_contains(self._h, self._name, blob)) == "true"
        except Unsatisfiable:
            raise
        except KBError as exc:
            if exc.code == capi.ERR_INTERP:
                return False
            raise
        except (KeyError, ValueError, TypeError):
            return False

    def __iter__(self):
        rows = json.loads(_unwrap(capi.kb_rel_tuples(self._h, self._name)))
        for row in rows:
            yield row[0] if self._arity == 1 else tuple(row)

    def __len__(self):
        return int(_unwrap(capi.kb_count(self._h, self._name)))

    def add(self, item):
        _unwrap(capi.kb_rel_add(self._h, self._name, self._json(item)))

    def discard(self, item):
        _unwrap(capi.kb_rel_discard(self._h, self._name, self._json(item)))

    def __call__(self, *args):
        return (args[0] if len(args) == 1 else args) in self

    @classmethod
    def _from_iterable(cls, it):
        return set(it)


class FunctionProxy(_Proxy, Mapping):
    """A function as a mapping from argument tuples (bare values when
    unary) to results, callable in first-order style.

    ``keys``/``values``/``items`` return lists in domain order, matching
    how interactive sessions consume them.
    """

    def _items(self):
        rows = json.loads(_unwrap(capi.kb_fun_items(self._h, self._name)))
        if self._arity == 1:
            return [(k[0], v) for k, v in rows]
        return [(tuple(k), v) for k, v in rows]

    def __getitem__(self, key):
        if not isinstance(key, (tuple, list)):
            key = (key,)
        payload = _unwrap(capi.kb_fun_value(self._h, self._name, json.dumps(list(key))))
        return json.loads(payload)

    def __iter__(self):
        return iter(k for k, _ in self._items())

    def __len__(self):
        return int(_unwrap(capi.kb_count(self._h, self._name)))

    def keys(self):
        return [k for k, _ in self._items()]

    def values(self):
        return [v for _, v in self._items()]

    def items(self):
        return self._items()

    def __call__(self, *args):
        return self[args[0] if len(args) == 1 else args]
