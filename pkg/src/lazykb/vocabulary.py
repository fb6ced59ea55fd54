"""Typed vocabularies and partial first-order structures.

A vocabulary declares finite types plus predicate, function and constant
symbols over them.  A structure interprets some of those symbols: a type gets
an ordered list of values, a predicate a set of tuples, a function a total
table (a constant is a 0-ary function).  Symbols left uninterpreted are
ABSENT; completing them is the model expander's job, not ours.

Values are Python str or int only.  Ordering of mixed values is defined by
`value_key` (ints before strings, each sorted naturally) so every listing the
package prints is reproducible regardless of hash seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

from .errors import DeclarationError, InterpretationError, ParseError

Value = Union[str, int]

KINDS = ("type", "predicate", "function", "constant")


def check_value(v: object) -> Value:
    """Reject anything that is not a plain str or int (bool is not a value)."""
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise InterpretationError(f"values must be str or int, got {v!r}")
    return v


def value_key(v: Value):
    """Total order over mixed values: all ints first, then strings."""
    if isinstance(v, int):
        return (0, v, "")
    return (1, 0, v)


def tuple_key(t: tuple) -> tuple:
    return tuple(value_key(v) for v in t)


def format_value(v: Value) -> str:
    """Render a value the way model listings print it: ints bare, strings quoted."""
    if isinstance(v, int):
        return str(v)
    return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_key(t: tuple) -> str:
    if len(t) == 1:
        return format_value(t[0])
    return "(" + ",".join(format_value(v) for v in t) + ")"


@dataclass(frozen=True)
class SymbolDecl:
    """One declared symbol.

    kind        one of 'type', 'predicate', 'function', 'constant'
    arg_sorts   argument type names; () for types, constants
    ret_sort    result type name for functions/constants, None otherwise
    """

    name: str
    kind: str
    arg_sorts: tuple[str, ...] = ()
    ret_sort: str | None = None

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)

    def typed_name(self) -> str:
        if self.kind == "type":
            return self.name
        if self.kind == "predicate":
            return f"{self.name}({','.join(self.arg_sorts)})"
        if self.kind == "constant":
            return f"{self.name} : {self.ret_sort}"
        return f"{self.name}({','.join(self.arg_sorts)}) : {self.ret_sort}"


_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789")


def _scan_ident(s: str, i: int) -> tuple[str, int]:
    while i < len(s) and s[i] in " \t":
        i += 1
    if i >= len(s) or s[i] not in _IDENT_START:
        raise ParseError(f"expected identifier in typed name {s!r}", 1, i + 1)
    j = i
    while j < len(s) and s[j] in _IDENT_CONT:
        j += 1
    return s[i:j], j


def _skip_ws(s: str, i: int) -> int:
    while i < len(s) and s[i] in " \t":
        i += 1
    return i


def parse_typed_name(text: str) -> SymbolDecl:
    """Parse a declaration string into a SymbolDecl.

    Shapes:  Name(S1,...,Sk)          predicate
             Name(S1,...,Sk) : S      function
             Name : S                 constant
             Name                     type
    """
    name, i = _scan_ident(text, 0)
    i = _skip_ws(text, i)
    args: list[str] = []
    kind = "type"
    if i < len(text) and text[i] == "(":
        i += 1
        i = _skip_ws(text, i)
        if i < len(text) and text[i] == ")":
            raise ParseError(f"empty argument list in {text!r}", 1, i + 1)
        while True:
            arg, i = _scan_ident(text, i)
            args.append(arg)
            i = _skip_ws(text, i)
            if i < len(text) and text[i] == ",":
                i += 1
                continue
            if i < len(text) and text[i] == ")":
                i += 1
                break
            raise ParseError(f"expected ',' or ')' in {text!r}", 1, i + 1)
        kind = "predicate"
    i = _skip_ws(text, i)
    ret = None
    if i < len(text) and text[i] == ":":
        ret, i = _scan_ident(text, i + 1)
        kind = "function" if args else "constant"
        i = _skip_ws(text, i)
    if i != len(text):
        raise ParseError(f"trailing characters in typed name {text!r}", 1, i + 1)
    return SymbolDecl(name, kind, tuple(args), ret)


@dataclass
class Structure:
    """Partial interpretation of a vocabulary's symbols.

    type_ext    type name -> ordered list of values (always present, may be [])
    rel_ext     predicate name -> dict used as ordered tuple set, or None=ABSENT
    fun_table   function/constant name -> dict argtuple->value, or None=ABSENT
                (constants are keyed by the empty tuple)
    """

    type_ext: dict[str, list[Value]] = field(default_factory=dict)
    rel_ext: dict[str, dict[tuple, None] | None] = field(default_factory=dict)
    fun_table: dict[str, dict[tuple, Value] | None] = field(default_factory=dict)

    def copy_shallow(self) -> "Structure":
        """New Structure sharing value lists/tables but with fresh top dicts.

        Callers overlay or replace per-symbol entries without touching the
        original.  Mutating an *inner* extension through the copy is not
        allowed; replace the entry instead.
        """
        return Structure(dict(self.type_ext), dict(self.rel_ext), dict(self.fun_table))

    def is_interpreted(self, decl: SymbolDecl) -> bool:
        if decl.kind == "type":
            return True
        if decl.kind == "predicate":
            return self.rel_ext.get(decl.name) is not None
        return self.fun_table.get(decl.name) is not None

    def sorted_tuples(self, name: str) -> list[tuple]:
        ext = self.rel_ext[name]
        if ext is None:
            raise InterpretationError(f"relation {name} is not interpreted")
        return sorted(ext, key=tuple_key)

    def sorted_items(self, name: str) -> list[tuple[tuple, Value]]:
        table = self.fun_table[name]
        if table is None:
            raise InterpretationError(f"function {name} is not interpreted")
        return sorted(table.items(), key=lambda kv: tuple_key(kv[0]))


class Vocabulary:
    """Ordered symbol declarations plus the user's partial structure."""

    def __init__(self) -> None:
        self.decls: dict[str, SymbolDecl] = {}
        self.struct = Structure()

    # -- declaration ------------------------------------------------------

    def declare(self, decl: SymbolDecl) -> SymbolDecl:
        if decl.name in self.decls:
            raise DeclarationError(f"symbol {decl.name} already declared")
        if decl.kind not in KINDS:
            raise DeclarationError(f"unknown symbol kind {decl.kind!r}")
        for s in decl.arg_sorts:
            self._check_sort(s, decl.name)
        if decl.ret_sort is not None:
            self._check_sort(decl.ret_sort, decl.name)
        if decl.kind in ("function", "constant") and decl.ret_sort is None:
            raise DeclarationError(f"{decl.name}: functions need a result type")
        self.decls[decl.name] = decl
        if decl.kind == "type":
            self.struct.type_ext[decl.name] = []
        elif decl.kind == "predicate":
            self.struct.rel_ext[decl.name] = None
        else:
            self.struct.fun_table[decl.name] = None
        return decl

    def _check_sort(self, sort: str, context: str) -> None:
        d = self.decls.get(sort)
        if d is None or d.kind != "type":
            raise DeclarationError(f"{context}: {sort!r} is not a declared type")

    def decl(self, name: str) -> SymbolDecl:
        d = self.decls.get(name)
        if d is None:
            raise DeclarationError(f"symbol {name!r} is not declared")
        return d

    def has(self, name: str) -> bool:
        return name in self.decls

    # -- interpretation ---------------------------------------------------

    def assign(self, name: str, raw: object) -> None:
        """Install (replace) an interpretation for a declared symbol."""
        decl = self.decl(name)
        if decl.kind == "type":
            self.struct.type_ext[name] = _normalize_type(raw)
            self._revalidate_dependents(name)
        elif decl.kind == "predicate":
            self.struct.rel_ext[name] = self.normalize_relation(decl, raw)
        else:
            self.struct.fun_table[name] = self.normalize_function(decl, raw)

    def clear(self, name: str) -> None:
        """Return a symbol to the ABSENT state (types go to the empty list)."""
        decl = self.decl(name)
        if decl.kind == "type":
            self.struct.type_ext[name] = []
        elif decl.kind == "predicate":
            self.struct.rel_ext[name] = None
        else:
            self.struct.fun_table[name] = None

    def normalize_relation(self, decl: SymbolDecl, raw: object) -> dict[tuple, None]:
        """Canonical form: dict keyed by value tuples, in sorted order.

        Accepts any iterable of tuples/lists, or of bare values when unary.
        Normalizing twice is a no-op: dicts in canonical form pass through
        the same sort and come out equal.
        """
        if raw is None:
            raise InterpretationError(f"{decl.name}: interpretation may not be None")
        out: dict[tuple, None] = {}
        for item in raw:  # type: ignore[union-attr]
            out[self.check_tuple(decl, item)] = None
        return {t: None for t in sorted(out, key=tuple_key)}

    def normalize_function(self, decl: SymbolDecl, raw: object) -> dict[tuple, Value]:
        """Canonical total table: dict argtuple -> value, keys sorted.

        Accepts a mapping, an iterable of (key, value) pairs, or for a
        constant the bare value.  The table must cover the full argument
        domain; anything partial is rejected.
        """
        if decl.kind == "constant":
            if isinstance(raw, dict):
                items = list(raw.items())
            elif isinstance(raw, (str, int)):
                items = [((), raw)]
            else:
                items = [tuple(p) for p in raw]  # type: ignore[union-attr]
        elif isinstance(raw, dict):
            items = list(raw.items())
        else:
            items = [tuple(p) for p in raw]  # type: ignore[union-attr]
        table: dict[tuple, Value] = {}
        for key, val in items:
            if decl.arity == 1 and not isinstance(key, (tuple, list)):
                key = (key,)
            elif decl.arity == 0 and key in ((), []):
                key = ()
            kt = self.check_args(decl, key)
            v = check_value(val)
            self._check_in_sort(v, decl.ret_sort, decl.name)
            if kt in table and table[kt] != v:
                raise InterpretationError(
                    f"{decl.name}: conflicting values for {kt}: {table[kt]!r} vs {v!r}")
            table[kt] = v
        domain = self._domain_size(decl)
        if len(table) != domain:
            raise InterpretationError(
                f"{decl.name}: table has {len(table)} entries, domain has {domain};"
                " function interpretations must be total")
        return {k: table[k] for k in sorted(table, key=tuple_key)}

    def check_tuple(self, decl: SymbolDecl, item: object) -> tuple:
        if decl.arity == 1 and not isinstance(item, (tuple, list)):
            item = (item,)
        if not isinstance(item, (tuple, list)) or len(item) != decl.arity:
            raise InterpretationError(
                f"{decl.name}: expected {decl.arity}-tuples, got {item!r}")
        return self.check_args(decl, item)

    def check_args(self, decl: SymbolDecl, args) -> tuple:
        if not isinstance(args, (tuple, list)) or len(args) != decl.arity:
            raise InterpretationError(
                f"{decl.name}: expected {decl.arity} arguments, got {args!r}")
        out = []
        for v, sort in zip(args, decl.arg_sorts):
            v = check_value(v)
            self._check_in_sort(v, sort, decl.name)
            out.append(v)
        return tuple(out)

    def _check_in_sort(self, v: Value, sort: str, context: str) -> None:
        if v not in self.struct.type_ext[sort]:
            raise InterpretationError(
                f"{context}: value {v!r} is not in type {sort}")

    def _domain_size(self, decl: SymbolDecl) -> int:
        n = 1
        for s in decl.arg_sorts:
            n *= len(self.struct.type_ext[s])
        return n

    def _revalidate_dependents(self, type_name: str) -> None:
        """After a type extension changes, recheck every stored interpretation
        that mentions the type.  Shrinking can orphan tuples; growing can make
        a function table partial.  Either way the caller must fix the data."""
        for decl in self.decls.values():
            uses = type_name in decl.arg_sorts or decl.ret_sort == type_name
            if not uses:
                continue
            if decl.kind == "predicate":
                ext = self.struct.rel_ext.get(decl.name)
                if ext is not None:
                    self.struct.rel_ext[decl.name] = self.normalize_relation(decl, list(ext))
            elif decl.kind in ("function", "constant"):
                table = self.struct.fun_table.get(decl.name)
                if table is not None:
                    self.struct.fun_table[decl.name] = self.normalize_function(decl, table)

    # -- type extension mutation -----------------------------------------

    def type_add(self, name: str, v: Value) -> None:
        decl = self.decl(name)
        if decl.kind != "type":
            raise DeclarationError(f"{name} is not a type")
        v = check_value(v)
        ext = self.struct.type_ext[name]
        if v not in ext:
            ext.append(v)
            try:
                self._revalidate_dependents(name)
            except InterpretationError:
                ext.pop()
                raise

    def type_discard(self, name: str, v: Value) -> None:
        decl = self.decl(name)
        if decl.kind != "type":
            raise DeclarationError(f"{name} is not a type")
        ext = self.struct.type_ext[name]
        if v in ext:
            pos = ext.index(v)
            ext.remove(v)
            try:
                self._revalidate_dependents(name)
            except InterpretationError:
                ext.insert(pos, v)
                raise


def _normalize_type(raw: object) -> list[Value]:
    """Ordered, duplicate-free value list.  Accepts any iterable (range too)."""
    if raw is None:
        return []
    out: list[Value] = []
    seen = set()
    for v in raw:  # type: ignore[union-attr]
        v = check_value(v)
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


# -- views ----------------------------------------------------------------
#
# Views give mutable, set/mapping-flavored access to one symbol.  They hold
# no data themselves: every operation goes through the owner, which decides
# whether to read the user's structure or a completed model, and which marks
# the KB dirty on writes.  The owner contract:
#
#   owner.vocab                         the Vocabulary
#   owner._view_read(name)              interpretation (expands if ABSENT)
#   owner._view_add(name, tup)          add tuple to a user relation
#   owner._view_discard(name, tup)      remove tuple from a user relation
#   owner._view_assign(name, raw)       replace a whole interpretation
#   owner._view_type_add(name, v)
#   owner._view_type_discard(name, v)


class TypeView:
    """Ordered set of a type's values."""

    def __init__(self, owner, name: str):
        self._owner = owner
        self.name = name

    def __contains__(self, v) -> bool:
        return v in self._owner.vocab.struct.type_ext[self.name]

    def __iter__(self) -> Iterator[Value]:
        return iter(list(self._owner.vocab.struct.type_ext[self.name]))

    def __len__(self) -> int:
        return len(self._owner.vocab.struct.type_ext[self.name])

    def add(self, v: Value) -> None:
        self._owner._view_type_add(self.name, v)

    def discard(self, v: Value) -> None:
        self._owner._view_type_discard(self.name, v)

    def __repr__(self) -> str:
        return f"<type {self.name} = {list(self)!r}>"


class RelationView:
    """Set-of-tuples access to a predicate.

    Unary relations accept and yield bare values rather than 1-tuples.
    Reading an ABSENT relation makes the owner expand the KB first; writing
    always targets the user's structure.
    """

    def __init__(self, owner, name: str):
        self._owner = owner
        self.name = name
        self._arity = owner.vocab.decl(name).arity

    def _as_tuple(self, item) -> tuple:
        if self._arity == 1 and not isinstance(item, (tuple, list)):
            return (item,)
        if isinstance(item, list):
            return tuple(item)
        return item

    def _read(self) -> dict[tuple, None]:
        return self._owner._view_read(self.name)

    def __contains__(self, item) -> bool:
        t = self._as_tuple(item)
        if not isinstance(t, tuple):
            return False
        return t in self._read()

    def __iter__(self) -> Iterator:
        ext = sorted(self._read(), key=tuple_key)
        if self._arity == 1:
            return iter([t[0] for t in ext])
        return iter(ext)

    def __len__(self) -> int:
        return len(self._read())

    def add(self, item) -> None:
        self._owner._view_add(self.name, self._as_tuple(item))

    def discard(self, item) -> None:
        self._owner._view_discard(self.name, self._as_tuple(item))

    def remove(self, item) -> None:
        t = self._as_tuple(item)
        if t not in self._read():
            raise KeyError(item)
        self._owner._view_discard(self.name, t)

    def assign(self, raw: Iterable) -> None:
        self._owner._view_assign(self.name, raw)

    def __call__(self, *args) -> bool:
        return tuple(args) in self._read()

    def __repr__(self) -> str:
        return f"<relation {self.name}/{self._arity}>"


class FunctionView:
    """Mapping access to a function or constant (argtuple -> value)."""

    def __init__(self, owner, name: str):
        self._owner = owner
        self.name = name
        self._arity = owner.vocab.decl(name).arity

    def _as_key(self, key) -> tuple:
        if self._arity == 1 and not isinstance(key, (tuple, list)):
            return (key,)
        if self._arity == 0 and key in ((), None):
            return ()
        if isinstance(key, list):
            return tuple(key)
        return key

    def _read(self) -> dict[tuple, Value]:
        return self._owner._view_read(self.name)

    def __getitem__(self, key) -> Value:
        k = self._as_key(key)
        table = self._read()
        if k not in table:
            raise KeyError(key)
        return table[k]

    def __call__(self, *args) -> Value:
        table = self._read()
        if args not in table:
            raise KeyError(args)
        return table[args]

    def __contains__(self, key) -> bool:
        return self._as_key(key) in self._read()

    def __iter__(self) -> Iterator:
        keys = sorted(self._read(), key=tuple_key)
        if self._arity == 1:
            return iter([k[0] for k in keys])
        return iter(keys)

    def __len__(self) -> int:
        return len(self._read())

    def keys(self) -> list:
        return list(self)

    def values(self) -> list:
        table = self._read()
        return [table[k] for k in sorted(table, key=tuple_key)]

    def items(self) -> list:
        table = self._read()
        ks = sorted(table, key=tuple_key)
        if self._arity == 1:
            return [(k[0], table[k]) for k in ks]
        return [(k, table[k]) for k in ks]

    def assign(self, raw) -> None:
        self._owner._view_assign(self.name, raw)

    def __repr__(self) -> str:
        return f"<function {self.name}/{self._arity}>"


# -- dumps ----------------------------------------------------------------


def format_interpretation(decl: SymbolDecl, struct: Structure) -> str:
    """One `Name = ...` listing line in canonical order.

    Relations:  Border = {("a","b");("b","c")}     (unary: bare values)
    Functions:  Coloring = {"Belgium"->"Red";...}
    Constants:  C = "Blue"
    Types:      Color = {"Red";"Green";"Blue"}     (declaration order kept)
    """
    if decl.kind == "type":
        vals = struct.type_ext[decl.name]
        return f"{decl.name} = {{{';'.join(format_value(v) for v in vals)}}}"
    if decl.kind == "predicate":
        tuples = struct.sorted_tuples(decl.name)
        body = ";".join(format_key(t) for t in tuples)
        return f"{decl.name} = {{{body}}}"
    if decl.kind == "constant":
        table = struct.fun_table[decl.name]
        if table is None:
            raise InterpretationError(f"constant {decl.name} is not interpreted")
        return f"{decl.name} = {format_value(table[()])}"
    items = struct.sorted_items(decl.name)
    body = ";".join(f"{format_key(k)}->{format_value(v)}" for k, v in items)
    return f"{decl.name} = {{{body}}}"


def dump_blocks(vocab: Vocabulary,
                constraints: Iterable[str] = (),
                definitions: Iterable[str] = (),
                name: str = "K") -> str:
    """Readable block dump of the KB state: vocabulary, structure, theory,
    definitions.  ABSENT symbols appear only in the vocabulary block."""
    lines = [f"vocabulary {name}_voc {{"]
    for d in vocab.decls.values():
        prefix = "type " if d.kind == "type" else ""
        lines.append(f"    {prefix}{d.typed_name()}")
    lines.append("}")
    lines.append(f"structure {name}_struct : {name}_voc {{")
    for d in vocab.decls.values():
        if d.kind == "type" or vocab.struct.is_interpreted(d):
            lines.append("    " + format_interpretation(d, vocab.struct))
    lines.append("}")
    lines.append(f"theory {name}_theory : {name}_voc {{")
    for c in constraints:
        lines.append(f"    {c}")
    lines.append("}")
    defs = list(definitions)
    if defs:
        lines.append(f"define {name}_defs : {name}_voc {{")
        for d in defs:
            lines.append(f"    {d}")
        lines.append("}")
    return "\n".join(lines) + "\n"
