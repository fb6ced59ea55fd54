"""Flat, FFI-shaped boundary over the knowledge base.

Host-language embeddings call these functions instead of touching the
classes: every call takes plain ints and UTF-8 strings (structured data as
JSON), and returns a `(code, payload)` pair.  Code 0 means success and the
payload carries the result (JSON where structured); any other code is an
error class and the payload is a human-readable message.  Handles are small
integers naming live KnowledgeBase instances; `kb_release` frees one.

JSON conventions: values are JSON strings or numbers; tuples are arrays;
relation interpretations are arrays of arrays; function tables are arrays of
`[args_array, value]` pairs; a constant is its bare value.
"""

from __future__ import annotations

import json
from typing import Callable

from .errors import (DeclarationError, DefinitionError, InterpretationError,
                     KBError, ParseError, SolverError, TypeCheckError,
                     UnsatisfiableError, UnsupportedFragmentError)
from .kbcore import KnowledgeBase

OK = 0
ERR_PARSE = 1
ERR_TYPE = 2
ERR_DECL = 3
ERR_INTERP = 4
ERR_DEF = 5
ERR_UNSUPPORTED = 6
ERR_UNSAT = 7
ERR_SOLVER = 8
ERR_BAD_HANDLE = 9
ERR_BAD_CALL = 10
ERR_INTERNAL = 11

_CODE_OF = [
    (ParseError, ERR_PARSE),
    (TypeCheckError, ERR_TYPE),
    (DeclarationError, ERR_DECL),
    (InterpretationError, ERR_INTERP),
    (DefinitionError, ERR_DEF),
    (UnsupportedFragmentError, ERR_UNSUPPORTED),
    (UnsatisfiableError, ERR_UNSAT),
    (SolverError, ERR_SOLVER),
    (KBError, ERR_INTERNAL),
]

_registry: dict[int, KnowledgeBase] = {}
_next_handle = 1


def _code_for(exc: Exception) -> int:
    for klass, code in _CODE_OF:
        if isinstance(exc, klass):
            return code
    return ERR_INTERNAL


def _call(fn: Callable[[], str]) -> tuple[int, str]:
    try:
        return OK, fn()
    except KBError as exc:
        return _code_for(exc), str(exc)
    except (ValueError, TypeError, KeyError) as exc:
        return ERR_BAD_CALL, f"{type(exc).__name__}: {exc}"


def _kb(handle: int) -> KnowledgeBase:
    kb = _registry.get(handle)
    if kb is None:
        raise KeyError(f"no knowledge base with handle {handle}")
    return kb


def _tuples_json(pairs) -> str:
    return json.dumps([list(t) for t in pairs])


def _decode_tuple(tuple_json: str) -> tuple:
    data = json.loads(tuple_json)
    if not isinstance(data, list):
        data = [data]
    return tuple(data)


def _decode_interp(kind: str, interp_json: str):
    data = json.loads(interp_json)
    if kind == "predicate":
        return [tuple(t) if isinstance(t, list) else t for t in data]
    if kind == "function":
        return {tuple(k) if isinstance(k, list) else (k,): v for k, v in data}
    return data  # type extension list, or a bare constant value


# -- lifecycle ---------------------------------------------------------------


def kb_new(options_json: str = "{}") -> tuple[int, str]:
    """Create a knowledge base; payload is the handle as a decimal string.
    Options (all optional): name, debug, unfold_depth, fixpoint_mode."""
    global _next_handle

    def go() -> str:
        global _next_handle
        opts = json.loads(options_json or "{}")
        kb = KnowledgeBase(
            name=opts.get("name", "kb"),
            debug=bool(opts.get("debug", False)),
            unfold_depth=opts.get("unfold_depth"),
            fixpoint_mode=opts.get("fixpoint_mode", "seminaive"),
        )
        handle = _next_handle
        _next_handle += 1
        _registry[handle] = kb
        return str(handle)

    return _call(go)


def kb_release(handle: int) -> tuple[int, str]:
    def go() -> str:
        if handle not in _registry:
            raise KeyError(f"no knowledge base with handle {handle}")
        del _registry[handle]
        return ""

    code, payload = _call(go)
    return (ERR_BAD_HANDLE, payload) if code == ERR_BAD_CALL else (code, payload)


def _with_kb(handle: int, fn: Callable[[KnowledgeBase], str]) -> tuple[int, str]:
    kb = _registry.get(handle)
    if kb is None:
        return ERR_BAD_HANDLE, f"no knowledge base with handle {handle}"
    return _call(lambda: fn(kb))


# -- declarations ---------------------------------------------------------------


def kb_declare(handle: int, typed_name: str,
               interp_json: str = "") -> tuple[int, str]:
    """Declare a type (bare name), predicate `P(T,...)`, function
    `F(T,...) : T` or constant `c : T`, optionally with an interpretation."""

    def go(kb: KnowledgeBase) -> str:
        interp = None
        if interp_json:
            from .vocabulary import parse_typed_name

            decl = parse_typed_name(typed_name)
            interp = _decode_interp(decl.kind, interp_json)
        kb.declare(typed_name, interp)
        return ""

    return _with_kb(handle, go)


def kb_assign(handle: int, name: str, interp_json: str) -> tuple[int, str]:
    def go(kb: KnowledgeBase) -> str:
        kind = kb.vocab.decl(name).kind
        kb.assign(name, _decode_interp(kind, interp_json))
        return ""

    return _with_kb(handle, go)


def kb_clear(handle: int, name: str) -> tuple[int, str]:
    return _with_kb(handle, lambda kb: (kb.clear(name), "")[1])


def kb_constraint(handle: int, source: str) -> tuple[int, str]:
    return _with_kb(handle, lambda kb: (kb.constraint(source), "")[1])


def kb_define(handle: int, head: str, rules_json: str) -> tuple[int, str]:
    """rules_json: a JSON string (one lambda) or array of lambda strings."""

    def go(kb: KnowledgeBase) -> str:
        rules = json.loads(rules_json)
        kb.define(head, rules)
        return ""

    return _with_kb(handle, go)


# -- symbol info ------------------------------------------------------------------


def kb_symbols(handle: int) -> tuple[int, str]:
    def go(kb: KnowledgeBase) -> str:
        out = []
        for d in kb.vocab.decls.values():
            out.append({"name": d.name, "kind": d.kind,
                        "args": list(d.arg_sorts), "ret": d.ret_sort,
                        "defined": d.name in kb.definitions,
                        "interpreted": kb.vocab.struct.is_interpreted(d)})
        return json.dumps(out)

    return _with_kb(handle, go)


def kb_symbol(handle: int, name: str) -> tuple[int, str]:
    def go(kb: KnowledgeBase) -> str:
        d = kb.vocab.decl(name)
        return json.dumps({"name": d.name, "kind": d.kind,
                           "args": list(d.arg_sorts), "ret": d.ret_sort,
                           "defined": name in kb.definitions,
                           "interpreted": kb.vocab.struct.is_interpreted(d)})

    return _with_kb(handle, go)


# -- solving ----------------------------------------------------------------------


def kb_satisfiable(handle: int) -> tuple[int, str]:
    return _with_kb(handle,
                    lambda kb: "true" if kb.satisfiable else "false")


def kb_expand(handle: int) -> tuple[int, str]:
    def go(kb: KnowledgeBase) -> str:
        r = kb.expand()
        return json.dumps({"satisfiable": r.satisfiable, "stats": r.stats})

    return _with_kb(handle, go)


def kb_materialize(handle: int, name: str) -> tuple[int, str]:
    def go(kb: KnowledgeBase) -> str:
        kind = kb.vocab.decl(name).kind
        data = kb.materialize(name)
        if kind == "predicate":
            return _tuples_json(data)
        if kind == "function":
            return json.dumps([[list(k), v] for k, v in data.items()])
        return json.dumps(data)

    return _with_kb(handle, go)


def kb_solver_invocations(handle: int) -> tuple[int, str]:
    return _with_kb(handle, lambda kb: str(kb.solver_invocations))


def kb_enumerate(handle: int, limit: int = 0) -> tuple[int, str]:
    """Models as an array; each model maps previously-uninterpreted symbol
    names to interpretations (same encoding as kb_materialize)."""

    def go(kb: KnowledgeBase) -> str:
        symbols = kb.absent_user_symbols()
        out = []
        for st in kb.enumerate_models(limit):
            entry = {}
            for s in symbols:
                d = kb.vocab.decl(s)
                if d.kind == "predicate":
                    entry[s] = [list(t) for t in st.sorted_tuples(s)]
                elif d.kind == "constant":
                    entry[s] = st.fun_table[s][()]
                else:
                    entry[s] = [[list(k), v] for k, v in st.sorted_items(s)]
            out.append(entry)
        return json.dumps(out)

    return _with_kb(handle, go)


# -- relation access -----------------------------------------------------------------


def kb_rel_contains(handle: int, name: str, tuple_json: str) -> tuple[int, str]:
    def go(kb: KnowledgeBase) -> str:
        return "true" if _decode_tuple(tuple_json) in kb.relation(name) else "false"

    return _with_kb(handle, go)


def kb_rel_add(handle: int, name: str, tuple_json: str) -> tuple[int, str]:
    return _with_kb(
        handle,
        lambda kb: (kb.relation(name).add(_decode_tuple(tuple_json)), "")[1])


def kb_rel_discard(handle: int, name: str, tuple_json: str) -> tuple[int, str]:
    return _with_kb(
        handle,
        lambda kb: (kb.relation(name).discard(_decode_tuple(tuple_json)), "")[1])


def kb_rel_tuples(handle: int, name: str) -> tuple[int, str]:
    def go(kb: KnowledgeBase) -> str:
        kb.relation(name)  # raises if not a predicate
        ext = kb._view_read(name)
        from .vocabulary import tuple_key

        return _tuples_json(sorted(ext, key=tuple_key))

    return _with_kb(handle, go)


def kb_count(handle: int, name: str) -> tuple[int, str]:
    """Size of a symbol's interpretation (tuples, table entries, or values)."""

    def go(kb: KnowledgeBase) -> str:
        d = kb.vocab.decl(name)
        if d.kind == "type":
            return str(len(kb.vocab.struct.type_ext[name]))
        return str(len(kb._view_read(name)))

    return _with_kb(handle, go)


# -- function access -------------------------------------------------------------------


def kb_fun_value(handle: int, name: str, args_json: str) -> tuple[int, str]:
    def go(kb: KnowledgeBase) -> str:
        view = kb.function(name)
        return json.dumps(view[_decode_tuple(args_json)])

    return _with_kb(handle, go)


def kb_fun_items(handle: int, name: str) -> tuple[int, str]:
    def go(kb: KnowledgeBase) -> str:
        kb.function(name)
        table = kb._view_read(name)
        from .vocabulary import tuple_key

        keys = sorted(table, key=tuple_key)
        return json.dumps([[list(k), table[k]] for k in keys])

    return _with_kb(handle, go)


# -- type access -----------------------------------------------------------------------


def kb_type_values(handle: int, name: str) -> tuple[int, str]:
    def go(kb: KnowledgeBase) -> str:
        d = kb.vocab.decl(name)
        if d.kind != "type":
            raise DeclarationError(f"{name} is not a type")
        return json.dumps(list(kb.vocab.struct.type_ext[name]))

    return _with_kb(handle, go)


def kb_type_add(handle: int, name: str, value_json: str) -> tuple[int, str]:
    return _with_kb(
        handle,
        lambda kb: (kb._view_type_add(name, json.loads(value_json)), "")[1])


def kb_type_discard(handle: int, name: str, value_json: str) -> tuple[int, str]:
    return _with_kb(
        handle,
        lambda kb: (kb._view_type_discard(name, json.loads(value_json)), "")[1])


# -- diagnostics -----------------------------------------------------------------------


def kb_dump(handle: int) -> tuple[int, str]:
    return _with_kb(handle, lambda kb: kb.dump())


def kb_absent_symbols(handle: int) -> tuple[int, str]:
    return _with_kb(handle, lambda kb: json.dumps(kb.absent_user_symbols()))
