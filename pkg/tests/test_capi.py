"""Flat boundary: handle lifecycle, JSON payload shapes, error code classes.

Every call returns (code, payload); these tests pin the code for each failure
class and the exact JSON encodings, since host-language embeddings parse them
without access to the Python objects."""

import json

import pytest

from lazykb import capi
from oracles import floyd_warshall


@pytest.fixture
def handle():
    code, payload = capi.kb_new('{"name": "t"}')
    assert code == capi.OK
    h = int(payload)
    yield h
    capi.kb_release(h)


def ok(call):
    code, payload = call
    assert code == capi.OK, payload
    return payload


def setup_coloring(h, colors=("Red", "Green", "Blue")):
    ok(capi.kb_declare(h, "Area", json.dumps(["Belgium", "Holland", "Germany"])))
    ok(capi.kb_declare(h, "Color", json.dumps(list(colors))))
    ok(capi.kb_declare(h, "Border(Area, Area)", json.dumps(
        [["Belgium", "Holland"], ["Belgium", "Germany"],
         ["Holland", "Germany"]])))
    ok(capi.kb_declare(h, "Coloring(Area) : Color"))
    ok(capi.kb_constraint(
        h, "all(Coloring(x) != Coloring(y) for (x, y) in Border)"))


# -- lifecycle -------------------------------------------------------------------


def test_handles_are_distinct_and_releasable():
    c1, p1 = capi.kb_new()
    c2, p2 = capi.kb_new()
    assert c1 == c2 == capi.OK
    assert p1 != p2
    assert capi.kb_release(int(p1)) == (capi.OK, "")
    code, msg = capi.kb_release(int(p1))
    assert code == capi.ERR_BAD_HANDLE and msg
    capi.kb_release(int(p2))


def test_operations_on_a_bad_handle():
    code, msg = capi.kb_constraint(999999, "1 == 1")
    assert code == capi.ERR_BAD_HANDLE and msg


def test_kb_new_rejects_bad_options():
    code, msg = capi.kb_new("{not json")
    assert code == capi.ERR_BAD_CALL and msg


def test_kb_new_options_reach_the_kb():
    h = int(ok(capi.kb_new('{"name": "mykb"}')))
    try:
        assert "vocabulary mykb_voc {" in ok(capi.kb_dump(h))
    finally:
        capi.kb_release(h)


# -- declarations and error classes -----------------------------------------------


def test_declare_all_kinds(handle):
    ok(capi.kb_declare(handle, "N", json.dumps([0, 1, 2])))
    ok(capi.kb_declare(handle, "P(N)", json.dumps([0, 2])))
    ok(capi.kb_declare(handle, "F(N) : N",
                       json.dumps([[[0], 1], [[1], 2], [[2], 0]])))
    ok(capi.kb_declare(handle, "c : N", json.dumps(1)))
    syms = json.loads(ok(capi.kb_symbols(handle)))
    assert [s["name"] for s in syms] == ["N", "P", "F", "c"]
    assert [s["kind"] for s in syms] == \
        ["type", "predicate", "function", "constant"]
    assert all(s["interpreted"] for s in syms)
    one = json.loads(ok(capi.kb_symbol(handle, "F")))
    assert one["args"] == ["N"] and one["ret"] == "N"


def test_error_code_classes(handle):
    ok(capi.kb_declare(handle, "N", json.dumps([0, 1])))
    assert capi.kb_declare(handle, "P(N")[0] == capi.ERR_PARSE
    assert capi.kb_declare(handle, "P(Missing)")[0] == capi.ERR_DECL
    assert capi.kb_declare(handle, "N")[0] == capi.ERR_DECL  # duplicate
    assert capi.kb_constraint(handle, "all(x for")[0] == capi.ERR_PARSE
    assert capi.kb_constraint(handle, "Nope(0)")[0] == capi.ERR_TYPE
    ok(capi.kb_declare(handle, "P(N)"))
    assert capi.kb_constraint(handle, "P(0, 1)")[0] == capi.ERR_TYPE
    assert capi.kb_assign(handle, "P", json.dumps([[7]]))[0] == capi.ERR_INTERP
    assert capi.kb_define(handle, "P(N)", "{bad json")[0] == capi.ERR_BAD_CALL
    assert capi.kb_define(
        handle, "D(N)", json.dumps("lambda x: not D(x)"))[0] == capi.ERR_DEF
    assert capi.kb_symbol(handle, "Ghost")[0] == capi.ERR_DECL
    # every error payload is a usable message
    for call in [capi.kb_declare(handle, "P(N"),
                 capi.kb_constraint(handle, "Nope(0)")]:
        assert call[1].strip()


# -- solving through the boundary ---------------------------------------------------


def test_coloring_round_trip(handle):
    setup_coloring(handle)
    assert ok(capi.kb_solver_invocations(handle)) == "0"
    assert ok(capi.kb_satisfiable(handle)) == "true"
    assert ok(capi.kb_solver_invocations(handle)) == "1"

    expanded = json.loads(ok(capi.kb_expand(handle)))
    assert expanded["satisfiable"] is True
    assert expanded["stats"]["vars"] == 9
    assert expanded["stats"]["clauses"] == 21
    assert ok(capi.kb_solver_invocations(handle)) == "1"  # cache reused

    table = dict((tuple(k), v) for k, v in
                 json.loads(ok(capi.kb_materialize(handle, "Coloring"))))
    assert set(table) == {("Belgium",), ("Holland",), ("Germany",)}
    assert table[("Belgium",)] != table[("Holland",)]

    # a real mutation invalidates; the next read solves once more
    ok(capi.kb_rel_add(handle, "Border", json.dumps(["Germany", "Belgium"])))
    assert ok(capi.kb_solver_invocations(handle)) == "1"
    ok(capi.kb_materialize(handle, "Coloring"))
    assert ok(capi.kb_solver_invocations(handle)) == "2"


def test_unsat_reports_through_codes(handle):
    setup_coloring(handle, colors=("Red", "Green"))
    assert ok(capi.kb_satisfiable(handle)) == "false"
    code, msg = capi.kb_materialize(handle, "Coloring")
    assert code == capi.ERR_UNSAT and msg
    assert json.loads(ok(capi.kb_expand(handle)))["satisfiable"] is False


def test_enumerate_payload_shape(handle):
    setup_coloring(handle)
    models = json.loads(ok(capi.kb_enumerate(handle, 0)))
    assert len(models) == 6
    for m in models:
        assert list(m) == ["Coloring"]
        pairs = m["Coloring"]
        assert len(pairs) == 3
        assert all(isinstance(k, list) and isinstance(v, str)
                   for k, v in pairs)
    assert len(json.loads(ok(capi.kb_enumerate(handle, 2)))) == 2


def test_definitions_through_the_boundary(handle):
    ok(capi.kb_declare(handle, "Node", json.dumps([0, 1, 2, 3])))
    ok(capi.kb_declare(handle, "Edge(Node, Node)",
                       json.dumps([[0, 1], [1, 2]])))
    ok(capi.kb_define(handle, "Path(Node, Node)", json.dumps(
        ["lambda x, y: Edge(x, y)",
         "lambda x, y: any(Edge(x, z) and Path(z, y) for z in Node)"])))
    got = {tuple(t) for t in
           json.loads(ok(capi.kb_materialize(handle, "Path")))}
    assert got == floyd_warshall([0, 1, 2, 3], [(0, 1), (1, 2)])
    assert capi.kb_rel_add(handle, "Path",
                           json.dumps([0, 3]))[0] == capi.ERR_DEF
    sym = json.loads(ok(capi.kb_symbol(handle, "Path")))
    assert sym["defined"] is True and sym["interpreted"] is False


# -- relation, function and type access ------------------------------------------------


def test_relation_access(handle):
    ok(capi.kb_declare(handle, "N", json.dumps([0, 1, 2])))
    ok(capi.kb_declare(handle, "R(N, N)", json.dumps([[2, 1]])))
    assert ok(capi.kb_rel_contains(handle, "R", json.dumps([2, 1]))) == "true"
    assert ok(capi.kb_rel_contains(handle, "R", json.dumps([1, 2]))) == "false"
    ok(capi.kb_rel_add(handle, "R", json.dumps([0, 2])))
    ok(capi.kb_rel_discard(handle, "R", json.dumps([2, 1])))
    assert json.loads(ok(capi.kb_rel_tuples(handle, "R"))) == [[0, 2]]
    assert ok(capi.kb_count(handle, "R")) == "1"
    # unary relations accept bare scalars
    ok(capi.kb_declare(handle, "U(N)", json.dumps([])))
    ok(capi.kb_rel_add(handle, "U", json.dumps(1)))
    assert ok(capi.kb_rel_contains(handle, "U", json.dumps(1))) == "true"
    assert capi.kb_rel_tuples(handle, "N")[0] == capi.ERR_DECL


def test_function_access(handle):
    ok(capi.kb_declare(handle, "N", json.dumps([0, 1])))
    ok(capi.kb_declare(handle, "F(N) : N", json.dumps([[[0], 1], [[1], 0]])))
    ok(capi.kb_declare(handle, "c : N", json.dumps(1)))
    assert json.loads(ok(capi.kb_fun_value(handle, "F", json.dumps([0])))) == 1
    assert json.loads(ok(capi.kb_fun_value(handle, "F", json.dumps(1)))) == 0
    assert json.loads(ok(capi.kb_fun_items(handle, "F"))) == \
        [[[0], 1], [[1], 0]]
    assert json.loads(ok(capi.kb_materialize(handle, "c"))) == 1
    # out-of-domain lookups keep the Mapping contract (KeyError class)
    code, msg = capi.kb_fun_value(handle, "F", json.dumps([7]))
    assert code == capi.ERR_BAD_CALL and msg
    assert capi.kb_fun_items(handle, "N")[0] == capi.ERR_DECL


def test_type_access(handle):
    ok(capi.kb_declare(handle, "N", json.dumps([0, 1])))
    ok(capi.kb_type_add(handle, "N", json.dumps(2)))
    assert json.loads(ok(capi.kb_type_values(handle, "N"))) == [0, 1, 2]
    ok(capi.kb_type_discard(handle, "N", json.dumps(2)))
    assert ok(capi.kb_count(handle, "N")) == "2"
    # a value still used by an interpretation cannot be discarded
    ok(capi.kb_declare(handle, "P(N)", json.dumps([1])))
    code, msg = capi.kb_type_discard(handle, "N", json.dumps(1))
    assert code == capi.ERR_INTERP and msg
    assert json.loads(ok(capi.kb_type_values(handle, "N"))) == [0, 1]
    ok(capi.kb_declare(handle, "Q(N)"))
    assert capi.kb_type_values(handle, "Q")[0] == capi.ERR_DECL


def test_assign_and_clear(handle):
    ok(capi.kb_declare(handle, "N", json.dumps([0, 1])))
    ok(capi.kb_declare(handle, "P(N)"))
    assert json.loads(ok(capi.kb_absent_symbols(handle))) == ["P"]
    ok(capi.kb_assign(handle, "P", json.dumps([[0]])))
    assert json.loads(ok(capi.kb_absent_symbols(handle))) == []
    ok(capi.kb_clear(handle, "P"))
    assert json.loads(ok(capi.kb_absent_symbols(handle))) == ["P"]


def test_unicode_values_survive_the_json_boundary(handle):
    ok(capi.kb_declare(handle, "Stadt", json.dumps(["Köln", "Zürich"])))
    ok(capi.kb_declare(handle, "heim : Stadt"))
    ok(capi.kb_constraint(handle, 'heim == "Köln"'))
    assert json.loads(ok(capi.kb_materialize(handle, "heim"))) == "Köln"
