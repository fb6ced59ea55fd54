"""KnowledgeBase: lazy expansion, cache discipline, views, definitions.

The central contract under test is laziness with correctness: reads trigger
at most one solve until a real mutation lands, completed structures preserve
every user-supplied interpretation verbatim, and defined predicates always
equal their least fixpoint no matter which route (folding or grounding)
produced them."""

import random

import pytest

from lazykb.errors import (DeclarationError, DefinitionError,
                           UnsatisfiableError)
from lazykb.kbcore import KnowledgeBase
from oracles import floyd_warshall, theory_holds


def coloring_kb(colors=("Red", "Green", "Blue")):
    kb = KnowledgeBase("map")
    kb.add_type("Area", ["Belgium", "Holland", "Germany"])
    kb.add_type("Color", list(colors))
    kb.add_predicate("Border(Area, Area)",
                     [("Belgium", "Holland"), ("Belgium", "Germany"),
                      ("Holland", "Germany")])
    kb.add_function("Coloring(Area) : Color")
    kb.constraint("all(Coloring(x) != Coloring(y) for (x, y) in Border)")
    return kb


def path_kb(nodes, edges=None):
    kb = KnowledgeBase("g")
    kb.add_type("Node", nodes)
    kb.add_predicate("Edge(Node, Node)", edges)
    kb.define("Path(Node, Node)",
              ["lambda x, y: Edge(x, y)",
               "lambda x, y: any(Edge(x, z) and Path(z, y) for z in Node)"])
    return kb


# -- solve-once caching --------------------------------------------------------------


def test_reads_share_a_single_solve():
    kb = coloring_kb()
    assert kb.solver_invocations == 0
    col = kb.function("Coloring")
    first = col[("Belgium",)]
    assert kb.solver_invocations == 1
    assert col[("Holland",)] != first
    assert col[("Germany",)] is not None
    assert kb.satisfiable
    assert kb.solver_invocations == 1


def test_mutation_invalidates_the_cache():
    kb = coloring_kb()
    col = kb.function("Coloring")
    _ = col[("Belgium",)]
    kb.relation("Border").add(("Germany", "Belgium"))
    assert kb.solver_invocations == 1  # not resolved until the next read
    _ = col[("Belgium",)]
    assert kb.solver_invocations == 2


def test_noop_mutations_keep_the_cache():
    kb = coloring_kb()
    _ = kb.function("Coloring")[("Belgium",)]
    kb.relation("Border").add(("Belgium", "Holland"))      # already present
    kb.relation("Border").discard(("Holland", "Belgium"))  # already absent
    kb.view("Area").add("Belgium")                          # already a member
    kb.view("Area").discard("France")                       # never was one
    _ = kb.function("Coloring")[("Holland",)]
    assert kb.solver_invocations == 1


def test_unsat_is_cached_too():
    kb = coloring_kb(colors=("Red", "Green"))
    assert kb.satisfiable is False
    assert bool(kb) is False
    assert kb.solver_invocations == 1
    with pytest.raises(UnsatisfiableError):
        kb.materialize("Coloring")
    assert kb.solver_invocations == 1
    # and a mutation makes it satisfiable again
    kb.view("Color").add("Blue")
    assert kb.satisfiable is True
    assert kb.solver_invocations == 2


def test_expand_returns_stats():
    kb = coloring_kb()
    res = kb.expand()
    assert res.satisfiable
    assert res.stats["atoms"] == 9
    assert res.stats["vars"] == 9
    assert res.stats["clauses"] == 21


# -- completed structures ------------------------------------------------------------


def test_user_interpretations_pass_through_unchanged():
    kb = coloring_kb()
    res = kb.expand()
    assert res.completed is not None
    assert list(res.completed.rel_ext["Border"]) == \
        [("Belgium", "Germany"), ("Belgium", "Holland"), ("Holland", "Germany")]
    fn = res.completed.fun_table["Coloring"]
    assert set(fn) == {("Belgium",), ("Holland",), ("Germany",)}
    assert len(set(fn.values())) == 3


def test_completed_model_satisfies_the_theory():
    kb = coloring_kb()
    res = kb.expand()
    assert theory_holds(kb.constraints, res.completed)
    assert kb.violations() == []


def test_violations_reports_sources_verbatim():
    kb = coloring_kb()
    src = "all(Coloring(x) != Coloring(y) for (x, y) in Border)"
    bad = kb.vocab.struct.copy_shallow()
    bad.fun_table["Coloring"] = {("Belgium",): "Red", ("Holland",): "Red",
                                 ("Germany",): "Red"}
    assert kb.violations(bad) == [src]


# -- materialize ----------------------------------------------------------------------


def test_materialize_interpreted_symbols_without_solving():
    kb = coloring_kb()
    assert kb.materialize("Border") == \
        [("Belgium", "Germany"), ("Belgium", "Holland"), ("Holland", "Germany")]
    assert kb.materialize("Area") == ["Belgium", "Holland", "Germany"]
    assert kb.solver_invocations == 0


def test_materialize_shapes():
    kb = coloring_kb()
    kb.add_constant("capital : Area", "Belgium")
    assert kb.materialize("capital") == "Belgium"
    table = kb.materialize("Coloring")
    assert isinstance(table, dict)
    assert set(table) == {("Belgium",), ("Holland",), ("Germany",)}
    assert kb.solver_invocations == 1


def test_defined_head_folds_without_sat_when_parameters_are_known():
    kb = path_kb([0, 1, 2, 3], [(0, 1), (1, 2)])
    got = kb.materialize("Path")
    assert set(got) == floyd_warshall([0, 1, 2, 3], [(0, 1), (1, 2)])
    assert kb.solver_invocations == 1
    assert kb.expand().stats["vars"] == 0  # nothing was ground


# -- definitions ----------------------------------------------------------------------


def test_define_accumulates_rules():
    kb = KnowledgeBase("g")
    kb.add_type("Node", [0, 1, 2])
    kb.add_predicate("Edge(Node, Node)", [(0, 1), (1, 2)])
    kb.define("Path(Node, Node)", "lambda x, y: Edge(x, y)")
    assert kb.materialize("Path") == [(0, 1), (1, 2)]
    kb.define("Path(Node, Node)",
              "lambda x, y: any(Edge(x, z) and Path(z, y) for z in Node)")
    assert set(kb.materialize("Path")) == \
        floyd_warshall([0, 1, 2], [(0, 1), (1, 2)])


def test_defined_heads_are_read_only():
    kb = path_kb([0, 1], [(0, 1)])
    with pytest.raises(DefinitionError):
        kb.relation("Path").add((1, 0))
    with pytest.raises(DefinitionError):
        kb.assign("Path", [(0, 0)])
    with pytest.raises(DefinitionError):
        kb.clear("Path")


def test_define_rejects_conflicting_or_interpreted_heads():
    kb = KnowledgeBase("g")
    kb.add_type("Node", [0, 1])
    kb.add_predicate("Edge(Node, Node)", [(0, 1)])
    with pytest.raises(DefinitionError):
        kb.define("Edge(Node, Node)", "lambda x, y: x == y")
    kb.define("P(Node)", "lambda x: Edge(x, x)")
    with pytest.raises(DefinitionError):
        kb.define("P(Node, Node)", "lambda x, y: Edge(x, y)")
    with pytest.raises(DefinitionError):
        kb.define("Q", "lambda x: Edge(x, x)")  # bare undeclared head
    with pytest.raises(DefinitionError):
        kb.define("R(Node)", "lambda x: not R(x)")  # unstratifiable


def test_defined_head_over_absent_parameter_is_ground():
    kb = path_kb([0, 1, 2])
    kb.constraint("all(Path(0, y) for y in Node if y != 0)")
    res = kb.expand()
    assert res.satisfiable
    assert res.stats["defined_levels"]["Path"] == 9
    edge = set(res.completed.rel_ext["Edge"])
    path = set(res.completed.rel_ext["Path"])
    assert path == floyd_warshall([0, 1, 2], sorted(edge))
    assert {(0, 1), (0, 2)} <= path


def test_every_enumerated_model_pins_path_to_the_closure():
    kb = path_kb([0, 1])
    models = kb.enumerate_models()
    assert len(models) == 16  # Path is a function of the 2^4 edge sets
    for m in models:
        edge = set(m.rel_ext["Edge"])
        assert set(m.rel_ext["Path"]) == floyd_warshall([0, 1], sorted(edge))


def test_unfold_depth_knob_caps_the_layering():
    kb = KnowledgeBase("g", unfold_depth=2)
    kb.add_type("Node", [0, 1])
    kb.add_predicate("Edge(Node, Node)")
    kb.define("Path(Node, Node)",
              ["lambda x, y: Edge(x, y)",
               "lambda x, y: any(Edge(x, z) and Path(z, y) for z in Node)"])
    res = kb.expand()
    assert res.stats["defined_levels"]["Path"] == 2


# -- model enumeration ----------------------------------------------------------------


def test_enumerate_models_counts_and_caches():
    kb = coloring_kb()
    models = kb.enumerate_models()
    assert len(models) == 6
    assert kb.solver_invocations == 1
    colorings = {tuple(sorted(m.fun_table["Coloring"].items()))
                 for m in models}
    assert len(colorings) == 6
    # cache was refreshed: plain reads need no further solve
    _ = kb.function("Coloring")[("Belgium",)]
    assert kb.solver_invocations == 1


def test_enumerate_models_limit():
    kb = coloring_kb()
    two = kb.enumerate_models(limit=2)
    assert len(two) == 2
    assert kb.enumerate_models(limit=2) == two  # counts as a fresh solve
    assert kb.solver_invocations == 2


def test_enumerate_models_of_unsat_theory():
    kb = coloring_kb(colors=("Red",))
    assert kb.enumerate_models() == []
    with pytest.raises(UnsatisfiableError):
        kb.materialize("Coloring")


def test_fully_interpreted_kb_checks_without_grounding():
    kb = KnowledgeBase("t")
    kb.add_type("N", [0, 1])
    kb.add_predicate("P(N)", [0])
    kb.constraint("any(P(x) for x in N)")
    res = kb.expand()
    assert res.satisfiable and res.stats["vars"] == 0
    assert kb.enumerate_models() and kb.solver_invocations == 2
    kb.constraint("all(P(x) for x in N)")
    assert kb.satisfiable is False


# -- declarations and views ------------------------------------------------------------


def test_add_helpers_enforce_their_kind():
    kb = KnowledgeBase("k")
    kb.add_type("N", [0])
    with pytest.raises(DeclarationError):
        kb.add_predicate("c : N")
    with pytest.raises(DeclarationError):
        kb.add_function("P(N, N)")
    with pytest.raises(DeclarationError):
        kb.add_constant("F(N) : N")
    with pytest.raises(DeclarationError):
        kb.relation("N")
    with pytest.raises(DeclarationError):
        kb.function("N")


def test_absent_user_symbols_tracks_interpretations():
    kb = path_kb([0, 1])
    kb.add_function("F(Node) : Node")
    assert kb.absent_user_symbols() == ["Edge", "F"]  # Path is defined
    kb.assign("Edge", [(0, 1)])
    assert kb.absent_user_symbols() == ["F"]
    kb.clear("Edge")
    assert kb.absent_user_symbols() == ["Edge", "F"]


def test_dump_golden():
    kb = KnowledgeBase("tiny")
    kb.add_type("N", [0, 1])
    kb.add_predicate("P(N)", [0])
    kb.add_function("F(N) : N")
    kb.constraint("any(P(x) for x in N)")
    kb.define("D(N)", "lambda x: P(x)")
    assert kb.dump() == (
        "vocabulary tiny_voc {\n"
        "    type N\n"
        "    P(N)\n"
        "    F(N) : N\n"
        "    D(N)\n"
        "}\n"
        "structure tiny_struct : tiny_voc {\n"
        "    N = {0;1}\n"
        "    P = {0}\n"
        "}\n"
        "theory tiny_theory : tiny_voc {\n"
        "    any(P(x) for x in N)\n"
        "}\n"
        "define tiny_defs : tiny_voc {\n"
        "    D(N) <- lambda x: P(x)\n"
        "}\n")
    assert kb.dump() == kb.dump()


def test_last_ground_texts():
    kb = coloring_kb()
    dimacs, atoms = kb.last_ground_texts()
    assert dimacs == "p cnf 0 0\n" and atoms == ""
    kb.expand()
    dimacs, atoms = kb.last_ground_texts()
    assert dimacs.startswith("p cnf 9 21\n")
    assert atoms.splitlines()[0] == '1 Coloring("Belgium")="Red"'
    assert len(atoms.splitlines()) == 9


def test_random_small_theories_round_trip_through_views():
    rng = random.Random(404)
    for _ in range(20):
        n = rng.randint(2, 4)
        nodes = list(range(n))
        edges = [(a, b) for a in nodes for b in nodes if rng.random() < 0.4]
        kb = path_kb(nodes, edges)
        got = set(kb.materialize("Path"))
        assert got == floyd_warshall(nodes, edges)
        # Path tracks edge mutations through the view protocol
        extra = (rng.randrange(n), rng.randrange(n))
        kb.relation("Edge").add(extra)
        assert set(kb.materialize("Path")) == \
            floyd_warshall(nodes, sorted(set(edges) | {extra}))
