"""The oracles get their own sanity checks on hand-computed cases, so a bug
there cannot silently vouch for a bug in the engine."""

import random

from oracles import (brute_models, clause_satisfied, dpll, floyd_warshall,
                     is_tree_oracle, sudoku_valid, union_find_components)


def test_floyd_warshall_triangle():
    got = floyd_warshall([0, 1, 2], [(0, 1), (1, 2)])
    assert got == {(0, 1), (1, 2), (0, 2)}


def test_floyd_warshall_cycle_is_reflexive_on_cycle_nodes():
    got = floyd_warshall([0, 1, 2, 3], [(0, 1), (1, 0), (2, 3)])
    assert (0, 0) in got and (1, 1) in got
    assert (2, 2) not in got and (3, 3) not in got


def test_union_find_counts():
    assert union_find_components([0], []) == 1
    assert union_find_components([0, 1, 2, 3], [(0, 1)]) == 3
    assert union_find_components([0, 1, 2], [(0, 1), (1, 2)]) == 1


def test_is_tree_oracle_cases():
    assert is_tree_oracle([0], [])
    assert not is_tree_oracle([0, 1], [])
    assert is_tree_oracle([0, 1, 2], [(0, 1), (1, 2)])
    # right edge count but disconnected (multi-edge style duplicate pair)
    assert not is_tree_oracle([0, 1, 2, 3], [(0, 1), (2, 3), (0, 1)])


def test_dpll_known_formulas():
    assert dpll([[1, 2], [-1], [-2]]) is None
    assert dpll([[1], [-1, 2]]) == {1: True, 2: True}
    assert dpll([]) == {}
    assert dpll([[1, -1]]) == {}  # tautology dropped


def test_dpll_agrees_with_brute_force():
    rng = random.Random(11)
    for _ in range(150):
        n = rng.randint(1, 8)
        m = rng.randint(1, 24)
        clauses = []
        for _ in range(m):
            width = rng.randint(1, 3)
            vs = rng.sample(range(1, n + 1), min(width, n))
            clauses.append([v if rng.random() < 0.5 else -v for v in vs])
        expected = brute_models(clauses, n)
        got = dpll(clauses)
        assert (got is not None) == bool(expected)
        if got is not None:
            # complete the partial assignment arbitrarily and check
            model = [v if got.get(v, False) else -v for v in range(1, n + 1)]
            assert clause_satisfied(clauses, model)


def test_sudoku_validator():
    solved = ("534678912672195348198342567859761423426853791"
              "713924856961537284287419635345286179")
    grid = {i: int(d) for i, d in enumerate(solved)}
    assert sudoku_valid(grid)
    grid[0] = 3  # clashes with the 3 later in row 0
    assert not sudoku_valid(grid)
    assert not sudoku_valid({i: 1 for i in range(81)})
    assert not sudoku_valid({})
