"""CDCL solver: verdicts against a reference DPLL, models re-checked clause by
clause, enumeration counts against exhaustive truth tables."""

import random

import pytest

from lazykb.errors import SolverError
from lazykb.satsolver import (Solver, check_model, enumerate_models, solve)
from oracles import brute_models, dpll


def random_cnf(rng, n, m, width=3):
    clauses = []
    for _ in range(m):
        vs = rng.sample(range(1, n + 1), min(width, n))
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return clauses


# -- verdicts and models ------------------------------------------------------------


def test_trivial_inputs():
    assert solve([], 0) == [0]
    assert solve([], 3) is not None  # free variables still get values
    assert solve([[]], 2) is None
    assert solve([[1], [-1]], 1) is None
    m = solve([[1], [-2]], 2)
    assert m == [0, 1, 0]


def test_duplicate_and_tautological_clauses_are_harmless():
    clauses = [[1, 1, 2], [1, -1], [2, -2, 3], [-2]]
    m = solve(clauses, 3)
    assert m is not None and m[2] == 0
    assert check_model(clauses, m)


def test_unit_chain_propagation():
    # 1 forces 2 forces 3 forces -4
    clauses = [[1], [-1, 2], [-2, 3], [-3, -4]]
    m = solve(clauses, 4)
    assert m == [0, 1, 1, 1, 0]


def test_out_of_range_literal_is_rejected():
    with pytest.raises(SolverError):
        solve([[5]], 2)
    with pytest.raises(SolverError):
        solve([[0]], 2)


def test_pigeonhole_is_unsat():
    # 3 pigeons, 2 holes: var = pigeon * 2 + hole + 1
    def v(p, h):
        return p * 2 + h + 1
    clauses = [[v(p, 0), v(p, 1)] for p in range(3)]
    for h in range(2):
        for p1 in range(3):
            for p2 in range(p1 + 1, 3):
                clauses.append([-v(p1, h), -v(p2, h)])
    assert solve(clauses, 6) is None
    assert dpll(clauses) is None


@pytest.mark.parametrize("flags", [{}, {"vsids": True},
                                   {"vsids": True, "restarts": True}])
def test_random_instances_agree_with_reference_dpll(flags):
    rng = random.Random(42)
    sat = unsat = 0
    for _ in range(350):
        n = rng.randint(3, 20)
        width = rng.randint(2, 3)
        if rng.random() < 0.5:
            m = rng.randint(1, n)  # sparse, almost always satisfiable
        elif width == 2:
            m = rng.randint(2 * n, 3 * n)  # well past the 2-SAT threshold
        else:
            m = rng.randint(5 * n, 6 * n)
        clauses = random_cnf(rng, n, m, width=width)
        expected = dpll(clauses) is not None
        got = solve(clauses, n, **flags)
        assert (got is not None) == expected
        if got is None:
            unsat += 1
        else:
            sat += 1
            assert check_model(clauses, got)
    assert sat > 80 and unsat > 80  # the mix actually exercises both answers


def test_hard_ratio_instances():
    rng = random.Random(7)
    for _ in range(60):
        n = 16
        clauses = random_cnf(rng, n, int(4.3 * n))
        expected = dpll(clauses) is not None
        got = solve(clauses, n)
        assert (got is not None) == expected
        if got is not None:
            assert check_model(clauses, got)


def test_solver_is_deterministic():
    rng = random.Random(9)
    clauses = random_cnf(rng, 12, 30)
    assert solve(clauses, 12) == solve(clauses, 12)
    assert enumerate_models(clauses, 12, list(range(1, 13))) == \
        enumerate_models(clauses, 12, list(range(1, 13)))


# -- enumeration -------------------------------------------------------------------


def models_as_tuples(models, nvars):
    return {tuple(m[1:nvars + 1]) for m in models}


def test_enumeration_matches_truth_table():
    rng = random.Random(77)
    for _ in range(40):
        n = rng.randint(1, 10)
        clauses = random_cnf(rng, n, rng.randint(1, 2 * n), width=2)
        expected = {tuple(1 if b else 0 for b in m)
                    for m in brute_models(clauses, n)}
        got = enumerate_models(clauses, n, list(range(1, n + 1)))
        assert models_as_tuples(got, n) == expected


def test_enumeration_respects_limit_and_order():
    clauses = [[1, 2]]
    all_models = enumerate_models(clauses, 2, [1, 2])
    assert len(all_models) == 3
    first_two = enumerate_models(clauses, 2, [1, 2], limit=2)
    assert first_two == all_models[:2]


def test_enumeration_projection_collapses_hidden_vars():
    # var 3 is unconstrained; projecting on 1..2 must not duplicate models
    clauses = [[1, 2], [3, -3]]
    got = enumerate_models(clauses, 3, [1, 2])
    assert len(got) == 3
    full = enumerate_models(clauses, 3, [1, 2, 3])
    assert len(full) == 6


def test_empty_projection_yields_at_most_one_model():
    assert len(enumerate_models([[1, 2]], 2, [])) == 1
    assert enumerate_models([[1], [-1]], 1, []) == []


def test_enumeration_of_unsat_is_empty():
    assert enumerate_models([[1], [-1]], 1, [1]) == []


# -- incremental use ----------------------------------------------------------------


def test_add_clause_blocks_previous_model():
    s = Solver([[1, 2]], 2)
    assert s.solve()
    first = s.model()
    block = [(-v if first[v] else v) for v in (1, 2)]
    s.add_clause(block)
    assert s.solve()
    second = s.model()
    assert second != first
    assert check_model([block], second)


def test_add_clause_can_exhaust_the_space():
    s = Solver([], 1)
    seen = []
    while s.solve():
        m = s.model()
        seen.append(tuple(m[1:]))
        s.add_clause([-1 if m[1] else 1])
    assert sorted(seen) == [(0,), (1,)]


def test_check_model_detects_violations():
    clauses = [[1, -2], [2, 3]]
    assert check_model(clauses, [0, 1, 0, 1])
    assert not check_model(clauses, [0, 0, 1, 0])
