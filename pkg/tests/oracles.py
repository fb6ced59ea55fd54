"""Independent reference implementations the engine is tested against.

Nothing in this module goes through the grounder or the SAT solver.  The only
engine code imported is the plain tree-walking expression evaluator and the
structure plumbing, which together form the reference semantics; everything
else is written from scratch in the most obvious way available (matrix
closure, union-find, backtracking search, exhaustive enumeration).  Expected
values in the test files come from these, never from the code under test.
"""

from __future__ import annotations

from itertools import product

from lazykb.exprlang import evaluate
from lazykb.vocabulary import Structure, Vocabulary, tuple_key


# -- graphs -------------------------------------------------------------------


def floyd_warshall(nodes: list, edges: list[tuple]) -> set[tuple]:
    """Pairs (x, y) connected by a directed path of >= 1 edges."""
    reach = {(a, b) for a, b in edges}
    for k in nodes:
        for i in nodes:
            if (i, k) not in reach:
                continue
            for j in nodes:
                if (k, j) in reach:
                    reach.add((i, j))
    return reach


def union_find_components(nodes: list, edges: list[tuple]) -> int:
    """Number of connected components of an undirected graph."""
    parent = {n: n for n in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(n) for n in nodes})


def is_tree_oracle(nodes: list, edges: list[tuple]) -> bool:
    """Textbook criterion: connected and exactly n-1 edges."""
    return (union_find_components(nodes, edges) == 1
            and len(edges) == len(nodes) - 1)


# -- propositional logic --------------------------------------------------------


def dpll(clauses: list[list[int]]) -> dict[int, bool] | None:
    """Backtracking satisfiability with unit propagation.  Returns a (possibly
    partial) assignment covering every variable that matters, or None."""

    def assign(cls, env, lit):
        env[abs(lit)] = lit > 0
        out = []
        for c in cls:
            if lit in c:
                continue
            reduced = c - {-lit}
            if not reduced:
                return None
            out.append(reduced)
        return out

    def search(cls, env):
        while True:
            unit = next((c for c in cls if len(c) == 1), None)
            if unit is None:
                break
            cls = assign(cls, env, next(iter(unit)))
            if cls is None:
                return None
        if not cls:
            return env
        v = min(abs(lit) for lit in cls[0])
        for lit in (-v, v):
            branch_env = dict(env)
            child = assign(cls, branch_env, lit)
            if child is not None:
                found = search(child, branch_env)
                if found is not None:
                    return found
        return None

    start = []
    for c in clauses:
        fs = frozenset(c)
        if any(-lit in fs for lit in fs):
            continue
        if not fs:
            return None
        start.append(fs)
    return search(start, {})


def brute_models(clauses: list[list[int]], num_vars: int) -> list[tuple[bool, ...]]:
    """Every satisfying assignment, as tuples indexed by var-1.  Exhaustive;
    keep num_vars small."""
    assert num_vars <= 20
    out = []
    for bits in range(1 << num_vars):
        tv = tuple(bool(bits >> i & 1) for i in range(num_vars))
        if all(any(tv[l - 1] if l > 0 else not tv[-l - 1] for l in c)
               for c in clauses):
            out.append(tv)
    return out


def clause_satisfied(clauses: list[list[int]], model: list[int]) -> bool:
    tv = {abs(l): l > 0 for l in model}
    return all(any(tv[abs(l)] == (l > 0) for l in c) for c in clauses)


# -- structures ------------------------------------------------------------------


def absent_symbols(vocab: Vocabulary) -> list[str]:
    out = []
    for name, decl in vocab.decls.items():
        if decl.kind != "type" and not vocab.struct.is_interpreted(decl):
            out.append(name)
    return out


def completion_count(vocab: Vocabulary) -> int:
    total = 1
    for name in absent_symbols(vocab):
        decl = vocab.decls[name]
        cells = 1
        for s in decl.arg_sorts:
            cells *= len(vocab.struct.type_ext[s])
        if decl.kind == "predicate":
            total *= 2 ** cells
        else:
            total *= len(vocab.struct.type_ext[decl.ret_sort]) ** cells
    return total


def all_completions(vocab: Vocabulary):
    """Yield every total structure extending vocab.struct on its ABSENT
    symbols.  Exhaustive; callers bound completion_count first."""
    slots = []
    for name in absent_symbols(vocab):
        decl = vocab.decls[name]
        doms = [vocab.struct.type_ext[s] for s in decl.arg_sorts]
        cells = [tuple(t) for t in product(*doms)]
        if decl.kind == "predicate":
            slots.append((decl, cells, None))
        else:
            slots.append((decl, cells, list(vocab.struct.type_ext[decl.ret_sort])))

    def rec(i: int, struct: Structure):
        if i == len(slots):
            yield struct
            return
        decl, cells, ret = slots[i]
        if ret is None:
            for bits in range(1 << len(cells)):
                nxt = struct.copy_shallow()
                nxt.rel_ext[decl.name] = {
                    c: None for j, c in enumerate(cells) if bits >> j & 1}
                yield from rec(i + 1, nxt)
        else:
            for values in product(ret, repeat=len(cells)):
                nxt = struct.copy_shallow()
                nxt.fun_table[decl.name] = dict(zip(cells, values))
                yield from rec(i + 1, nxt)

    yield from rec(0, vocab.struct)


def theory_holds(constraints, struct: Structure) -> bool:
    """constraints: iterable of (source, typed-expression) pairs."""
    return all(bool(evaluate(typed, struct)) for _src, typed in constraints)


def encode_interpretations(vocab: Vocabulary, struct: Structure,
                           names: list[str]) -> tuple:
    """Canonical hashable image of the named symbols, for set comparison."""
    parts = []
    for name in sorted(names):
        decl = vocab.decls[name]
        if decl.kind == "predicate":
            ext = struct.rel_ext[name]
            parts.append((name, tuple(sorted(ext, key=tuple_key))))
        else:
            table = struct.fun_table[name]
            parts.append((name, tuple(sorted(table.items(),
                                             key=lambda kv: tuple_key(kv[0])))))
    return tuple(parts)


# -- sudoku ---------------------------------------------------------------------


def sudoku_groups() -> list[list[int]]:
    rows = [[r * 9 + c for c in range(9)] for r in range(9)]
    cols = [[r * 9 + c for r in range(9)] for c in range(9)]
    boxes = [[(br * 3 + r) * 9 + bc * 3 + c
              for r in range(3) for c in range(3)]
             for br in range(3) for bc in range(3)]
    return rows + cols + boxes


def sudoku_valid(grid: dict[int, int]) -> bool:
    """grid maps cell index 0..80 to digit 1..9; total and group-distinct."""
    if len(grid) != 81 or any(not 1 <= v <= 9 for v in grid.values()):
        return False
    return all(len({grid[c] for c in g}) == 9 for g in sudoku_groups())
