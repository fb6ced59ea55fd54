"""Grounding: typed constraints over a partial structure down to CNF.

The grounder expands quantifiers over the finite type extensions, folds every
subterm whose symbols are interpreted, and maps what remains onto boolean
variables:

    PredAtom(P, args)        "tuple args is in P"
    FunCell(F, args, v)      "F maps args to v"

Formulas in flight are negation normal form over signed variable indexes:
Python True/False, a signed int literal, or ('and'|'or', parts).  The
constructors `gand`/`gor`/`gnot` fold constants and flatten nesting, so a
fully-interpreted constraint collapses to a constant before any clause is
emitted.

CNF conversion distributes small disjunctions (bounded by DISTRIBUTE_LIMIT
result clauses) and otherwise introduces auxiliary variables, one per branch,
implied one directionally (aux -> branch), which preserves models up to
projection onto the real atoms.  Auxiliary variables are never listed in the
atom map.

For every uninterpreted function or constant the grounder emits totality
(at-least-one value per argument tuple) and functionality (pairwise
at-most-one) clauses.

Inductive definitions over uninterpreted parameters become clauses too:
non-recursive definitions by head-atom biconditionals (each head atom iff the
disjunction of its rule bodies), recursive ones by bounded unfolding through
layers h0..hK, where layer i+1 reads layer i and the real head atoms serve as
layer K.  K defaults to the number of ground head atoms, which reaches the
least fixpoint: each round of the rule operator derives at least one new
atom until it stabilizes.  The layer chain forces exactly the fixpoint, so
defined atoms stay functionally determined by the parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Optional, Union

from .definitions import Definition
from .errors import InterpretationError, SolverError, UnsupportedFragmentError
from .exprlang import (Apply, Arith, BoolOp, Compare, Expr, Lit, Membership,
                       Not, Quant, Var)
from .vocabulary import Structure, Value, Vocabulary, format_value

# -- ground atoms ------------------------------------------------------------


@dataclass(frozen=True)
class PredAtom:
    name: str
    args: tuple

    def __str__(self) -> str:
        return f"{self.name}({','.join(format_value(v) for v in self.args)})"


@dataclass(frozen=True)
class FunCell:
    name: str
    args: tuple
    value: Value

    def __str__(self) -> str:
        inside = ",".join(format_value(v) for v in self.args)
        return f"{self.name}({inside})={format_value(self.value)}"


GroundAtom = Union[PredAtom, FunCell]


class AtomMap:
    """Orders the real (user-meaningful) atoms; variable i+1 is atoms[i].
    Auxiliary variables live above num_vars and are not mapped."""

    def __init__(self) -> None:
        self.atoms: list[GroundAtom] = []
        self.index: dict[GroundAtom, int] = {}

    def intern(self, atom: GroundAtom) -> int:
        var = self.index.get(atom)
        if var is None:
            self.atoms.append(atom)
            var = len(self.atoms)
            self.index[atom] = var
        return var

    def var(self, atom: GroundAtom) -> int:
        try:
            return self.index[atom]
        except KeyError:
            raise SolverError(f"atom {atom} missing from the atom map") from None

    @property
    def num_vars(self) -> int:
        return len(self.atoms)


def build_atom_map(vocab: Vocabulary, struct: Structure,
                   targets: Iterable[str]) -> AtomMap:
    """Atoms for every target symbol, in declaration order, each symbol's
    atoms in lexicographic order of the argument tuple by extension position
    (and result value position for function cells)."""
    amap = AtomMap()
    for name in targets:
        decl = vocab.decl(name)
        exts = [struct.type_ext[s] for s in decl.arg_sorts]
        if decl.kind == "predicate":
            for tup in product(*exts):
                amap.intern(PredAtom(name, tup))
        elif decl.kind in ("function", "constant"):
            ret = struct.type_ext[decl.ret_sort]
            for tup in product(*exts):
                for v in ret:
                    amap.intern(FunCell(name, tup, v))
        else:
            raise SolverError(f"cannot build atoms for a {decl.kind}")
    return amap


# -- formulas in negation normal form ----------------------------------------

GF = Union[bool, int, tuple]


def gand(parts: Iterable[GF]) -> GF:
    out: list[GF] = []
    for p in parts:
        if p is True:
            continue
        if p is False:
            return False
        if isinstance(p, tuple) and p[0] == "and":
            out.extend(p[1])
            continue
        out.append(p)
    if not out:
        return True
    if len(out) == 1:
        return out[0]
    return ("and", tuple(out))


def gor(parts: Iterable[GF]) -> GF:
    out: list[GF] = []
    for p in parts:
        if p is False:
            continue
        if p is True:
            return True
        if isinstance(p, tuple) and p[0] == "or":
            out.extend(p[1])
            continue
        out.append(p)
    if not out:
        return False
    if len(out) == 1:
        return out[0]
    return ("or", tuple(out))


def gnot(f: GF) -> GF:
    if f is True:
        return False
    if f is False:
        return True
    if isinstance(f, int):
        return -f
    if f[0] == "and":
        return gor([gnot(p) for p in f[1]])
    return gand([gnot(p) for p in f[1]])


def giff(a: GF, b: GF) -> GF:
    return gand([gor([gnot(a), b]), gor([gnot(b), a])])


# -- CNF ----------------------------------------------------------------------

DISTRIBUTE_LIMIT = 8


class VarAlloc:
    """Hands out auxiliary variable indexes above the real atoms."""

    def __init__(self, start: int):
        self.next_var = start + 1

    def fresh(self) -> int:
        v = self.next_var
        self.next_var += 1
        return v

    @property
    def num_vars(self) -> int:
        return self.next_var - 1


def _squeeze(clause: list[int]) -> Optional[list[int]]:
    """Drop duplicate literals; None for tautologies."""
    seen = dict.fromkeys(clause)
    for lit in seen:
        if -lit in seen:
            return None
    return list(seen)


def cnf(f: GF, alloc: VarAlloc) -> list[list[int]]:
    """Clauses equivalent to f up to the auxiliary variables introduced for
    large disjunction branches (satisfying assignments project one-to-one
    onto the original variables)."""
    if f is True:
        return []
    if f is False:
        return [[]]
    if isinstance(f, int):
        return [[f]]
    if f[0] == "and":
        out: list[list[int]] = []
        for p in f[1]:
            out.extend(cnf(p, alloc))
        return out

    # disjunction
    parts = f[1]
    unit_lits: list[int] = []
    branch_cnfs: list[list[list[int]]] = []
    for p in parts:
        sub = cnf(p, alloc)
        if len(sub) == 0:
            return []  # a True branch: whole disjunction holds
        if len(sub) == 1 and len(sub[0]) <= 1:
            if len(sub[0]) == 0:
                continue  # a False branch contributes nothing
            unit_lits.append(sub[0][0])
        else:
            branch_cnfs.append(sub)

    if not branch_cnfs:
        c = _squeeze(unit_lits)
        return [] if c is None else [c]

    count = 1
    for sub in branch_cnfs:
        count *= len(sub)
        if count > DISTRIBUTE_LIMIT:
            break

    out = []
    if count <= DISTRIBUTE_LIMIT:
        for chosen in product(*branch_cnfs):
            merged = unit_lits.copy()
            for c in chosen:
                merged.extend(c)
            sq = _squeeze(merged)
            if sq is not None:
                out.append(sq)
        return out

    top = unit_lits.copy()
    for sub in branch_cnfs:
        if len(sub) == 1:
            top.extend(sub[0])  # single clause: its literals join the disjunction
            continue
        a = alloc.fresh()
        for c in sub:
            out.append([-a] + c)
        top.append(a)
    sq = _squeeze(top)
    if sq is not None:
        out.append(sq)
    return out


class ClauseBuffer:
    """Accumulates clauses, dropping tautologies and exact duplicates
    (literal order ignored for the duplicate check, preserved in storage)."""

    def __init__(self) -> None:
        self.clauses: list[list[int]] = []
        self._seen: set[tuple[int, ...]] = set()

    def add(self, clause: list[int]) -> None:
        sq = _squeeze(clause)
        if sq is None:
            return
        key = tuple(sorted(sq))
        if key in self._seen:
            return
        self._seen.add(key)
        self.clauses.append(sq)

    def extend(self, clauses: Iterable[list[int]]) -> None:
        for c in clauses:
            self.add(c)

    def __len__(self) -> int:
        return len(self.clauses)


# -- grounding context ---------------------------------------------------------


@dataclass
class GroundContext:
    """Everything the grounding recursion needs.

    struct     working structure: user interpretations plus folded definitions
    known      symbol names readable from struct
    amap       real atom map for the uninterpreted symbols
    alloc      auxiliary variable allocator (shared with cnf)
    overrides  head name -> (tuple -> literal), used while encoding layers
    """

    vocab: Vocabulary
    struct: Structure
    known: frozenset[str]
    amap: AtomMap
    alloc: VarAlloc
    overrides: dict[str, Callable[[tuple], int]] = field(default_factory=dict)

    def pred_literal(self, name: str, tup: tuple) -> int:
        over = self.overrides.get(name)
        if over is not None:
            return over(tup)
        return self.amap.var(PredAtom(name, tup))

    def fun_literal(self, name: str, tup: tuple, v: Value) -> int:
        return self.amap.var(FunCell(name, tup, v))


# -- grounding recursion --------------------------------------------------------

Candidates = list[tuple]  # of (value, GF) pairs


def _gterm(ctx: GroundContext, e: Expr, env: dict) -> Candidates:
    """All values the term can take, each guarded by the condition under
    which it takes that value.  Interpreted terms yield one unconditional
    candidate, so constant folding falls out of the recursion."""
    if isinstance(e, Lit):
        return [(e.value, True)]
    if isinstance(e, Var):
        return [(env[e.name], True)]
    if isinstance(e, Apply):
        if e.role in ("function", "constant"):
            arg_combos = _combos(ctx, e.args, env)
            decl = ctx.vocab.decl(e.name)
            out: Candidates = []
            if e.name in ctx.known:
                table = ctx.struct.fun_table[e.name]
                if table is None:
                    raise InterpretationError(f"{e.name} is not interpreted")
                for key, cond in arg_combos:
                    if key not in table:
                        raise InterpretationError(
                            f"{e.name}{key!r} is outside the function domain")
                    out.append((table[key], cond))
                return out
            ret_ext = ctx.struct.type_ext[decl.ret_sort]
            for key, cond in arg_combos:
                for v in ret_ext:
                    out.append((v, gand([cond, ctx.fun_literal(e.name, key, v)])))
            return out
        raise InterpretationError(f"{e.name} cannot appear in a term position")
    if isinstance(e, Arith):
        out = []
        for (a, ca) in _gterm(ctx, e.left, env):
            for (b, cb) in _gterm(ctx, e.right, env):
                cond = gand([ca, cb])
                if cond is False:
                    continue
                try:
                    if e.op == "+":
                        v = a + b
                    elif e.op == "-":
                        v = a - b
                    elif e.op == "*":
                        v = a * b
                    elif e.op == "/":
                        v = a // b
                    else:
                        v = a % b
                except ZeroDivisionError:
                    raise InterpretationError(
                        "division by zero while grounding an arithmetic term")
                out.append((v, cond))
        return out
    raise InterpretationError(f"cannot ground {e!r} as a term")


def _combos(ctx: GroundContext, args: tuple[Expr, ...],
            env: dict) -> list[tuple[tuple, GF]]:
    """Cartesian candidates for an argument list: (value tuple, condition)."""
    combos: list[tuple[tuple, GF]] = [((), True)]
    for a in args:
        cands = _gterm(ctx, a, env)
        nxt = []
        for key, cond in combos:
            for v, c in cands:
                merged = gand([cond, c])
                if merged is False:
                    continue
                nxt.append((key + (v,), merged))
        combos = nxt
    return combos


def _gatom(ctx: GroundContext, name: str, role: str,
           items: tuple[Expr, ...], env: dict) -> GF:
    """Predicate/type application or membership, with term distribution."""
    combos = _combos(ctx, items, env)
    if role == "type":
        ext = ctx.struct.type_ext[name]
        return gor([cond for (key, cond) in combos if key[0] in ext])
    if name in ctx.known and name not in ctx.overrides:
        rel = ctx.struct.rel_ext[name]
        if rel is None:
            raise InterpretationError(f"predicate {name} is not interpreted")
        return gor([cond for (key, cond) in combos if key in rel])
    return gor([gand([cond, ctx.pred_literal(name, key)]) for key, cond in combos])


def _gform(ctx: GroundContext, e: Expr, env: dict) -> GF:
    if isinstance(e, Apply):
        if e.role in ("predicate", "type"):
            return _gatom(ctx, e.name, e.role, e.args, env)
        raise InterpretationError(f"{e.name} is not a formula")
    if isinstance(e, Membership):
        role = "type" if e.role == "type" else "predicate"
        return _gatom(ctx, e.rel, role, e.items, env)
    if isinstance(e, Not):
        return gnot(_gform(ctx, e.operand, env))
    if isinstance(e, BoolOp):
        parts = []
        for x in e.parts:
            p = _gform(ctx, x, env)
            # early exit on a deciding constant
            if e.op == "and" and p is False:
                return False
            if e.op == "or" and p is True:
                return True
            parts.append(p)
        return gand(parts) if e.op == "and" else gor(parts)
    if isinstance(e, Compare):
        left = _gterm(ctx, e.left, env)
        right = _gterm(ctx, e.right, env)
        if e.op == "!=":
            return gnot(_compare_or("==", left, right))
        return _compare_or(e.op, left, right)
    if isinstance(e, Quant):
        return _gquant(ctx, e, env)
    raise InterpretationError(f"cannot ground {e!r} as a formula")


def _compare_or(op: str, left: Candidates, right: Candidates) -> GF:
    parts = []
    for (a, ca) in left:
        for (b, cb) in right:
            if op == "==":
                hit = a == b
            elif op == "<":
                hit = a < b
            elif op == "<=":
                hit = a <= b
            elif op == ">":
                hit = a > b
            else:
                hit = a >= b
            if hit:
                parts.append(gand([ca, cb]))
    return gor(parts)


def _gquant(ctx: GroundContext, e: Quant, env: dict) -> GF:
    # frames: (environment, guard) per generator binding so far; the guard
    # collects unknown-domain memberships and filters.
    frames: list[tuple[dict, GF]] = [(dict(env), True)]
    for g in e.gens:
        nxt: list[tuple[dict, GF]] = []
        dom_known = g.dom_kind == "type" or (
            g.domain in ctx.known and g.domain not in ctx.overrides)
        if g.dom_kind == "type":
            rows: list[tuple] = [(v,) for v in ctx.struct.type_ext[g.domain]]
        elif dom_known:
            rows = ctx.struct.sorted_tuples(g.domain)
        else:
            decl = ctx.vocab.decl(g.domain)
            exts = [ctx.struct.type_ext[s] for s in decl.arg_sorts]
            rows = [tuple(t) for t in product(*exts)]
        for fenv, guard in frames:
            for row in rows:
                env2 = dict(fenv)
                for name, val in zip(g.pattern, row):
                    env2[name] = val
                guard2 = guard
                if not dom_known:
                    guard2 = gand([guard2, ctx.pred_literal(g.domain, row)])
                if g.filter is not None:
                    guard2 = gand([guard2, _gform(ctx, g.filter, env2)])
                if guard2 is False:
                    continue
                nxt.append((env2, guard2))
        frames = nxt

    if e.kind == "all":
        parts = []
        for fenv, guard in frames:
            body = _gform(ctx, e.body, fenv)
            p = gor([gnot(guard), body])
            if p is False:
                return False
            parts.append(p)
        return gand(parts)
    parts = []
    for fenv, guard in frames:
        body = _gform(ctx, e.body, fenv)
        p = gand([guard, body])
        if p is True:
            return True
        parts.append(p)
    return gor(parts)


# -- top-level grounding entry points -------------------------------------------


def ground_constraint(ctx: GroundContext, e: Expr) -> list[list[int]]:
    """CNF for one typed constraint.  A constraint over interpreted symbols
    folds to []: (holds) or [[]] (violated)."""
    return cnf(_gform(ctx, e, {}), ctx.alloc)


def consistency_clauses(ctx: GroundContext, name: str) -> list[list[int]]:
    """Totality and functionality for an uninterpreted function or constant:
    per argument tuple one at-least-one clause over the candidate cells, then
    pairwise at-most-one clauses."""
    decl = ctx.vocab.decl(name)
    exts = [ctx.struct.type_ext[s] for s in decl.arg_sorts]
    ret = ctx.struct.type_ext[decl.ret_sort]
    out: list[list[int]] = []
    for tup in product(*exts):
        cells = [ctx.fun_literal(name, tup, v) for v in ret]
        out.append(cells.copy())
        for i in range(len(cells)):
            for j in range(i + 1, len(cells)):
                out.append([-cells[i], -cells[j]])
    return out


def ground_definition(ctx: GroundContext, defn: Definition,
                      depth: int | None = None) -> tuple[list[list[int]], int]:
    """Clauses pinning the head atoms to the least fixpoint of the rules,
    given the (possibly uninterpreted) parameters.  Returns (clauses, K)
    where K is the unfolding depth used (0 for non-recursive definitions).
    """
    head = defn.head
    exts = [ctx.struct.type_ext[s] for s in head.arg_sorts]
    candidates = [tuple(t) for t in product(*exts)]
    out: list[list[int]] = []

    def body_or(t: tuple, rules) -> GF:
        parts = []
        for r in rules:
            env = dict(zip(r.params, t))
            parts.append(_gform(ctx, r.body, env))
        return gor(parts)

    if not any(defn.recursive):
        for t in candidates:
            head_lit = ctx.pred_literal(head.name, t)
            out.extend(cnf(giff(head_lit, body_or(t, defn.rules)), ctx.alloc))
        return out, 0

    neg = {(n, p) for (n, p) in _self_polarities(defn) if not p}
    if neg:
        raise UnsupportedFragmentError(
            f"recursive definition of {head.name} uses its own head negatively; "
            "cannot ground it over uninterpreted parameters")

    K = len(candidates) if depth is None else depth
    if K < 1:
        K = 1
    nonrec_rules = [r for r, rec in zip(defn.rules, defn.recursive) if not rec]

    # layer 0: non-recursive rules only
    layer: dict[tuple, int] = {}
    for t in candidates:
        a = ctx.alloc.fresh()
        layer[t] = a
        out.extend(cnf(giff(a, body_or(t, nonrec_rules)), ctx.alloc))

    saved = ctx.overrides.get(head.name)
    try:
        for i in range(1, K + 1):
            prev = layer
            ctx.overrides[head.name] = lambda tup, prev=prev: prev[tup]
            layer = {}
            for t in candidates:
                lit = (ctx.amap.var(PredAtom(head.name, t)) if i == K
                       else ctx.alloc.fresh())
                layer[t] = lit
                out.extend(cnf(giff(lit, body_or(t, defn.rules)), ctx.alloc))
    finally:
        if saved is None:
            ctx.overrides.pop(head.name, None)
        else:
            ctx.overrides[head.name] = saved
    return out, K


def _self_polarities(defn: Definition) -> set[tuple[str, bool]]:
    from .definitions import rule_polarities

    return rule_polarities(defn, frozenset([defn.head.name]))


# -- DIMACS -----------------------------------------------------------------


def to_dimacs(clauses: list[list[int]], num_vars: int) -> str:
    lines = [f"p cnf {num_vars} {len(clauses)}"]
    for c in clauses:
        lines.append(" ".join(str(l) for l in c) + " 0")
    return "\n".join(lines) + "\n"


def atom_map_text(amap: AtomMap) -> str:
    """Sidecar listing: `<var> <atom>` per line for every real atom."""
    return "".join(f"{i + 1} {amap.atoms[i]}\n" for i in range(len(amap.atoms)))
