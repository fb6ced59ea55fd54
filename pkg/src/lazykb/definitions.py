"""Inductive definitions and their fixpoint semantics.

A definition gives a predicate (the head) one or more rules, each a lambda
whose parameters stand for the head arguments:

    Path(Node,Node) <- lambda x, y: Edge(x,y)
    Path(Node,Node) <- lambda x, y: any(Edge(x,z) and Path(z,y) for z in Node)

The head denotes the least relation closed under its rules, given the other
symbols the rule bodies read (the definition's parameters).  Definitions may
chain (one head reading another) as long as no head depends negatively on
itself through a cycle; `stratify` checks that and orders evaluation.

Fixpoint evaluation comes in two flavors: `naive` recomputes every candidate
each round, `seminaive` keeps a pending set and, once non-recursive rules
have fired, re-examines candidates only while the previous round derived
something new.  Both produce the same least fixpoint; tests compare them.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .errors import DefinitionError
from .exprlang import (Apply, Arith, BoolOp, Compare, Expr, Generator,
                       LambdaRule, Membership, Not, Quant, compile_expr,
                       lambda_to_source, symbols_of)
from .vocabulary import Structure, SymbolDecl, Vocabulary, tuple_key


@dataclass(frozen=True)
class Definition:
    """One defined head with its (type-annotated) rules.

    parameters  non-type symbols the bodies read, minus the head itself;
                the head's value is a function of their interpretations
    recursive   rule index -> True when that rule reads the head
    """

    head: SymbolDecl
    rules: tuple[LambdaRule, ...]
    parameters: frozenset[str]
    recursive: tuple[bool, ...]

    def source_lines(self) -> list[str]:
        tn = self.head.typed_name()
        return [f"{tn} <- {lambda_to_source(r)}" for r in self.rules]


def build_definition(vocab: Vocabulary, head: SymbolDecl,
                     rules: tuple[LambdaRule, ...]) -> Definition:
    """Validate typed rules against the head and collect the parameter set."""
    if head.kind != "predicate":
        raise DefinitionError(f"only predicates can be defined, not {head.kind}")
    if not rules:
        raise DefinitionError(f"definition of {head.name} has no rules")
    params: set[str] = set()
    recursive = []
    for r in rules:
        syms = symbols_of(r.body)
        recursive.append(head.name in syms)
        for s in syms:
            if s == head.name:
                continue
            if vocab.decl(s).kind != "type":
                params.add(s)
    return Definition(head, tuple(rules), frozenset(params), tuple(recursive))


# -- polarity ----------------------------------------------------------------


def occurrences(e: Expr, names: frozenset[str], positive: bool,
                out: set[tuple[str, bool]]) -> None:
    """Record (name, polarity) for each tracked predicate occurrence.

    Generator domains and filters sit in the antecedent of an 'all', so their
    polarity flips there; in an 'any' they are plain conjuncts.
    """
    if isinstance(e, Apply):
        if e.name in names:
            out.add((e.name, positive))
        for a in e.args:
            occurrences(a, names, positive, out)
    elif isinstance(e, Membership):
        if e.rel in names:
            out.add((e.rel, positive))
        for x in e.items:
            occurrences(x, names, positive, out)
    elif isinstance(e, Not):
        occurrences(e.operand, names, not positive, out)
    elif isinstance(e, BoolOp):
        for x in e.parts:
            occurrences(x, names, positive, out)
    elif isinstance(e, (Compare, Arith)):
        occurrences(e.left, names, positive, out)
        occurrences(e.right, names, positive, out)
    elif isinstance(e, Quant):
        guard_polarity = not positive if e.kind == "all" else positive
        for g in e.gens:
            if g.domain in names:
                out.add((g.domain, guard_polarity))
            if g.filter is not None:
                occurrences(g.filter, names, guard_polarity, out)
        occurrences(e.body, names, positive, out)


def rule_polarities(defn: Definition,
                    tracked: frozenset[str]) -> set[tuple[str, bool]]:
    out: set[tuple[str, bool]] = set()
    for r in defn.rules:
        occurrences(r.body, tracked, True, out)
    return out


# -- stratification ----------------------------------------------------------


def stratify(definitions: dict[str, Definition]) -> list[list[str]]:
    """Group heads into strata: every head's dependencies are in the same or
    an earlier stratum, and no head depends negatively on a head in its own
    stratum (that would be unstratified negation).  Output order is
    deterministic: strata in dependency order, names in definition order
    within each.
    """
    names = frozenset(definitions)
    pos_edges: dict[str, set[str]] = {n: set() for n in definitions}
    neg_edges: dict[str, set[str]] = {n: set() for n in definitions}
    for name, d in definitions.items():
        for dep, positive in rule_polarities(d, names):
            (pos_edges if positive else neg_edges)[name].add(dep)

    order = list(definitions)
    index = {n: i for i, n in enumerate(order)}

    # Tarjan-style SCC on the combined graph, iterative, visiting in
    # definition order for reproducibility.
    low: dict[str, int] = {}
    num: dict[str, int] = {}
    on_stack: dict[str, bool] = {}
    stack: list[str] = []
    sccs: list[list[str]] = []
    counter = [0]

    def strongconnect(root: str) -> None:
        work = [(root, iter(sorted(pos_edges[root] | neg_edges[root], key=index.get)))]
        num[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in num:
                    num[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(sorted(pos_edges[w] | neg_edges[w], key=index.get))))
                    advanced = True
                    break
                if on_stack.get(w):
                    low[v] = min(low[v], num[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == num[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(sorted(comp, key=index.get))

    for n in order:
        if n not in num:
            strongconnect(n)

    scc_of = {}
    for i, comp in enumerate(sccs):
        for n in comp:
            scc_of[n] = i
    for name in order:
        for dep in neg_edges[name]:
            if scc_of[dep] == scc_of[name]:
                raise DefinitionError(
                    f"definition of {name} depends negatively on {dep} within a "
                    "cycle; the definition is not stratifiable")

    # Tarjan emits components in reverse topological order of the condensation,
    # i.e. dependencies first, which is exactly evaluation order.
    return [sorted(c, key=index.get) for c in sccs]


# -- fixpoint evaluation -------------------------------------------------------


def head_candidates(defn: Definition, struct: Structure) -> list[tuple]:
    exts = [struct.type_ext[s] for s in defn.head.arg_sorts]
    return [tuple(t) for t in product(*exts)]


def derivation_step(defn: Definition, struct: Structure,
                    current: dict[tuple, None]) -> dict[tuple, None]:
    """One application of the rule operator: all tuples derivable from
    `current` in a single step.  Used directly by tests to confirm the
    fixpoint is a fixpoint and is minimal."""
    overlay = struct.copy_shallow()
    overlay.rel_ext[defn.head.name] = dict(current)
    bodies = [compile_expr(r.body) for r in defn.rules]
    out: dict[tuple, None] = {}
    env: dict = {}
    for t in head_candidates(defn, struct):
        for r, body in zip(defn.rules, bodies):
            for name, val in zip(r.params, t):
                env[name] = val
            if body(overlay, env):
                out[t] = None
                break
    return out


def lfp_evaluate(defn: Definition, struct: Structure,
                 mode: str = "seminaive") -> dict[tuple, None]:
    """Least fixpoint of a definition whose parameters are all interpreted in
    `struct`.  Negation inside rule bodies must only touch parameters (the
    stratification check guarantees the head is never under one).  Returns
    the extension in canonical sorted order.
    """
    if mode == "naive":
        ext = _lfp_naive(defn, struct)
    elif mode == "seminaive":
        ext = _lfp_seminaive(defn, struct)
    else:
        raise ValueError(f"unknown fixpoint mode {mode!r}")
    return {t: None for t in sorted(ext, key=tuple_key)}


def _lfp_naive(defn: Definition, struct: Structure) -> dict[tuple, None]:
    current: dict[tuple, None] = {}
    while True:
        new = derivation_step(defn, struct, current)
        if new == current:
            return current
        current = new


def _lfp_seminaive(defn: Definition, struct: Structure) -> dict[tuple, None]:
    """Pending-set evaluation: derive with all rules once, then keep applying
    only the recursive rules to candidates not yet derived, stopping as soon
    as a round adds nothing.  Equivalent to the naive loop because rule
    bodies are monotone in the head (positive occurrences only): a candidate
    that failed can only start succeeding after the head grows, and
    non-recursive bodies never see the head at all.
    """
    head_name = defn.head.name
    overlay = struct.copy_shallow()
    current: dict[tuple, None] = {}
    overlay.rel_ext[head_name] = current

    candidates = head_candidates(defn, struct)
    rules = list(zip(defn.rules, defn.recursive,
                     [compile_expr(r.body) for r in defn.rules]))
    env: dict = {}

    pending: list[tuple] = []
    for t in candidates:
        hit = False
        for r, _rec, body in rules:
            for name, val in zip(r.params, t):
                env[name] = val
            if body(overlay, env):
                hit = True
                break
        if hit:
            current[t] = None
        else:
            pending.append(t)

    rec_rules = [(r, body) for r, rec, body in rules if rec]
    if not rec_rules:
        return current

    grew = bool(current)
    while grew and pending:
        grew = False
        still = []
        for t in pending:
            hit = False
            for r, body in rec_rules:
                for name, val in zip(r.params, t):
                    env[name] = val
                if body(overlay, env):
                    hit = True
                    break
            if hit:
                current[t] = None
                grew = True
            else:
                still.append(t)
        pending = still
    return current


def joint_lfp(defs: list[Definition], struct: Structure,
              mode: str = "seminaive") -> dict[str, dict[tuple, None]]:
    """Least fixpoint of several definitions evaluated as one operator, for
    heads that are mutually recursive (one stratum, several definitions).
    Round-robin per-definition fixpoints over the product lattice; monotone,
    so iteration converges to the joint least fixpoint."""
    overlay = struct.copy_shallow()
    for d in defs:
        overlay.rel_ext[d.head.name] = {}
    while True:
        changed = False
        for d in defs:
            new = lfp_evaluate(d, overlay, mode=mode)
            if new != overlay.rel_ext[d.head.name]:
                overlay.rel_ext[d.head.name] = new
                changed = True
        if not changed:
            return {d.head.name: overlay.rel_ext[d.head.name] for d in defs}
