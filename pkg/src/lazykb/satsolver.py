"""Conflict-driven clause-learning SAT solver.

Deterministic by construction: branching picks the lowest-index unassigned
variable and tries False first, watch lists and the trail are plain lists,
and nothing iterates over a hash-ordered container.  Two optional heuristics
(activity-based branching, Luby restarts) are off by default and do not
change satisfiability verdicts, only search order.

The solver works on clauses of signed integer literals (1-based variables).
`solve` returns one model; `Solver.enumerate` yields models one at a time,
blocking each found model on a chosen projection set so models that agree on
the projection are reported once.
"""

from __future__ import annotations

from .errors import SolverError


class Clause(list):
    __slots__ = ("learned", "deleted")

    def __init__(self, lits, learned=False):
        super().__init__(lits)
        self.learned = learned
        self.deleted = False


def _lit_index(lit: int) -> int:
    return 2 * lit if lit > 0 else -2 * lit + 1


class Solver:
    def __init__(self, clauses, num_vars: int, *,
                 vsids: bool = False, restarts: bool = False):
        self.num_vars = num_vars
        self.vsids = vsids
        self.restarts = restarts

        n = num_vars
        self.assign = [0] * (n + 1)  # 0 unknown, 1 true, -1 false
        self.level = [0] * (n + 1)
        self.reason: list[Clause | None] = [None] * (n + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.watches: list[list[Clause]] = [[] for _ in range(2 * n + 2)]
        self.clauses: list[Clause] = []
        self.learned: list[Clause] = []
        self.activity = [0.0] * (n + 1)
        self.act_inc = 1.0
        self.next_search = 1
        self.root_conflict = False
        self.conflicts = 0
        self._seen = [False] * (n + 1)

        for c in clauses:
            self._add_input_clause(c)

    # -- setup ---------------------------------------------------------------

    def _add_input_clause(self, lits) -> None:
        """Install a clause at decision level 0.  Literals already false at
        level 0 are dropped and clauses already true are skipped, so the two
        watched slots always start on unfalsified literals."""
        seen: dict[int, None] = dict.fromkeys(lits)
        for lit in seen:
            if not (1 <= abs(lit) <= self.num_vars):
                raise SolverError(f"literal {lit} out of range")
            if -lit in seen:
                return  # tautology
        c = []
        for lit in seen:
            v = self._value(lit)
            if v == 1:
                return  # satisfied at level 0, never relevant again
            if v == 0:
                c.append(lit)
        if not c:
            self.root_conflict = True
            return
        if len(c) == 1:
            if not self._enqueue(c[0], None):
                self.root_conflict = True
            return
        clause = Clause(c)
        self.clauses.append(clause)
        self.watches[_lit_index(-clause[0])].append(clause)
        self.watches[_lit_index(-clause[1])].append(clause)

    # -- assignment ------------------------------------------------------------

    def _value(self, lit: int) -> int:
        v = self.assign[abs(lit)]
        return v if lit > 0 else -v

    def _enqueue(self, lit: int, reason: Clause | None) -> bool:
        v = self._value(lit)
        if v == 1:
            return True
        if v == -1:
            return False
        var = abs(lit)
        self.assign[var] = 1 if lit > 0 else -1
        self.level[var] = len(self.trail_lim)
        self.reason[var] = reason
        self.trail.append(lit)
        return True

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        bound = self.trail_lim[lvl]
        freed_min = self.num_vars + 1
        for i in range(len(self.trail) - 1, bound - 1, -1):
            var = abs(self.trail[i])
            self.assign[var] = 0
            self.reason[var] = None
            if var < freed_min:
                freed_min = var
        del self.trail[bound:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)
        if freed_min < self.next_search:
            self.next_search = freed_min

    # -- propagation -------------------------------------------------------------

    def _propagate(self) -> Clause | None:
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            false_lit = -lit
            wl = self.watches[_lit_index(lit)]
            keep: list[Clause] = []
            i = 0
            n = len(wl)
            while i < n:
                c = wl[i]
                i += 1
                if c.deleted:
                    continue
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                if self._value(first) == 1:
                    keep.append(c)
                    continue
                moved = False
                for k in range(2, len(c)):
                    if self._value(c[k]) != -1:
                        c[1], c[k] = c[k], c[1]
                        self.watches[_lit_index(-c[1])].append(c)
                        moved = True
                        break
                if moved:
                    continue
                if self._value(first) == -1:
                    keep.append(c)
                    keep.extend(x for x in wl[i:] if not x.deleted)
                    wl[:] = keep
                    return c
                self._enqueue(first, c)
                keep.append(c)
            wl[:] = keep
        return None

    # -- learning ----------------------------------------------------------------

    def _analyze(self, conflict: Clause) -> tuple[list[int], int]:
        """First-UIP clause: resolve the conflict backwards along the trail
        until exactly one literal of the current decision level remains."""
        current = len(self.trail_lim)
        seen = self._seen
        touched: list[int] = []
        learned: list[int] = []
        counter = 0
        p = 0  # 0 before the first resolution; then the trail literal expanded
        idx = len(self.trail) - 1
        c: Clause | None = conflict
        while True:
            assert c is not None, "reached a decision without resolving the UIP"
            # reason clauses keep the propagated literal at slot 0; skip it
            for j in range(1 if p else 0, len(c)):
                q = c[j]
                var = abs(q)
                if not seen[var] and self.level[var] > 0:
                    seen[var] = True
                    touched.append(var)
                    if self.vsids:
                        self._bump(var)
                    if self.level[var] == current:
                        counter += 1
                    else:
                        learned.append(q)
            while not seen[abs(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            seen[abs(p)] = False
            counter -= 1
            if counter == 0:
                break
            c = self.reason[abs(p)]
            idx -= 1
        learned.insert(0, -p)
        for var in touched:
            seen[var] = False

        back = 0
        if len(learned) > 1:
            # put a literal from the backjump level in the second watch slot
            best = 1
            for k in range(1, len(learned)):
                if self.level[abs(learned[k])] > self.level[abs(learned[best])]:
                    best = k
            learned[1], learned[best] = learned[best], learned[1]
            back = self.level[abs(learned[1])]
        return learned, back

    def _bump(self, var: int) -> None:
        self.activity[var] += self.act_inc
        if self.activity[var] > 1e100:
            for i in range(1, self.num_vars + 1):
                self.activity[i] *= 1e-100
            self.act_inc *= 1e-100

    def _record(self, learned: list[int]) -> None:
        if len(learned) == 1:
            if not self._enqueue(learned[0], None):
                self.root_conflict = True
            return
        clause = Clause(learned, learned=True)
        self.learned.append(clause)
        self.watches[_lit_index(-clause[0])].append(clause)
        self.watches[_lit_index(-clause[1])].append(clause)
        self._enqueue(clause[0], clause)

    def _reduce_db(self) -> None:
        """Drop long learned clauses that are not currently reasons.  Lazy
        deletion: watch lists skip deleted clauses as they meet them."""
        if len(self.learned) < 30000:
            return
        reasons = {id(self.reason[abs(l)]) for l in self.trail if self.reason[abs(l)]}
        kept = []
        for c in self.learned:
            if len(c) > 6 and id(c) not in reasons:
                c.deleted = True
            else:
                kept.append(c)
        self.learned = kept

    # -- branching ----------------------------------------------------------------

    def _decide(self) -> int:
        if self.vsids:
            best = 0
            best_act = -1.0
            for v in range(1, self.num_vars + 1):
                if self.assign[v] == 0 and self.activity[v] > best_act:
                    best = v
                    best_act = self.activity[v]
            return -best if best else 0
        v = self.next_search
        while v <= self.num_vars and self.assign[v] != 0:
            v += 1
        self.next_search = v
        if v > self.num_vars:
            return 0
        return -v  # try False first

    # -- main loop -----------------------------------------------------------------

    def solve(self) -> bool:
        if self.root_conflict:
            return False
        if self._propagate() is not None:
            self.root_conflict = True
            return False
        restart_unit = 100
        luby_u, luby_v = 1, 1
        budget = restart_unit if self.restarts else -1
        while True:
            conflict = self._propagate()
            if conflict is not None:
                self.conflicts += 1
                if not self.trail_lim:
                    self.root_conflict = True
                    return False
                learned, back = self._analyze(conflict)
                self._cancel_until(back)
                self._record(learned)
                if self.root_conflict:
                    return False
                self._reduce_db()
                if self.vsids:
                    self.act_inc /= 0.95
                if budget > 0:
                    budget -= 1
                continue
            if budget == 0:
                self._cancel_until(0)
                # next Luby step
                if (luby_u & -luby_u) == luby_v:
                    luby_u += 1
                    luby_v = 1
                else:
                    luby_v *= 2
                budget = luby_v * restart_unit
                continue
            lit = self._decide()
            if lit == 0:
                return True
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, None)

    def model(self) -> list[int]:
        """0/1 per variable, indexed 1..num_vars (slot 0 unused).  Only valid
        right after solve() returned True."""
        out = [0] * (self.num_vars + 1)
        for v in range(1, self.num_vars + 1):
            if self.assign[v] == 0:
                raise SolverError(f"variable {v} unassigned in a full model")
            out[v] = 1 if self.assign[v] == 1 else 0
        return out

    def add_clause(self, lits: list[int]) -> None:
        """Add a clause at decision level 0 (used for model blocking)."""
        self._cancel_until(0)
        self._add_input_clause(lits)
        if not self.root_conflict and self._propagate() is not None:
            self.root_conflict = True

    def enumerate(self, project_vars: list[int], limit: int = 0):
        """Yield models, each distinct on `project_vars`.  limit=0 means all.

        After each model a blocking clause over the projection is added; an
        empty projection therefore yields at most one model.
        """
        found = 0
        while limit == 0 or found < limit:
            if not self.solve():
                return
            m = self.model()
            yield m
            found += 1
            block = [(-v if m[v] else v) for v in project_vars]
            if not block:
                return
            self.add_clause(block)
            if self.root_conflict:
                return


def check_model(clauses, model: list[int]) -> bool:
    """True when every clause has a literal satisfied by the model."""
    for c in clauses:
        for lit in c:
            v = model[abs(lit)]
            if (lit > 0 and v == 1) or (lit < 0 and v == 0):
                break
        else:
            return False
    return True


def solve(clauses, num_vars: int, *, vsids: bool = False,
          restarts: bool = False) -> list[int] | None:
    """One-shot interface: a model as a 0/1 list indexed by variable, or
    None when unsatisfiable.  The returned model is re-checked against every
    clause before it leaves this function."""
    s = Solver(clauses, num_vars, vsids=vsids, restarts=restarts)
    if not s.solve():
        return None
    m = s.model()
    if not check_model(clauses, m):
        raise SolverError("solver produced an assignment that violates a clause")
    return m


def enumerate_models(clauses, num_vars: int, project_vars: list[int],
                     limit: int = 0, *, vsids: bool = False,
                     restarts: bool = False) -> list[list[int]]:
    """All models distinct on the projection (limit=0) or the first `limit`
    of them, in the solver's deterministic search order.  Each model is
    re-checked against the input clauses."""
    s = Solver(clauses, num_vars, vsids=vsids, restarts=restarts)
    out = []
    for m in s.enumerate(project_vars, limit):
        if not check_model(clauses, m):
            raise SolverError("solver produced an assignment that violates a clause")
        out.append(m)
    return out
