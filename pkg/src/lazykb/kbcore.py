"""The knowledge base: declarations, constraints, definitions, lazy solving.

A KnowledgeBase collects a typed vocabulary, a partial structure, constraint
strings and inductive definitions.  Nothing is computed until somebody asks:
reading an uninterpreted symbol through a view, `satisfiable`, `expand` or
`materialize` triggers one expansion, whose outcome (a completed structure or
UNSAT) is cached until the KB changes.  Any mutation (new constraint, new
symbol, interpretation change) invalidates the cache; the next read solves
again.  `solver_invocations` counts actual recomputations, so callers can
assert the cache really short-circuits.

Expansion pipeline:

  1. fold every definition whose parameters are all interpreted, stratum by
     stratum, as a least fixpoint in the working structure;
  2. if nothing is left uninterpreted, evaluate the constraints directly
     (a pure model check);
  3. otherwise ground constraints, the remaining definitions and function
     consistency to CNF, run the SAT solver, and decode the model back into
     interpretations for the previously-ABSENT symbols.

User interpretations are never modified by expansion: completed structures
share the user's data and add entries only for symbols the user left open.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import satsolver
from .definitions import (Definition, build_definition, joint_lfp,
                          lfp_evaluate, stratify)
from .errors import (DeclarationError, DefinitionError, InterpretationError,
                     SolverError, UnsatisfiableError,
                     UnsupportedFragmentError)
from .exprlang import (Expr, LambdaRule, evaluate, infer_lambda, infer_types,
                       parse_expression, parse_lambda, symbols_of)
from .grounder import (AtomMap, ClauseBuffer, FunCell, GroundContext,
                       PredAtom, VarAlloc, atom_map_text, build_atom_map,
                       consistency_clauses, ground_constraint,
                       ground_definition, to_dimacs)
from .vocabulary import (FunctionView, RelationView, Structure, SymbolDecl,
                         TypeView, Value, Vocabulary, dump_blocks,
                         parse_typed_name, tuple_key)

DIRTY, MODEL, UNSAT = "DIRTY", "MODEL", "UNSAT"


@dataclass
class ExpansionResult:
    satisfiable: bool
    completed: Structure | None
    stats: dict = field(default_factory=dict)


@dataclass
class _Ground:
    working: Structure
    known: frozenset[str]
    targets: list[str]
    amap: AtomMap
    clauses: list[list[int]]
    num_vars: int
    defined_levels: dict[str, int]


class KnowledgeBase:
    def __init__(self, name: str = "kb", *, debug: bool = False,
                 unfold_depth: int | None = None, fixpoint_mode: str = "seminaive",
                 vsids: bool = False, restarts: bool = False):
        self.name = name
        self.debug = debug
        self.unfold_depth = unfold_depth
        self.fixpoint_mode = fixpoint_mode
        self.vsids = vsids
        self.restarts = restarts

        self.vocab = Vocabulary()
        self.constraints: list[tuple[str, Expr]] = []
        self.definitions: dict[str, Definition] = {}
        self.solver_invocations = 0

        self._state = DIRTY
        self._model: Structure | None = None
        self._last_ground: _Ground | None = None

    # -- declaration API -----------------------------------------------------

    def declare(self, typed_name: str | SymbolDecl, interpretation=None):
        decl = (parse_typed_name(typed_name)
                if isinstance(typed_name, str) else typed_name)
        self.vocab.declare(decl)
        if interpretation is not None:
            self.vocab.assign(decl.name, interpretation)
        elif decl.kind == "type":
            pass  # types are always interpreted, possibly empty
        self._mark_dirty()
        return self.view(decl.name)

    def add_type(self, name: str, values=None) -> TypeView:
        self.declare(SymbolDecl(name, "type"), values)
        return self.view(name)  # type: ignore[return-value]

    def add_predicate(self, typed_name: str, interpretation=None) -> RelationView:
        decl = parse_typed_name(typed_name)
        if decl.kind != "predicate":
            raise DeclarationError(f"{typed_name!r} does not declare a predicate")
        return self.declare(decl, interpretation)  # type: ignore[return-value]

    def add_function(self, typed_name: str, interpretation=None) -> FunctionView:
        decl = parse_typed_name(typed_name)
        if decl.kind != "function":
            raise DeclarationError(f"{typed_name!r} does not declare a function")
        return self.declare(decl, interpretation)  # type: ignore[return-value]

    def add_constant(self, typed_name: str, value=None) -> FunctionView:
        decl = parse_typed_name(typed_name)
        if decl.kind != "constant":
            raise DeclarationError(f"{typed_name!r} does not declare a constant")
        return self.declare(decl, value)  # type: ignore[return-value]

    # -- theory API ------------------------------------------------------------

    def constraint(self, source: str) -> None:
        """Add one boolean constraint; it is parsed and type-checked now."""
        expr = parse_expression(source)
        typed = infer_types(expr, self.vocab)
        self.constraints.append((source, typed))
        self._mark_dirty()

    def define(self, head: str, rules) -> None:
        """Define (or extend the definition of) a predicate inductively.

        `head` is a typed name like "Path(Node,Node)"; if the predicate is
        not yet declared this declares it.  `rules` is a lambda string or a
        list of them; each lambda's parameters stand for the head arguments.
        Repeated define() calls on the same head accumulate rules.
        """
        head_decl = parse_typed_name(head)
        if head_decl.kind == "type":
            # a bare name refers to an already declared head
            if not self.vocab.has(head_decl.name):
                raise DefinitionError(
                    f"define needs a typed head like 'P(T)', got {head!r}")
            head_decl = self.vocab.decl(head_decl.name)
        if head_decl.kind != "predicate":
            raise DefinitionError(f"only predicates can be defined: {head!r}")
        if self.vocab.has(head_decl.name):
            existing = self.vocab.decl(head_decl.name)
            if existing != head_decl:
                raise DefinitionError(
                    f"definition head {head!r} conflicts with the declaration "
                    f"{existing.typed_name()!r}")
            if self.vocab.struct.rel_ext.get(head_decl.name) is not None:
                raise DefinitionError(
                    f"{head_decl.name} already has a user interpretation; "
                    "a defined predicate cannot also be given one")
        else:
            self.vocab.declare(head_decl)

        if isinstance(rules, (str, LambdaRule)):
            rules = [rules]
        typed_rules: list[LambdaRule] = []
        if head_decl.name in self.definitions:
            typed_rules.extend(self.definitions[head_decl.name].rules)
        for r in rules:
            rule = parse_lambda(r) if isinstance(r, str) else r
            typed_rules.append(infer_lambda(rule, self.vocab, head_decl.arg_sorts))
        self.definitions[head_decl.name] = build_definition(
            self.vocab, head_decl, tuple(typed_rules))
        # the new definition must still stratify
        stratify(self.definitions)
        self._mark_dirty()

    def assign(self, name: str, interpretation) -> None:
        """Install or replace a whole interpretation."""
        if name in self.definitions:
            raise DefinitionError(f"{name} is defined; its extension is computed")
        self.vocab.assign(name, interpretation)
        self._mark_dirty()

    def clear(self, name: str) -> None:
        """Forget a symbol's interpretation (back to ABSENT)."""
        if name in self.definitions:
            raise DefinitionError(f"{name} is defined; there is nothing to clear")
        self.vocab.clear(name)
        self._mark_dirty()

    # -- views -------------------------------------------------------------------

    def view(self, name: str):
        decl = self.vocab.decl(name)
        if decl.kind == "type":
            return TypeView(self, name)
        if decl.kind == "predicate":
            return RelationView(self, name)
        return FunctionView(self, name)

    def relation(self, name: str) -> RelationView:
        v = self.view(name)
        if not isinstance(v, RelationView):
            raise DeclarationError(f"{name} is not a predicate")
        return v

    def function(self, name: str) -> FunctionView:
        v = self.view(name)
        if not isinstance(v, FunctionView):
            raise DeclarationError(f"{name} is not a function or constant")
        return v

    # owner protocol for the views

    def _view_read(self, name: str):
        decl = self.vocab.decl(name)
        if decl.kind == "type":
            return self.vocab.struct.type_ext[name]
        if name not in self.definitions and self.vocab.struct.is_interpreted(decl):
            if decl.kind == "predicate":
                return self.vocab.struct.rel_ext[name]
            return self.vocab.struct.fun_table[name]
        model = self._ensure_model()
        if decl.kind == "predicate":
            return model.rel_ext[name]
        return model.fun_table[name]

    def _view_add(self, name: str, tup: tuple) -> None:
        decl = self._mutable_decl(name, "predicate")
        norm = self.vocab.check_tuple(decl, tup)
        ext = self.vocab.struct.rel_ext[name]
        if ext is None:
            self.vocab.struct.rel_ext[name] = {norm: None}
            self._mark_dirty()
        elif norm not in ext:
            ext[norm] = None
            self._mark_dirty()

    def _view_discard(self, name: str, tup: tuple) -> None:
        decl = self._mutable_decl(name, "predicate")
        ext = self.vocab.struct.rel_ext[name]
        if ext is None:
            self.vocab.struct.rel_ext[name] = {}
            self._mark_dirty()
            return
        norm = self.vocab.check_tuple(decl, tup)
        if norm in ext:
            del ext[norm]
            self._mark_dirty()

    def _view_assign(self, name: str, raw) -> None:
        self.assign(name, raw)

    def _view_type_add(self, name: str, v: Value) -> None:
        if v not in self.vocab.struct.type_ext[name]:
            self.vocab.type_add(name, v)
            self._mark_dirty()

    def _view_type_discard(self, name: str, v: Value) -> None:
        if v in self.vocab.struct.type_ext[name]:
            self.vocab.type_discard(name, v)
            self._mark_dirty()

    def _mutable_decl(self, name: str, kind: str) -> SymbolDecl:
        if name in self.definitions:
            raise DefinitionError(f"{name} is defined; its extension is computed")
        decl = self.vocab.decl(name)
        if decl.kind != kind:
            raise DeclarationError(f"{name} is a {decl.kind}, not a {kind}")
        return decl

    def _mark_dirty(self) -> None:
        self._state = DIRTY
        self._model = None

    # -- solving --------------------------------------------------------------------

    @property
    def satisfiable(self) -> bool:
        return self.expand().satisfiable

    def __bool__(self) -> bool:
        return self.satisfiable

    def expand(self) -> ExpansionResult:
        """Complete the structure, reusing the cached outcome when clean."""
        if self._state == MODEL:
            return ExpansionResult(True, self._model, self._stats())
        if self._state == UNSAT:
            return ExpansionResult(False, None, self._stats())

        self.solver_invocations += 1
        if self.debug:
            print(self.dump(), end="")

        working, known, to_ground = self._fold_definitions()
        targets = self._targets(working, to_ground)

        if not targets:
            ok = True
            for _src, typed in self.constraints:
                if not evaluate(typed, working):
                    ok = False
                    break
            self._last_ground = _Ground(working, known, [], AtomMap(), [], 0, {})
            if ok:
                self._state = MODEL
                self._model = working
                return ExpansionResult(True, working, self._stats())
            self._state = UNSAT
            return ExpansionResult(False, None, self._stats())

        ground = self._ground(working, known, targets, to_ground)
        self._last_ground = ground
        model = satsolver.solve(ground.clauses, ground.num_vars,
                                vsids=self.vsids, restarts=self.restarts)
        if model is None:
            self._state = UNSAT
            return ExpansionResult(False, None, self._stats())
        completed = self._decode(ground, model)
        self._state = MODEL
        self._model = completed
        return ExpansionResult(True, completed, self._stats())

    def enumerate_models(self, limit: int = 0) -> list[Structure]:
        """Completed structures pairwise distinct on the previously-ABSENT
        symbols, all models for limit=0.  Counts as one solver invocation and
        refreshes the cache with the first model found."""
        self.solver_invocations += 1
        if self.debug:
            print(self.dump(), end="")

        working, known, to_ground = self._fold_definitions()
        targets = self._targets(working, to_ground)

        if not targets:
            ok = all(evaluate(t, working) for _s, t in self.constraints)
            self._last_ground = _Ground(working, known, [], AtomMap(), [], 0, {})
            self._state = MODEL if ok else UNSAT
            self._model = working if ok else None
            return [working] if ok else []

        ground = self._ground(working, known, targets, to_ground)
        self._last_ground = ground
        project = list(range(1, ground.amap.num_vars + 1))
        models = satsolver.enumerate_models(
            ground.clauses, ground.num_vars, project, limit,
            vsids=self.vsids, restarts=self.restarts)
        out = [self._decode(ground, m) for m in models]
        if out:
            self._state = MODEL
            self._model = out[0]
        else:
            self._state = UNSAT
            self._model = None
        return out

    def materialize(self, name: str):
        """A plain-data copy of the symbol's interpretation.

        User-interpreted symbols come back verbatim without solving; ABSENT
        and defined symbols trigger expansion (UnsatisfiableError if the
        theory has no model).  Relations give a sorted tuple list, functions
        a dict, constants the bare value, types a value list.
        """
        decl = self.vocab.decl(name)
        if decl.kind == "type":
            return list(self.vocab.struct.type_ext[name])
        if name not in self.definitions and self.vocab.struct.is_interpreted(decl):
            struct = self.vocab.struct
        else:
            struct = self._ensure_model()
        if decl.kind == "predicate":
            return struct.sorted_tuples(name)
        table = struct.fun_table[name]
        if decl.kind == "constant":
            return table[()]  # type: ignore[index]
        return dict(struct.sorted_items(name))

    def _ensure_model(self) -> Structure:
        result = self.expand()
        if not result.satisfiable:
            raise UnsatisfiableError(
                f"knowledge base {self.name!r} has no model")
        assert result.completed is not None
        return result.completed

    # -- expansion internals -------------------------------------------------------

    def _fold_definitions(self):
        """Evaluate definition strata whose parameters are interpreted;
        collect the rest for grounding."""
        working = self.vocab.struct.copy_shallow()
        to_ground: list[Definition] = []
        if self.definitions:
            unfolded: set[str] = set()
            for stratum in stratify(self.definitions):
                defs = [self.definitions[n] for n in stratum]
                outside = set()
                for d in defs:
                    outside.update(p for p in d.parameters if p not in stratum)
                ready = all(
                    working.is_interpreted(self.vocab.decl(p)) and p not in unfolded
                    for p in outside)
                if ready:
                    if len(defs) == 1:
                        ext = lfp_evaluate(defs[0], working, mode=self.fixpoint_mode)
                        working.rel_ext[defs[0].head.name] = ext
                    else:
                        for head, ext in joint_lfp(
                                defs, working, mode=self.fixpoint_mode).items():
                            working.rel_ext[head] = ext
                else:
                    if len(defs) > 1:
                        raise UnsupportedFragmentError(
                            "mutually recursive definitions "
                            f"({', '.join(stratum)}) over uninterpreted "
                            "parameters cannot be grounded")
                    to_ground.append(defs[0])
                    unfolded.add(defs[0].head.name)
        known = frozenset(
            name for name, decl in self.vocab.decls.items()
            if decl.kind == "type" or working.is_interpreted(decl))
        return working, known, to_ground

    def _targets(self, working: Structure, to_ground: list[Definition]) -> list[str]:
        unfolded = {d.head.name for d in to_ground}
        out = []
        for name, decl in self.vocab.decls.items():
            if decl.kind == "type":
                continue
            if name in unfolded:
                out.append(name)
            elif name not in self.definitions and not working.is_interpreted(decl):
                out.append(name)
        return out

    def _ground(self, working: Structure, known: frozenset[str],
                targets: list[str], to_ground: list[Definition]) -> _Ground:
        amap = build_atom_map(self.vocab, working, targets)
        alloc = VarAlloc(amap.num_vars)
        ctx = GroundContext(self.vocab, working, known, amap, alloc)
        buf = ClauseBuffer()
        for _src, typed in self.constraints:
            buf.extend(ground_constraint(ctx, typed))
        levels: dict[str, int] = {}
        for d in to_ground:
            clauses, k = ground_definition(ctx, d, self.unfold_depth)
            buf.extend(clauses)
            levels[d.head.name] = k
        for name in targets:
            if self.vocab.decl(name).kind in ("function", "constant"):
                buf.extend(consistency_clauses(ctx, name))
        return _Ground(working, known, targets, amap, buf.clauses,
                       alloc.num_vars, levels)

    def _decode(self, ground: _Ground, model: list[int]) -> Structure:
        """Turn a solver assignment into a completed structure.  Only target
        symbols gain entries; the user's interpretations pass through."""
        completed = ground.working.copy_shallow()
        rel_acc: dict[str, list[tuple]] = {}
        fun_acc: dict[str, dict[tuple, Value]] = {}
        for name in ground.targets:
            if self.vocab.decl(name).kind == "predicate":
                rel_acc[name] = []
            else:
                fun_acc[name] = {}
        for i, atom in enumerate(ground.amap.atoms):
            if not model[i + 1]:
                continue
            if isinstance(atom, PredAtom):
                rel_acc[atom.name].append(atom.args)
            else:
                cell: FunCell = atom
                if cell.args in fun_acc[cell.name]:
                    raise SolverError(
                        f"model maps {cell.name}{cell.args} to two values")
                fun_acc[cell.name][cell.args] = cell.value
        for name, tuples in rel_acc.items():
            completed.rel_ext[name] = {t: None
                                       for t in sorted(tuples, key=tuple_key)}
        for name, table in fun_acc.items():
            decl = self.vocab.decl(name)
            expected = 1
            for s in decl.arg_sorts:
                expected *= len(ground.working.type_ext[s])
            if len(table) != expected:
                raise SolverError(
                    f"model leaves {name} partial ({len(table)}/{expected} cells)")
            completed.fun_table[name] = {k: table[k]
                                         for k in sorted(table, key=tuple_key)}
        return completed

    # -- inspection -------------------------------------------------------------------

    def absent_user_symbols(self) -> list[str]:
        """Undefined symbols that currently have no interpretation, in
        declaration order.  These are what a solve will fill in (defined
        heads are also computed, but are not listed here)."""
        out = []
        for name, decl in self.vocab.decls.items():
            if decl.kind == "type" or name in self.definitions:
                continue
            if not self.vocab.struct.is_interpreted(decl):
                out.append(name)
        return out

    def violations(self, struct: Structure | None = None) -> list[str]:
        """Constraint sources not satisfied by the given structure (defaults
        to the cached model).  Uses the reference evaluator, independently of
        the grounding route."""
        if struct is None:
            struct = self._ensure_model()
        return [src for src, typed in self.constraints
                if not evaluate(typed, struct)]

    def dump(self) -> str:
        """Block-format text of everything the user has stated."""
        defs = []
        for d in self.definitions.values():
            defs.extend(d.source_lines())
        return dump_blocks(self.vocab, [src for src, _ in self.constraints],
                           defs, name=self.name)

    def last_ground_texts(self) -> tuple[str, str]:
        """DIMACS text and atom-map sidecar for the most recent grounding
        (empty problem if the last expansion was a pure model check)."""
        g = self._last_ground
        if g is None:
            return to_dimacs([], 0), ""
        return to_dimacs(g.clauses, g.num_vars), atom_map_text(g.amap)

    def _stats(self) -> dict:
        g = self._last_ground
        if g is None:
            return {"atoms": 0, "vars": 0, "clauses": 0, "defined_levels": {}}
        return {"atoms": g.amap.num_vars, "vars": g.num_vars,
                "clauses": len(g.clauses), "defined_levels": dict(g.defined_levels)}
