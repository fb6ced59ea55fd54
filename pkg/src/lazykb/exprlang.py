"""Constraint expression language.

Constraints are comprehension-shaped strings over the vocabulary:

    all(Coloring(a) != Coloring(b) for (a,b) in Border)
    any(Edge(x,y) and not Root(y) for x in Node for y in Node if x != y)
    lambda x, y: Edge(x,y) or any(Edge(x,z) and Path(z,y) for z in Node)

Grammar (binding loosest to tightest):

    expr    := or                        or  := and ('or' and)*
    and     := not ('and' not)*          not := 'not' not | cmp
    cmp     := sum (CMPOP sum)? | items 'in' NAME
    sum     := prod (('+'|'-') prod)*    prod := unary (('*'|'/'|'%') unary)*
    unary   := '-' unary | atom
    atom    := INT | STRING | NAME | NAME '(' expr,... ')' | '(' expr ')'
             | '(' expr, expr,... ')'                      (tuple, before 'in')
             | ('all'|'any') '(' expr gens ')'
    gens    := ('for' pat 'in' NAME ['if' expr])+
    pat     := NAME | '(' NAME, NAME,... ')'

There is no implication operator; write the antecedent as a generator filter
or use `not A or B`.  `/` is integer floor division, `%` integer modulo.
Comparison chains (`a < b < c`) are rejected; one comparison per level.

A bare NAME is a bound variable, or a declared constant when no binding is in
scope.  Quantifier patterns may not shadow an outer binding or a declared
symbol.  `for (a,b) in R` iterates tuples of R when R is interpreted; when R
is to be computed, the grounder treats membership of the pattern tuple as
part of the quantified formula.

Two evaluation routes exist on purpose: `evaluate` is the plain recursive
reference interpreter, and `compile_expr` builds nested closures for the
fixpoint hot path.  They are differentially tested against each other and
must never be merged.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Optional

from .errors import InterpretationError, ParseError, TypeCheckError
from .vocabulary import Structure, Value, Vocabulary, format_value

KEYWORDS = frozenset(["and", "or", "not", "all", "any", "for", "in", "if", "lambda"])

INT_SORT = "<int>"
STR_SORT = "<str>"
BOOL_SORT = "<bool>"


# -- tokens ----------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # INT STRING NAME KW OP EOF
    text: str
    line: int
    col: int
    value: object = None


_TWO_CHAR_OPS = ("==", "!=", "<=", ">=")
_ONE_CHAR_OPS = set("()<>+-*/%,:")


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        start_col = col
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("INT", text[i:j], line, start_col, int(text[i:j])))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "KW" if word in KEYWORDS else "NAME"
            toks.append(Token(kind, word, line, start_col))
            col += j - i
            i = j
            continue
        if c in "\"'":
            quote = c
            j = i + 1
            buf = []
            while j < n and text[j] != quote:
                if text[j] == "\\" and j + 1 < n:
                    esc = text[j + 1]
                    buf.append({"n": "\n", "t": "\t"}.get(esc, esc))
                    j += 2
                else:
                    if text[j] == "\n":
                        raise ParseError("unterminated string literal", line, start_col)
                    buf.append(text[j])
                    j += 1
            if j >= n:
                raise ParseError("unterminated string literal", line, start_col)
            toks.append(Token("STRING", text[i:j + 1], line, start_col, "".join(buf)))
            col += j + 1 - i
            i = j + 1
            continue
        if text[i:i + 2] in _TWO_CHAR_OPS:
            toks.append(Token("OP", text[i:i + 2], line, start_col))
            i += 2
            col += 2
            continue
        if c in _ONE_CHAR_OPS:
            toks.append(Token("OP", c, line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {c!r}", line, start_col)
    toks.append(Token("EOF", "", line, col))
    return toks


# -- syntax tree -----------------------------------------------------------
#
# `sort` and `role` annotations are attached by infer_types on copies of the
# parsed nodes; they are excluded from equality so a typed tree still compares
# equal to its untyped reparse.


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Lit(Expr):
    value: Value
    sort: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class Var(Expr):
    name: str
    sort: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class Apply(Expr):
    """Symbol application: function/constant term, or predicate/type atom."""

    name: str
    args: tuple[Expr, ...] = ()
    sort: Optional[str] = field(default=None, compare=False)
    role: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class TupleExpr(Expr):
    """Only legal immediately before 'in'; the parser folds it away."""

    items: tuple[Expr, ...]
    sort: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class Arith(Expr):
    op: str  # + - * / %
    left: Expr = None  # type: ignore[assignment]
    right: Expr = None  # type: ignore[assignment]
    sort: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class Compare(Expr):
    op: str  # == != < <= > >=
    left: Expr = None  # type: ignore[assignment]
    right: Expr = None  # type: ignore[assignment]
    sort: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class Membership(Expr):
    items: tuple[Expr, ...] = ()
    rel: str = ""
    sort: Optional[str] = field(default=None, compare=False)
    role: Optional[str] = field(default=None, compare=False)  # relation | type


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr = None  # type: ignore[assignment]
    sort: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class BoolOp(Expr):
    op: str  # and | or
    parts: tuple[Expr, ...] = ()
    sort: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class Generator:
    pattern: tuple[str, ...]
    domain: str
    filter: Optional[Expr] = None
    dom_kind: Optional[str] = field(default=None, compare=False)  # type | relation
    binds: tuple[tuple[str, str], ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class Quant(Expr):
    kind: str  # all | any
    body: Expr = None  # type: ignore[assignment]
    gens: tuple[Generator, ...] = ()
    sort: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class LambdaRule:
    """`lambda x, y: body` as used by inductive definitions."""

    params: tuple[str, ...]
    body: Expr


# -- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.pos = 0

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def error(self, msg: str) -> ParseError:
        t = self.peek()
        return ParseError(f"{msg}, found {t.text or 'end of input'!r}", t.line, t.col)

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        t = self.peek()
        if t.kind == kind and (text is None or t.text == text):
            return self.next()
        return None

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.accept(kind, text)
        if t is None:
            raise self.error(f"expected {text or kind}")
        return t

    # precedence ladder

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        parts = [self.parse_and()]
        while self.accept("KW", "or"):
            parts.append(self.parse_and())
        if len(parts) == 1:
            return parts[0]
        return BoolOp("or", tuple(parts))

    def parse_and(self) -> Expr:
        parts = [self.parse_not()]
        while self.accept("KW", "and"):
            parts.append(self.parse_not())
        if len(parts) == 1:
            return parts[0]
        return BoolOp("and", tuple(parts))

    def parse_not(self) -> Expr:
        if self.accept("KW", "not"):
            return Not(self.parse_not())
        return self.parse_cmp()

    def parse_cmp(self) -> Expr:
        left = self.parse_sum()
        t = self.peek()
        if t.kind == "OP" and t.text in ("==", "!=", "<", "<=", ">", ">="):
            self.next()
            right = self.parse_sum()
            u = self.peek()
            if u.kind == "OP" and u.text in ("==", "!=", "<", "<=", ">", ">="):
                raise self.error("comparison chains are not supported; use 'and'")
            return Compare(t.text, self._term(left), self._term(right))
        if t.kind == "KW" and t.text == "in":
            self.next()
            rel = self.expect("NAME")
            items = left.items if isinstance(left, TupleExpr) else (left,)
            return Membership(items, rel.text)
        if isinstance(left, TupleExpr):
            raise self.error("tuple is only allowed before 'in'")
        return left

    def _term(self, e: Expr) -> Expr:
        if isinstance(e, TupleExpr):
            raise self.error("tuple is only allowed before 'in'")
        return e

    def parse_sum(self) -> Expr:
        e = self.parse_prod()
        while True:
            t = self.peek()
            if t.kind == "OP" and t.text in ("+", "-"):
                self.next()
                e = Arith(t.text, self._term(e), self._term(self.parse_prod()))
            else:
                return e

    def parse_prod(self) -> Expr:
        e = self.parse_unary()
        while True:
            t = self.peek()
            if t.kind == "OP" and t.text in ("*", "/", "%"):
                self.next()
                e = Arith(t.text, self._term(e), self._term(self.parse_unary()))
            else:
                return e

    def parse_unary(self) -> Expr:
        if self.accept("OP", "-"):
            inner = self.parse_unary()
            if isinstance(inner, Lit) and isinstance(inner.value, int):
                return Lit(-inner.value)
            return Arith("-", Lit(0), self._term(inner))
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        t = self.peek()
        if t.kind == "INT":
            self.next()
            return Lit(t.value)  # type: ignore[arg-type]
        if t.kind == "STRING":
            self.next()
            return Lit(t.value)  # type: ignore[arg-type]
        if t.kind == "KW" and t.text in ("all", "any"):
            return self.parse_quant()
        if t.kind == "NAME":
            self.next()
            if self.accept("OP", "("):
                args = [self.parse_expr()]
                while self.accept("OP", ","):
                    args.append(self.parse_expr())
                self.expect("OP", ")")
                return Apply(t.text, tuple(args))
            return Var(t.text)
        if t.kind == "OP" and t.text == "(":
            self.next()
            first = self.parse_expr()
            if self.accept("OP", ","):
                items = [first, self.parse_expr()]
                while self.accept("OP", ","):
                    items.append(self.parse_expr())
                self.expect("OP", ")")
                return TupleExpr(tuple(items))
            self.expect("OP", ")")
            return first
        raise self.error("expected an expression")

    def parse_quant(self) -> Expr:
        kw = self.next()  # all | any
        self.expect("OP", "(")
        body = self.parse_expr()
        gens = []
        while self.accept("KW", "for"):
            pattern = self.parse_pattern()
            self.expect("KW", "in")
            dom = self.expect("NAME")
            filt = None
            if self.accept("KW", "if"):
                filt = self.parse_expr()
            gens.append(Generator(pattern, dom.text, filt))
        if not gens:
            raise self.error("quantifier needs at least one 'for' clause")
        self.expect("OP", ")")
        return Quant(kw.text, body, tuple(gens))

    def parse_pattern(self) -> tuple[str, ...]:
        if self.accept("OP", "("):
            names = [self.expect("NAME").text]
            while self.accept("OP", ","):
                names.append(self.expect("NAME").text)
            self.expect("OP", ")")
            return tuple(names)
        return (self.expect("NAME").text,)


def parse_expression(text: str) -> Expr:
    p = _Parser(tokenize(text))
    e = p.parse_expr()
    if p.peek().kind != "EOF":
        raise p.error("trailing input after expression")
    if isinstance(e, TupleExpr):
        raise ParseError("tuple is only allowed before 'in'")
    return e


def parse_lambda(text: str) -> LambdaRule:
    p = _Parser(tokenize(text))
    p.expect("KW", "lambda")
    params = [p.expect("NAME").text]
    while p.accept("OP", ","):
        params.append(p.expect("NAME").text)
    if len(set(params)) != len(params):
        raise ParseError(f"duplicate parameter in {text!r}")
    p.expect("OP", ":")
    body = p.parse_expr()
    if p.peek().kind != "EOF":
        raise p.error("trailing input after lambda body")
    return LambdaRule(tuple(params), body)


# -- printer ---------------------------------------------------------------

_PREC = {"or": 1, "and": 2, "not": 3, "cmp": 4, "sum": 5, "prod": 6, "atom": 7}


def _prec_of(e: Expr) -> int:
    if isinstance(e, BoolOp):
        return _PREC[e.op]
    if isinstance(e, Not):
        return _PREC["not"]
    if isinstance(e, (Compare, Membership)):
        return _PREC["cmp"]
    if isinstance(e, Arith):
        return _PREC["sum"] if e.op in "+-" else _PREC["prod"]
    return _PREC["atom"]


def to_source(e: Expr) -> str:
    """Render back to parseable text.  On parser output this round-trips to a
    structurally equal tree (the parser flattens nested and/or, so hand-built
    trees nesting the same connective print with explicit parentheses)."""
    return _ts(e, 0)


def _ts(e: Expr, ctx: int) -> str:
    p = _prec_of(e)
    if isinstance(e, Lit):
        s = format_value(e.value)
    elif isinstance(e, Var):
        s = e.name
    elif isinstance(e, Apply):
        s = e.name if not e.args else f"{e.name}({', '.join(_ts(a, 0) for a in e.args)})"
    elif isinstance(e, BoolOp):
        s = f" {e.op} ".join(_ts(x, p + 1) for x in e.parts)
    elif isinstance(e, Not):
        s = "not " + _ts(e.operand, p)
    elif isinstance(e, Compare):
        s = f"{_ts(e.left, _PREC['sum'])} {e.op} {_ts(e.right, _PREC['sum'])}"
    elif isinstance(e, Membership):
        lhs = (_ts(e.items[0], _PREC["sum"]) if len(e.items) == 1
               else "(" + ", ".join(_ts(x, 0) for x in e.items) + ")")
        s = f"{lhs} in {e.rel}"
    elif isinstance(e, Arith):
        left = _ts(e.left, p)
        right = _ts(e.right, p + 1)
        s = f"{left} {e.op} {right}"
    elif isinstance(e, Quant):
        parts = [_ts(e.body, 0)]
        for g in e.gens:
            pat = g.pattern[0] if len(g.pattern) == 1 else "(" + ", ".join(g.pattern) + ")"
            parts.append(f"for {pat} in {g.domain}")
            if g.filter is not None:
                parts.append(f"if {_ts(g.filter, 0)}")
        s = f"{e.kind}({' '.join(parts)})"
        return s  # self-delimiting
    elif isinstance(e, TupleExpr):
        s = "(" + ", ".join(_ts(x, 0) for x in e.items) + ")"
    else:
        raise TypeError(f"unknown node {e!r}")
    if p < ctx and not isinstance(e, (Lit, Var, Apply, Quant)):
        return "(" + s + ")"
    return s


def lambda_to_source(rule: LambdaRule) -> str:
    return f"lambda {', '.join(rule.params)}: {to_source(rule.body)}"


# -- type checking ---------------------------------------------------------


def _int_like(vocab: Vocabulary, sort: str) -> bool:
    if sort == INT_SORT:
        return True
    if sort in (STR_SORT, BOOL_SORT):
        return False
    ext = vocab.struct.type_ext.get(sort)
    return ext is not None and all(isinstance(v, int) for v in ext)


def _arg_compatible(vocab: Vocabulary, actual: str, wanted: str) -> bool:
    """A term of sort `actual` may fill an argument slot of type `wanted`.
    Literal sorts are checked at evaluation time against the live extension."""
    if actual == wanted:
        return True
    if actual == INT_SORT:
        return _int_like(vocab, wanted)
    if actual == STR_SORT:
        return True
    return False


def infer_types(e: Expr, vocab: Vocabulary,
                bindings: dict[str, str] | None = None) -> Expr:
    """Return an annotated copy of `e`, or raise TypeCheckError.

    Checks: symbols declared, arities match, variables bound, no shadowing,
    arithmetic and ordering only over int-valued sorts, quantifier bodies and
    filters boolean.  Equality is allowed between any two term sorts; value
    equality is always well-defined.
    """
    return _infer(e, vocab, dict(bindings or {}))


def _infer(e: Expr, vocab: Vocabulary, env: dict[str, str]) -> Expr:
    if isinstance(e, Lit):
        return replace(e, sort=INT_SORT if isinstance(e.value, int) else STR_SORT)

    if isinstance(e, Var):
        if e.name in env:
            return replace(e, sort=env[e.name])
        if vocab.has(e.name) and vocab.decl(e.name).kind == "constant":
            d = vocab.decl(e.name)
            return Apply(e.name, (), sort=d.ret_sort, role="constant")
        raise TypeCheckError(f"unbound variable {e.name!r}")

    if isinstance(e, Apply):
        d = vocab.decl(e.name) if vocab.has(e.name) else None
        if d is None:
            raise TypeCheckError(f"unknown symbol {e.name!r}")
        args = tuple(_infer(a, vocab, env) for a in e.args)
        if d.kind == "type":
            if len(args) != 1:
                raise TypeCheckError(f"type {e.name} used with {len(args)} arguments")
            return replace(e, args=args, sort=BOOL_SORT, role="type")
        if d.kind == "constant":
            if args:
                raise TypeCheckError(f"constant {e.name} takes no arguments")
            return replace(e, args=(), sort=d.ret_sort, role="constant")
        if len(args) != d.arity:
            raise TypeCheckError(
                f"{e.name} expects {d.arity} arguments, got {len(args)}")
        for a, wanted in zip(args, d.arg_sorts):
            if not _arg_compatible(vocab, a.sort, wanted):  # type: ignore[union-attr]
                raise TypeCheckError(
                    f"{e.name}: argument of sort {a.sort} where {wanted} is expected")
        if d.kind == "predicate":
            return replace(e, args=args, sort=BOOL_SORT, role="predicate")
        return replace(e, args=args, sort=d.ret_sort, role="function")

    if isinstance(e, Arith):
        left = _infer(e.left, vocab, env)
        right = _infer(e.right, vocab, env)
        for side in (left, right):
            if not _int_like(vocab, side.sort):  # type: ignore[union-attr]
                raise TypeCheckError(
                    f"arithmetic needs integer operands, got sort {side.sort}")
        return replace(e, left=left, right=right, sort=INT_SORT)

    if isinstance(e, Compare):
        left = _infer(e.left, vocab, env)
        right = _infer(e.right, vocab, env)
        if e.op not in ("==", "!="):
            for side in (left, right):
                if not _int_like(vocab, side.sort):  # type: ignore[union-attr]
                    raise TypeCheckError(
                        f"ordering comparison needs integer operands, got {side.sort}")
        return replace(e, left=left, right=right, sort=BOOL_SORT)

    if isinstance(e, Membership):
        if not vocab.has(e.rel):
            raise TypeCheckError(f"unknown symbol {e.rel!r} after 'in'")
        d = vocab.decl(e.rel)
        items = tuple(_infer(x, vocab, env) for x in e.items)
        if d.kind == "type":
            if len(items) != 1:
                raise TypeCheckError(f"membership in type {e.rel} needs one item")
            return replace(e, items=items, sort=BOOL_SORT, role="type")
        if d.kind != "predicate":
            raise TypeCheckError(f"'in {e.rel}': {e.rel} is not a predicate or type")
        if len(items) != d.arity:
            raise TypeCheckError(
                f"'in {e.rel}': expected {d.arity} items, got {len(items)}")
        for x, wanted in zip(items, d.arg_sorts):
            if not _arg_compatible(vocab, x.sort, wanted):  # type: ignore[union-attr]
                raise TypeCheckError(
                    f"'in {e.rel}': item of sort {x.sort} where {wanted} is expected")
        return replace(e, items=items, sort=BOOL_SORT, role="relation")

    if isinstance(e, Not):
        inner = _infer(e.operand, vocab, env)
        if inner.sort != BOOL_SORT:  # type: ignore[union-attr]
            raise TypeCheckError("'not' needs a boolean operand")
        return replace(e, operand=inner, sort=BOOL_SORT)

    if isinstance(e, BoolOp):
        parts = tuple(_infer(x, vocab, env) for x in e.parts)
        for x in parts:
            if x.sort != BOOL_SORT:  # type: ignore[union-attr]
                raise TypeCheckError(f"'{e.op}' needs boolean operands")
        return replace(e, parts=parts, sort=BOOL_SORT)

    if isinstance(e, Quant):
        inner_env = dict(env)
        gens = []
        for g in e.gens:
            if not vocab.has(g.domain):
                raise TypeCheckError(f"unknown domain {g.domain!r} in 'for'")
            d = vocab.decl(g.domain)
            if d.kind == "type":
                if len(g.pattern) != 1:
                    raise TypeCheckError(
                        f"'for' over type {g.domain} binds one variable")
                sorts = (g.domain,)
                dom_kind = "type"
            elif d.kind == "predicate":
                if len(g.pattern) != d.arity:
                    raise TypeCheckError(
                        f"'for' over {g.domain} needs a {d.arity}-variable pattern")
                sorts = d.arg_sorts
                dom_kind = "relation"
            else:
                raise TypeCheckError(
                    f"'for' domain {g.domain} must be a type or predicate")
            binds = []
            for v, s in zip(g.pattern, sorts):
                if v in inner_env:
                    raise TypeCheckError(f"variable {v!r} shadows an outer binding")
                if vocab.has(v):
                    raise TypeCheckError(f"variable {v!r} shadows a declared symbol")
                inner_env[v] = s
                binds.append((v, s))
            filt = None
            if g.filter is not None:
                filt = _infer(g.filter, vocab, inner_env)
                if filt.sort != BOOL_SORT:  # type: ignore[union-attr]
                    raise TypeCheckError("generator filter must be boolean")
            gens.append(replace(g, filter=filt, dom_kind=dom_kind, binds=tuple(binds)))
        body = _infer(e.body, vocab, inner_env)
        if body.sort != BOOL_SORT:  # type: ignore[union-attr]
            raise TypeCheckError(f"'{e.kind}' body must be boolean")
        return replace(e, body=body, gens=tuple(gens), sort=BOOL_SORT)

    if isinstance(e, TupleExpr):
        raise TypeCheckError("tuple is only allowed before 'in'")

    raise TypeError(f"unknown node {e!r}")


def infer_lambda(rule: LambdaRule, vocab: Vocabulary,
                 param_sorts: tuple[str, ...]) -> LambdaRule:
    if len(rule.params) != len(param_sorts):
        raise TypeCheckError(
            f"rule has {len(rule.params)} parameters, head expects {len(param_sorts)}")
    for v in rule.params:
        if vocab.has(v):
            raise TypeCheckError(f"parameter {v!r} shadows a declared symbol")
    env = dict(zip(rule.params, param_sorts))
    body = _infer(rule.body, vocab, env)
    if body.sort != BOOL_SORT:  # type: ignore[union-attr]
        raise TypeCheckError("rule body must be boolean")
    return LambdaRule(rule.params, body)


# -- symbol collection -------------------------------------------------------


def symbols_of(e: Expr) -> set[str]:
    """Names of all declared symbols the expression reads (not variables)."""
    out: set[str] = set()
    _collect(e, out)
    return out


def _collect(e: Expr, out: set[str]) -> None:
    if isinstance(e, Apply):
        out.add(e.name)
        for a in e.args:
            _collect(a, out)
    elif isinstance(e, Membership):
        out.add(e.rel)
        for x in e.items:
            _collect(x, out)
    elif isinstance(e, Arith):
        _collect(e.left, out)
        _collect(e.right, out)
    elif isinstance(e, Compare):
        _collect(e.left, out)
        _collect(e.right, out)
    elif isinstance(e, Not):
        _collect(e.operand, out)
    elif isinstance(e, BoolOp):
        for x in e.parts:
            _collect(x, out)
    elif isinstance(e, Quant):
        for g in e.gens:
            out.add(g.domain)
            if g.filter is not None:
                _collect(g.filter, out)
        _collect(e.body, out)
    elif isinstance(e, TupleExpr):
        for x in e.items:
            _collect(x, out)


# -- reference evaluator -----------------------------------------------------


def evaluate(e: Expr, struct: Structure, env: dict[str, Value] | None = None):
    """Evaluate a type-annotated expression against a structure.

    Every symbol the expression reads must be interpreted; reading an ABSENT
    symbol raises InterpretationError.  This is the reference semantics that
    model checking and the test oracles rely on; keep it simple.
    """
    return _ev(e, struct, env or {})


def _ev(e: Expr, S: Structure, env: dict[str, Value]):
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Apply):
        if e.role == "type":
            return _ev(e.args[0], S, env) in S.type_ext[e.name]
        if e.role == "predicate":
            ext = S.rel_ext[e.name]
            if ext is None:
                raise InterpretationError(f"predicate {e.name} is not interpreted")
            return tuple(_ev(a, S, env) for a in e.args) in ext
        table = S.fun_table[e.name]
        if table is None:
            raise InterpretationError(f"function {e.name} is not interpreted")
        key = tuple(_ev(a, S, env) for a in e.args)
        if key not in table:
            raise InterpretationError(f"{e.name}{key!r} is outside the function domain")
        return table[key]
    if isinstance(e, Arith):
        a = _ev(e.left, S, env)
        b = _ev(e.right, S, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0:
            raise InterpretationError("division by zero")
        if e.op == "/":
            return a // b
        return a % b
    if isinstance(e, Compare):
        a = _ev(e.left, S, env)
        b = _ev(e.right, S, env)
        if e.op == "==":
            return a == b
        if e.op == "!=":
            return a != b
        if e.op == "<":
            return a < b
        if e.op == "<=":
            return a <= b
        if e.op == ">":
            return a > b
        return a >= b
    if isinstance(e, Membership):
        key = tuple(_ev(x, S, env) for x in e.items)
        if e.role == "type":
            return key[0] in S.type_ext[e.rel]
        ext = S.rel_ext[e.rel]
        if ext is None:
            raise InterpretationError(f"predicate {e.rel} is not interpreted")
        return key in ext
    if isinstance(e, Not):
        return not _ev(e.operand, S, env)
    if isinstance(e, BoolOp):
        if e.op == "and":
            return all(_ev(x, S, env) for x in e.parts)
        return any(_ev(x, S, env) for x in e.parts)
    if isinstance(e, Quant):
        return _ev_quant(e, S, env)
    raise TypeError(f"cannot evaluate {e!r}")


def _ev_quant(e: Quant, S: Structure, env: dict[str, Value]) -> bool:
    want_all = e.kind == "all"

    def rec(i: int, env: dict[str, Value]) -> bool:
        if i == len(e.gens):
            v = bool(_ev(e.body, S, env))
            return v
        g = e.gens[i]
        if g.dom_kind == "type":
            rows: Iterator = ((v,) for v in S.type_ext[g.domain])
        else:
            ext = S.rel_ext[g.domain]
            if ext is None:
                raise InterpretationError(f"predicate {g.domain} is not interpreted")
            rows = iter(list(ext))
        for row in rows:
            local = dict(env)
            for name, val in zip(g.pattern, row):
                local[name] = val
            if g.filter is not None and not _ev(g.filter, S, local):
                continue
            r = rec(i + 1, local)
            if want_all and not r:
                return False
            if not want_all and r:
                return True
        return want_all

    return rec(0, env)


# -- compiled evaluator ------------------------------------------------------
#
# compile_expr turns a typed tree into nested closures with the same
# semantics as `evaluate`.  Fixpoint evaluation calls rule bodies millions of
# times; the closure form cuts the per-call interpretive overhead.  A
# differential test pins compiled results to the reference on random inputs.

CompiledExpr = Callable[[Structure, dict], object]


def _rel(S: Structure, name: str) -> dict[tuple, None]:
    ext = S.rel_ext[name]
    if ext is None:
        raise InterpretationError(f"predicate {name} is not interpreted")
    return ext


def _fun_lookup(S: Structure, name: str, key: tuple):
    table = S.fun_table[name]
    if table is None:
        raise InterpretationError(f"function {name} is not interpreted")
    try:
        return table[key]
    except KeyError:
        raise InterpretationError(
            f"{name}{key!r} is outside the function domain") from None


def compile_expr(e: Expr) -> CompiledExpr:
    """Compile a type-annotated expression.  Call as fn(struct, env)."""
    return _cc(e)


def _cc(e: Expr) -> CompiledExpr:
    if isinstance(e, Lit):
        v = e.value
        return lambda S, env: v
    if isinstance(e, Var):
        n = e.name
        return lambda S, env: env[n]
    if isinstance(e, Apply):
        name = e.name
        args = [_cc(a) for a in e.args]
        if e.role == "type":
            a0 = args[0]
            return lambda S, env: a0(S, env) in S.type_ext[name]
        if e.role == "predicate":
            if len(args) == 1:
                a0 = args[0]
                return lambda S, env: (a0(S, env),) in _rel(S, name)
            if len(args) == 2:
                a0, a1 = args
                return lambda S, env: (a0(S, env), a1(S, env)) in _rel(S, name)
            return lambda S, env: tuple(a(S, env) for a in args) in _rel(S, name)
        if e.role == "constant":
            return lambda S, env: _fun_lookup(S, name, ())
        if len(args) == 1:
            a0 = args[0]

            def apply1(S, env):
                k = (a0(S, env),)
                table = S.fun_table[name]
                try:
                    return table[k]
                except (KeyError, TypeError):
                    return _fun_lookup(S, name, k)

            return apply1
        return lambda S, env: _fun_lookup(S, name,
                                          tuple(a(S, env) for a in args))
    if isinstance(e, Arith):
        lf, rf = _cc(e.left), _cc(e.right)
        op = e.op
        if op == "+":
            return lambda S, env: lf(S, env) + rf(S, env)
        if op == "-":
            return lambda S, env: lf(S, env) - rf(S, env)
        if op == "*":
            return lambda S, env: lf(S, env) * rf(S, env)

        def divide(S, env, lf=lf, rf=rf, mod=(op == "%")):
            d = rf(S, env)
            if d == 0:
                raise InterpretationError("division by zero")
            return lf(S, env) % d if mod else lf(S, env) // d

        return divide
    if isinstance(e, Compare):
        lf, rf = _cc(e.left), _cc(e.right)
        op = e.op
        if op == "==":
            return lambda S, env: lf(S, env) == rf(S, env)
        if op == "!=":
            return lambda S, env: lf(S, env) != rf(S, env)
        if op == "<":
            return lambda S, env: lf(S, env) < rf(S, env)
        if op == "<=":
            return lambda S, env: lf(S, env) <= rf(S, env)
        if op == ">":
            return lambda S, env: lf(S, env) > rf(S, env)
        return lambda S, env: lf(S, env) >= rf(S, env)
    if isinstance(e, Membership):
        items = [_cc(x) for x in e.items]
        rel = e.rel
        if e.role == "type":
            x0 = items[0]
            return lambda S, env: x0(S, env) in S.type_ext[rel]
        if len(items) == 2:
            x0, x1 = items
            return lambda S, env: (x0(S, env), x1(S, env)) in _rel(S, rel)
        return lambda S, env: tuple(x(S, env) for x in items) in _rel(S, rel)
    if isinstance(e, Not):
        f = _cc(e.operand)
        return lambda S, env: not f(S, env)
    if isinstance(e, BoolOp):
        parts = [_cc(x) for x in e.parts]
        if e.op == "and":
            if len(parts) == 2:
                p0, p1 = parts
                return lambda S, env: bool(p0(S, env)) and bool(p1(S, env))
            return lambda S, env: all(p(S, env) for p in parts)
        if len(parts) == 2:
            p0, p1 = parts
            return lambda S, env: bool(p0(S, env)) or bool(p1(S, env))
        return lambda S, env: any(p(S, env) for p in parts)
    if isinstance(e, Quant):
        return _cc_quant(e)
    raise TypeError(f"cannot compile {e!r}")


def _cc_quant(e: Quant) -> CompiledExpr:
    want_all = e.kind == "all"
    body = _cc(e.body)
    inner = lambda S, env: bool(body(S, env))  # noqa: E731

    # Build loop levels inside-out.  Each level returns True when its
    # quantified block holds (for 'all': no counterexample below; for 'any':
    # some witness below).
    for g in reversed(e.gens):
        inner = _cc_level(g, inner, want_all)
    return inner


def _cc_level(g: Generator, inner: CompiledExpr, want_all: bool) -> CompiledExpr:
    filt = _cc(g.filter) if g.filter is not None else None
    dom = g.domain
    pattern = g.pattern
    is_type = g.dom_kind == "type"

    if is_type:
        var = pattern[0]

        def level(S, env):
            check = inner
            f = filt
            for v in S.type_ext[dom]:
                env[var] = v
                if f is not None and not f(S, env):
                    continue
                if check(S, env):
                    if not want_all:
                        return True
                elif want_all:
                    return False
            return want_all

        return level

    if len(pattern) == 2:
        va, vb = pattern

        def level2(S, env):
            ext = S.rel_ext[dom]
            if ext is None:
                raise InterpretationError(f"predicate {dom} is not interpreted")
            check = inner
            f = filt
            for a, b in ext:
                env[va] = a
                env[vb] = b
                if f is not None and not f(S, env):
                    continue
                if check(S, env):
                    if not want_all:
                        return True
                elif want_all:
                    return False
            return want_all

        return level2

    def leveln(S, env):
        ext = S.rel_ext[dom]
        if ext is None:
            raise InterpretationError(f"predicate {dom} is not interpreted")
        check = inner
        f = filt
        for row in ext:
            for name, val in zip(pattern, row):
                env[name] = val
            if f is not None and not f(S, env):
                continue
            if check(S, env):
                if not want_all:
                    return True
            elif want_all:
                return False
        return want_all

    return leveln
