"""Core abstract syntax: expressions, simple types, relational types, assertions.

Binding is locally nameless: bound occurrences are de Bruijn indices
(`BVar`), free occurrences are names (`FVar`).  A variable occurrence carries
a side marker: None for plain occurrences, "l"/"r" for the left/right
instance of a relational variable.  Only plain variables are ever bound by
program binders; type and assertion binders introduce relational variables
whose occurrences under the binder are sided.

All nodes are immutable and hashable.  Structural equality ignores source
spans and binder name hints, so `==` is exactly alpha-equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from typing import Optional, Tuple, Union

Q = Fraction


@dataclass(frozen=True)
class Span:
    file: str
    line: int
    col: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.col}"


def _span_field():
    return field(default=None, compare=False, repr=False)


def _hint_field():
    return field(default="_", compare=False)


class Node:
    """Base for all AST nodes; provides child-map plumbing."""

    __slots__ = ()


# ---------------------------------------------------------------------------
# Expressions (shared by programs and relational expressions)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Expr(Node):
    __slots__ = ()


@dataclass(frozen=True)
class FVar(Expr):
    name: str
    side: Optional[str] = None  # None | "l" | "r"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class BVar(Expr):
    index: int
    side: Optional[str] = None
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class NatLit(Expr):
    value: int
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class RealLit(Expr):
    value: Fraction
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class InfLit(Expr):
    """The +infinity element of the extended nonnegative reals."""

    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class UnitLit(Expr):
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class NilLit(Expr):
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Cons(Expr):
    head: Expr
    tail: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Pair(Expr):
    fst: Expr
    snd: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class App(Expr):
    fun: Expr
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class PrimApp(Expr):
    """Fully applied interpreted function symbol (+, *, sz, nth, ...)."""

    op: str
    args: Tuple[Expr, ...]
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Lam(Expr):
    body: Expr  # binds BVar(0)
    hint: str = _hint_field()
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Let(Expr):
    rhs: Expr
    body: Expr  # binds BVar(0)
    hint: str = _hint_field()
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class LetRec(Expr):
    """letrec f x = body.  body binds BVar(1) = f and BVar(0) = x.

    sn selects the strongly-normalizing form (termination-guarded, free
    result type) as opposed to the general form (result in the partiality
    monad).
    """

    sn: bool
    body: Expr
    anno: Optional["RelType"] = None
    fhint: str = _hint_field()
    xhint: str = _hint_field()
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class If(Expr):
    cond: Expr
    then: Expr
    els: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class ListCase(Expr):
    scrut: Expr
    nil_branch: Expr
    cons_branch: Expr  # binds BVar(1) = head, BVar(0) = tail
    hhint: str = _hint_field()
    thint: str = _hint_field()
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class NatCase(Expr):
    scrut: Expr
    zero_branch: Expr
    succ_branch: Expr  # binds BVar(0) = predecessor
    phint: str = _hint_field()
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class PairCase(Expr):
    scrut: Expr
    body: Expr  # binds BVar(1) = fst, BVar(0) = snd
    ahint: str = _hint_field()
    bhint: str = _hint_field()
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class UnitC(Expr):
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class BindC(Expr):
    rhs: Expr
    body: Expr  # binds BVar(0)
    hint: str = _hint_field()
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class UnitM(Expr):
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class BindM(Expr):
    rhs: Expr
    body: Expr  # binds BVar(0)
    hint: str = _hint_field()
    span: Optional[Span] = _span_field()


# Interpreted function symbols, with arities.  Comparisons yield booleans at
# the program level; in assertions they appear as atoms instead.
PRIM_ARITY = {
    "add": 2, "sub": 2, "mul": 2, "div": 2, "neg": 1,
    "abs": 1, "max": 2, "min": 2, "pow": 2, "log": 1, "exp": 1,
    "size": 1, "nth": 2, "append": 2, "fst": 1, "snd": 1,
    "lt": 2, "le": 2, "gt": 2, "ge": 2, "eq": 2, "ne": 2,
    "cval": 1,  # value under the partiality constructor, internal
}


# ---------------------------------------------------------------------------
# Simple types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimpleType(Node):
    __slots__ = ()


@dataclass(frozen=True)
class SUnit(SimpleType):
    pass


@dataclass(frozen=True)
class SBool(SimpleType):
    pass


@dataclass(frozen=True)
class SNat(SimpleType):
    pass


@dataclass(frozen=True)
class SReal(SimpleType):
    pass


@dataclass(frozen=True)
class SXReal(SimpleType):
    """Nonnegative reals extended with +infinity."""


@dataclass(frozen=True)
class SList(SimpleType):
    elem: SimpleType


@dataclass(frozen=True)
class SProd(SimpleType):
    fst: SimpleType
    snd: SimpleType


@dataclass(frozen=True)
class SFun(SimpleType):
    dom: SimpleType
    cod: SimpleType


@dataclass(frozen=True)
class SM(SimpleType):
    body: SimpleType


@dataclass(frozen=True)
class SC(SimpleType):
    body: SimpleType


def is_core(t: SimpleType) -> bool:
    if isinstance(t, (SUnit, SBool, SNat, SReal, SXReal)):
        return True
    if isinstance(t, SList):
        return is_core(t.elem)
    if isinstance(t, SProd):
        return is_core(t.fst) and is_core(t.snd)
    return False


# ---------------------------------------------------------------------------
# Relational types and assertions (mutually recursive)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RelType(Node):
    __slots__ = ()


@dataclass(frozen=True)
class RBase(RelType):
    core: SimpleType
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class RM(RelType):
    eps: Expr
    delta: Expr
    body: RelType
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class RC(RelType):
    body: RelType
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class RPi(RelType):
    dom: RelType
    cod: RelType  # binds BVar(0), sided occurrences
    hint: str = _hint_field()
    span: Optional[Span] = _span_field()
    # implicit parameters are solved by matching the next explicit argument's
    # synthesized type (used by index-polymorphic primitives)
    implicit: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class RRef(RelType):
    base: RelType
    phi: "Assertion"  # binds BVar(0), sided occurrences
    hint: str = _hint_field()
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Assertion(Node):
    __slots__ = ()


@dataclass(frozen=True)
class ATrue(Assertion):
    pass


@dataclass(frozen=True)
class AFalse(Assertion):
    pass


@dataclass(frozen=True)
class ANot(Assertion):
    body: Assertion


@dataclass(frozen=True)
class AAnd(Assertion):
    items: Tuple[Assertion, ...]


@dataclass(frozen=True)
class AOr(Assertion):
    items: Tuple[Assertion, ...]


@dataclass(frozen=True)
class AImp(Assertion):
    lhs: Assertion
    rhs: Assertion


@dataclass(frozen=True)
class AIff(Assertion):
    lhs: Assertion
    rhs: Assertion


@dataclass(frozen=True)
class ACmp(Assertion):
    """Atom e1 (op) e2 with op in eq / le / lt."""

    op: str
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class APred(Assertion):
    """Named logical predicate applied to relational expressions."""

    name: str
    args: Tuple[Expr, ...]


@dataclass(frozen=True)
class ALift(Assertion):
    """Lifted relation atom between two distribution-typed expressions.

    elem is the (normalized) relational type whose interpretation is being
    lifted at the given indices; left/right are the distribution terms.  The
    SMT encoding keeps these opaque except for the exact zero-index equality
    case, which coincides with equality of distributions.
    """

    eps: Expr
    delta: Expr
    elem: RelType
    left: Expr
    right: Expr


@dataclass(frozen=True)
class AForallP(Assertion):
    ty: SimpleType
    body: Assertion  # binds BVar(0), plain occurrences
    hint: str = _hint_field()


@dataclass(frozen=True)
class AExistsP(Assertion):
    ty: SimpleType
    body: Assertion
    hint: str = _hint_field()


@dataclass(frozen=True)
class AForallR(Assertion):
    ty: RelType
    body: Assertion  # binds BVar(0), sided occurrences
    hint: str = _hint_field()


@dataclass(frozen=True)
class AExistsR(Assertion):
    ty: RelType
    body: Assertion
    hint: str = _hint_field()


def a_and(items) -> Assertion:
    flat = []
    for a in items:
        if isinstance(a, ATrue):
            continue
        if isinstance(a, AAnd):
            flat.extend(a.items)
        else:
            flat.append(a)
    if not flat:
        return ATrue()
    if len(flat) == 1:
        return flat[0]
    return AAnd(tuple(flat))


def a_imp(lhs: Assertion, rhs: Assertion) -> Assertion:
    if isinstance(lhs, ATrue):
        return rhs
    if isinstance(rhs, ATrue):
        return ATrue()
    return AImp(lhs, rhs)


# ---------------------------------------------------------------------------
# Generic traversal
# ---------------------------------------------------------------------------

# Children that sit under one extra binder, per node class, by field name.
_BINDING_DEPTH = {
    Lam: {"body": 1},
    Let: {"body": 1},
    LetRec: {"body": 2},
    ListCase: {"cons_branch": 2},
    NatCase: {"succ_branch": 1},
    PairCase: {"body": 2},
    BindC: {"body": 1},
    BindM: {"body": 1},
    RPi: {"cod": 1},
    RRef: {"phi": 1},
    AForallP: {"body": 1},
    AExistsP: {"body": 1},
    AForallR: {"body": 1},
    AExistsR: {"body": 1},
}


def _map_children(node, fn, depth):
    """Rebuild node applying fn(child, depth) to each AST child."""
    if not isinstance(node, (Expr, RelType, Assertion)):
        return node
    binder_info = _BINDING_DEPTH.get(type(node), {})
    updates = {}
    for f in fields(node):
        v = getattr(node, f.name)
        extra = binder_info.get(f.name, 0)
        if isinstance(v, (Expr, RelType, Assertion)):
            nv = fn(v, depth + extra)
            if nv is not v:
                updates[f.name] = nv
        elif isinstance(v, tuple) and v and isinstance(v[0], (Expr, RelType, Assertion)):
            nv = tuple(fn(x, depth + extra) for x in v)
            if any(a is not b for a, b in zip(nv, v)):
                updates[f.name] = nv
    if updates:
        return replace(node, **updates)
    return node


def open_at(node, k: int, repl: dict):
    """Replace BVar(k, side) at binding depth by repl[side] and remove the
    binder: indices above the opened one shift down by one.

    Values of repl must be locally closed (no dangling indices), so no
    shifting of the replacement is required.  Sides missing from repl are
    left untouched (the index still shifts as the binder disappears).
    """

    def go(n, depth):
        if isinstance(n, BVar):
            if n.index == k + depth:
                if n.side in repl:
                    return repl[n.side]
                return n
            if n.index > k + depth:
                return BVar(n.index - 1, n.side, span=n.span)
            return n
        return _map_children(n, go, depth)

    return go(node, 0)


def open_rel(node, name: str):
    """Open the outermost binder with a fresh relational variable `name`."""
    return open_at(node, 0, {"l": FVar(name, "l"), "r": FVar(name, "r"),
                             None: FVar(name, None)})


def open_plain(node, name: str):
    return open_at(node, 0, {None: FVar(name, None)})


def close_at(node, k: int, name: str):
    """Abstract the free variable `name` (all sides) to BVar(k)."""

    def go(n, depth):
        if isinstance(n, FVar) and n.name == name:
            return BVar(k + depth, n.side)
        return _map_children(n, go, depth)

    return go(node, 0)


def subst_free(node, name: str, repl: dict):
    """Replace FVar(name, side) by repl[side] (locally closed values)."""

    def go(n, depth):
        if isinstance(n, FVar) and n.name == name and n.side in repl:
            return repl[n.side]
        return _map_children(n, go, depth)

    return go(node, 0)


def free_vars(node) -> set:
    """Set of (name, side) pairs of free variables."""
    out = set()

    def go(n, depth):
        if isinstance(n, FVar):
            out.add((n.name, n.side))
        _map_children(n, go, depth)
        return n

    go(node, 0)
    return out


def free_names(node) -> set:
    return {name for name, _ in free_vars(node)}


_FRESH_COUNTER = [0]


def fresh_name(base: str, avoid=()) -> str:
    base = base or "_x"
    if base not in avoid:
        return base
    while True:
        _FRESH_COUNTER[0] += 1
        cand = f"{base}%{_FRESH_COUNTER[0]}"
        if cand not in avoid:
            return cand


# ---------------------------------------------------------------------------
# Embedding and relational substitution
# ---------------------------------------------------------------------------


def embed(e: Expr, side: str) -> Expr:
    """Mark every free plain variable of a plain expression with `side`."""
    assert side in ("l", "r")

    def go(n, depth):
        if isinstance(n, FVar) and n.side is None:
            return FVar(n.name, side, span=n.span)
        return _map_children(n, go, depth)

    return go(e, 0)


def subst_rel(node, name: str, pair: Tuple[Expr, Expr]):
    """Substitute the relational variable `name` by a pair of plain
    expressions: x_l becomes embed(e1, l) and x_r becomes embed(e2, r)."""
    e1, e2 = pair
    return subst_free(node, name, {"l": embed(e1, "l"), "r": embed(e2, "r")})


def open_rel_with_pair(node, pair: Tuple[Expr, Expr]):
    """Open the outermost relational binder with a pair of plain
    expressions (the App rule's substitution into the result type)."""
    e1, e2 = pair
    return open_at(node, 0, {"l": embed(e1, "l"), "r": embed(e2, "r")})


# ---------------------------------------------------------------------------
# Erasure
# ---------------------------------------------------------------------------


def erase(t: RelType) -> SimpleType:
    """Forget refinements, monad indices, and dependency."""
    if isinstance(t, RBase):
        return t.core
    if isinstance(t, RM):
        return SM(erase(t.body))
    if isinstance(t, RC):
        return SC(erase(t.body))
    if isinstance(t, RPi):
        if t.implicit:
            return erase(t.cod)
        return SFun(erase(t.dom), erase(t.cod))
    if isinstance(t, RRef):
        return erase(t.base)
    raise TypeError(f"not a relational type: {t!r}")


# ---------------------------------------------------------------------------
# Environments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RelBinding:
    name: str
    ty: RelType


@dataclass(frozen=True)
class RelFact:
    phi: Assertion


class RelEnv:
    """Ordered sequence of relational bindings interleaved with facts."""

    def __init__(self, items=()):
        self.items = tuple(items)
        names = [it.name for it in self.items if isinstance(it, RelBinding)]
        if len(names) != len(set(names)):
            raise ValueError("variable bound twice in relational environment")

    def bind(self, name: str, ty: RelType) -> "RelEnv":
        return RelEnv(self.items + (RelBinding(name, ty),))

    def fact(self, phi: Assertion) -> "RelEnv":
        if isinstance(phi, ATrue):
            return self
        return RelEnv(self.items + (RelFact(phi),))

    def lookup(self, name: str) -> Optional[RelType]:
        for it in reversed(self.items):
            if isinstance(it, RelBinding) and it.name == name:
                return it.ty
        return None

    def names(self):
        return [it.name for it in self.items if isinstance(it, RelBinding)]

    def bindings(self):
        return [it for it in self.items if isinstance(it, RelBinding)]

    def facts(self):
        return [it.phi for it in self.items if isinstance(it, RelFact)]

    def __iter__(self):
        return iter(self.items)

    def __contains__(self, name):
        return self.lookup(name) is not None


def erase_env(env: RelEnv) -> dict:
    """Doubled simple environment: x :: T yields x_l and x_r at erase(T)."""
    out = {}
    for it in env:
        if isinstance(it, RelBinding):
            s = erase(it.ty)
            out[(it.name, "l")] = s
            out[(it.name, "r")] = s
    return out


# ---------------------------------------------------------------------------
# Administrative reduction (beta / let / projection simplification)
# ---------------------------------------------------------------------------


def reduce_admin(e: Expr) -> Expr:
    """Reduce administrative redexes: beta, let, pair and list projections.

    Deterministic normal-order passes; used both by the checker's closure
    under reduction and to simplify assertions after substitution.
    """

    def step(n, depth):
        n = _map_children(n, step, depth)
        if isinstance(n, App) and isinstance(n.fun, Lam):
            return open_at(n.fun.body, 0, {None: n.arg})
        if isinstance(n, Let):
            return open_at(n.body, 0, {None: n.rhs})
        if isinstance(n, PairCase) and isinstance(n.scrut, Pair):
            opened = open_at(n.body, 1, {None: n.scrut.fst})
            return open_at(opened, 0, {None: n.scrut.snd})
        if isinstance(n, PrimApp) and n.op == "fst" and isinstance(n.args[0], Pair):
            return n.args[0].fst
        if isinstance(n, PrimApp) and n.op == "snd" and isinstance(n.args[0], Pair):
            return n.args[0].snd
        if isinstance(n, If) and isinstance(n.cond, BoolLit):
            return n.then if n.cond.value else n.els
        if isinstance(n, ListCase) and isinstance(n.scrut, NilLit):
            return n.nil_branch
        if isinstance(n, ListCase) and isinstance(n.scrut, Cons):
            opened = open_at(n.cons_branch, 1, {None: n.scrut.head})
            return open_at(opened, 0, {None: n.scrut.tail})
        if isinstance(n, NatCase) and isinstance(n.scrut, NatLit):
            if n.scrut.value == 0:
                return n.zero_branch
            return open_at(n.succ_branch, 0, {None: NatLit(n.scrut.value - 1)})
        return n

    prev = None
    cur = e
    for _ in range(64):  # administrative chains are short
        if cur == prev:
            break
        prev = cur
        cur = step(cur, 0)
    return cur


def simplify_assertion(a: Assertion) -> Assertion:
    """Beta-simplify relational expressions inside an assertion; syntactically
    reflexive equations collapse to truth."""

    def go(n, depth):
        if isinstance(n, (ACmp, APred)):
            n = _map_children(n, lambda x, d: reduce_admin(x), depth)
            if isinstance(n, ACmp) and n.op in ("eq", "le") and n.lhs == n.rhs:
                return ATrue()
            return n
        return _map_children(n, go, depth)

    return go(a, 0)


# ---------------------------------------------------------------------------
# Pretty printing (deterministic; parseable back by the concrete parser)
# ---------------------------------------------------------------------------

_INFIX = {
    "add": "+", "sub": "-", "mul": "*", "div": "/",
    "lt": "<", "le": "<=", "gt": ">", "ge": ">=", "eq": "==", "ne": "<>",
    "append": "++", "pow": "^",
}


class _Namer:
    def __init__(self, avoid):
        self.avoid = set(avoid)
        self.stack = []

    def push(self, hint):
        name = fresh_name(hint if hint != "_" else "x", self.avoid)
        self.avoid.add(name)
        self.stack.append(name)
        return name

    def pop(self, n=1):
        for _ in range(n):
            self.avoid.discard(self.stack.pop())

    def get(self, index):
        return self.stack[-1 - index]


def _pvar(name, side):
    if side == "l":
        return f"{name}<l>"
    if side == "r":
        return f"{name}<r>"
    return name


def pp_expr(e: Expr, namer=None) -> str:
    if namer is None:
        namer = _Namer(free_names(e))
    p = lambda x: pp_expr(x, namer)

    if isinstance(e, FVar):
        return _pvar(e.name, e.side)
    if isinstance(e, BVar):
        return _pvar(namer.get(e.index), e.side)
    if isinstance(e, NatLit):
        return str(e.value)
    if isinstance(e, RealLit):
        q = e.value
        if q.denominator == 1:
            return f"{q.numerator}.0" if q.numerator >= 0 else f"(0.0 - {-q.numerator}.0)"
        if q >= 0:
            return f"({q.numerator}.0 / {q.denominator}.0)"
        return f"(0.0 - {-q.numerator}.0 / {q.denominator}.0)"
    if isinstance(e, InfLit):
        return "inf"
    if isinstance(e, UnitLit):
        return "()"
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, NilLit):
        return "[]"
    if isinstance(e, Cons):
        return f"({p(e.head)} :: {p(e.tail)})"
    if isinstance(e, Pair):
        return f"({p(e.fst)}, {p(e.snd)})"
    if isinstance(e, App):
        return f"({p(e.fun)} {p(e.arg)})"
    if isinstance(e, PrimApp):
        if e.op in _INFIX and len(e.args) == 2:
            return f"({p(e.args[0])} {_INFIX[e.op]} {p(e.args[1])})"
        if e.op == "abs":
            return f"|{p(e.args[0])}|"
        if e.op == "neg":
            return f"(0.0 - {p(e.args[0])})"
        return f"({e.op} {' '.join(p(a) for a in e.args)})"
    if isinstance(e, Lam):
        x = namer.push(e.hint)
        body = p(e.body)
        namer.pop()
        return f"(fun {x} -> {body})"
    if isinstance(e, Let):
        rhs = p(e.rhs)
        x = namer.push(e.hint)
        body = p(e.body)
        namer.pop()
        return f"(let {x} = {rhs} in {body})"
    if isinstance(e, LetRec):
        f = namer.push(e.fhint)
        x = namer.push(e.xhint)
        body = p(e.body)
        namer.pop(2)
        kw = "let rec" if not e.sn else "let rec"
        anno = f" : {pp_reltype(e.anno, namer)}" if e.anno is not None else ""
        return f"({kw} {f} {x}{anno} = {body})"
    if isinstance(e, If):
        return f"(if {p(e.cond)} then {p(e.then)} else {p(e.els)})"
    if isinstance(e, ListCase):
        s = p(e.scrut)
        nb = p(e.nil_branch)
        h = namer.push(e.hhint)
        t = namer.push(e.thint)
        cb = p(e.cons_branch)
        namer.pop(2)
        return f"(match {s} with [] -> {nb} | {h} :: {t} -> {cb})"
    if isinstance(e, NatCase):
        s = p(e.scrut)
        zb = p(e.zero_branch)
        pr = namer.push(e.phint)
        sb = p(e.succ_branch)
        namer.pop()
        return f"(match {s} with 0 -> {zb} | {pr} + 1 -> {sb})"
    if isinstance(e, PairCase):
        s = p(e.scrut)
        a = namer.push(e.ahint)
        b = namer.push(e.bhint)
        body = p(e.body)
        namer.pop(2)
        return f"(let ({a}, {b}) = {s} in {body})"
    if isinstance(e, UnitC):
        return f"(cunit {p(e.arg)})"
    if isinstance(e, BindC):
        rhs = p(e.rhs)
        x = namer.push(e.hint)
        body = p(e.body)
        namer.pop()
        return f"(clet {x} = {rhs} in {body})"
    if isinstance(e, UnitM):
        return f"(munit {p(e.arg)})"
    if isinstance(e, BindM):
        rhs = p(e.rhs)
        x = namer.push(e.hint)
        body = p(e.body)
        namer.pop()
        return f"(mlet {x} = {rhs} in {body})"
    raise TypeError(f"cannot print {e!r}")


def pp_simple(t: SimpleType) -> str:
    if isinstance(t, SUnit):
        return "unit"
    if isinstance(t, SBool):
        return "bool"
    if isinstance(t, SNat):
        return "nat"
    if isinstance(t, SReal):
        return "real"
    if isinstance(t, SXReal):
        return "xreal"
    if isinstance(t, SList):
        return f"list {pp_simple(t.elem)}"
    if isinstance(t, SProd):
        return f"({pp_simple(t.fst)} * {pp_simple(t.snd)})"
    if isinstance(t, SFun):
        return f"({pp_simple(t.dom)} -> {pp_simple(t.cod)})"
    if isinstance(t, SM):
        return f"M {pp_simple(t.body)}"
    if isinstance(t, SC):
        return f"C {pp_simple(t.body)}"
    raise TypeError(f"cannot print {t!r}")


def pp_reltype(t: RelType, namer=None) -> str:
    if namer is None:
        avoid = set()
        for name, _ in free_vars(t):
            avoid.add(name)
        namer = _Namer(avoid)

    if isinstance(t, RBase):
        return pp_simple(t.core)
    if isinstance(t, RM):
        return (f"M[{pp_expr(t.eps, namer)}, {pp_expr(t.delta, namer)}] "
                f"{pp_reltype(t.body, namer)}")
    if isinstance(t, RC):
        return f"C {pp_reltype(t.body, namer)}"
    if isinstance(t, RPi):
        dom = pp_reltype(t.dom, namer)
        x = namer.push(t.hint)
        cod = pp_reltype(t.cod, namer)
        namer.pop()
        return f"(Pi ({x} :: {dom}). {cod})"
    if isinstance(t, RRef):
        base = pp_reltype(t.base, namer)
        x = namer.push(t.hint)
        phi = pp_assertion(t.phi, namer)
        namer.pop()
        return f"{{{x} :: {base} | {phi}}}"
    raise TypeError(f"cannot print {t!r}")


_ACMP = {"eq": "=", "le": "<=", "lt": "<"}


def pp_assertion(a: Assertion, namer=None) -> str:
    if namer is None:
        avoid = set()
        for name, _ in free_vars(a):
            avoid.add(name)
        namer = _Namer(avoid)
    p = lambda x: pp_assertion(x, namer)

    if isinstance(a, ATrue):
        return "top"
    if isinstance(a, AFalse):
        return "bot"
    if isinstance(a, ANot):
        return f"(not {p(a.body)})"
    if isinstance(a, AAnd):
        return "(" + " /\\ ".join(p(x) for x in a.items) + ")"
    if isinstance(a, AOr):
        return "(" + " \\/ ".join(p(x) for x in a.items) + ")"
    if isinstance(a, AImp):
        return f"({p(a.lhs)} ==> {p(a.rhs)})"
    if isinstance(a, AIff):
        return f"({p(a.lhs)} <=> {p(a.rhs)})"
    if isinstance(a, ACmp):
        return f"({pp_expr(a.lhs, namer)} {_ACMP[a.op]} {pp_expr(a.rhs, namer)})"
    if isinstance(a, APred):
        return f"({a.name} {' '.join(pp_expr(x, namer) for x in a.args)})"
    if isinstance(a, ALift):
        return (f"(lift[{pp_expr(a.eps, namer)}, {pp_expr(a.delta, namer)}]"
                f"({pp_reltype(a.elem, namer)}) {pp_expr(a.left, namer)} "
                f"{pp_expr(a.right, namer)})")
    if isinstance(a, (AForallP, AExistsP)):
        q = "forall" if isinstance(a, AForallP) else "exists"
        x = namer.push(a.hint)
        body = p(a.body)
        namer.pop()
        return f"({q} {x} : {pp_simple(a.ty)}. {body})"
    if isinstance(a, (AForallR, AExistsR)):
        q = "forall" if isinstance(a, AForallR) else "exists"
        ty = pp_reltype(a.ty, namer)
        x = namer.push(a.hint)
        body = p(a.body)
        namer.pop()
        return f"({q} {x} :: {ty}. {body})"
    raise TypeError(f"cannot print {a!r}")
