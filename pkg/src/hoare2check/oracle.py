"""Exact-rational denotational interpreter and semantic checker.

Finite-support distributions with Fraction weights are the semantic carrier.
The skewed distance between distributions is computed two independent ways
(subset brute force and pointwise positive part) and cross-asserted; lifting
is decided by exact LP feasibility over the coupling weights.  Multiplicative
privacy factors are passed as the rational value of e**eps, so everything
stays in Q.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Union

from .simplex import LinCons, feasible
from .syntax import (
    AAnd, ACmp, AExistsP, AExistsR, AFalse, AForallP, AForallR, AIff, AImp,
    ANot, AOr, APred, ATrue, App, Assertion, BVar, BindC, BindM, BoolLit,
    Cons, Expr, FVar, If, InfLit, Lam, Let, LetRec, ListCase, NatCase,
    NatLit, NilLit, Pair, PairCase, PrimApp, RBase, RC, RM, RPi, RRef,
    RealLit, RelType, SBool, SC, SFun, SList, SM, SNat, SProd, SReal, SUnit,
    SXReal, SimpleType, UnitC, UnitLit, UnitM, erase, fresh_name, open_plain,
    open_at, open_rel,
)

Q = Fraction


class OracleError(Exception):
    pass


class FuelExhausted(OracleError):
    """Raised when a general fixpoint runs out of unrolling budget outside
    the partiality monad."""


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------


class _BottomType:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "⊥"


BOTTOM = _BottomType()


class _UnitType:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "()"


UNIT = _UnitType()


class _InfType:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "inf"


INF = _InfType()

VList = tuple  # ("#list", v0, v1, ...)
VPair = tuple  # ("#pair", a, b)


def vlist(items) -> tuple:
    return ("#list", *items)


def vpair(a, b) -> tuple:
    return ("#pair", a, b)


def is_vlist(v) -> bool:
    return isinstance(v, tuple) and v and v[0] == "#list"


def is_vpair(v) -> bool:
    return isinstance(v, tuple) and len(v) == 3 and v[0] == "#pair"


@dataclass(frozen=True)
class FinDist:
    """Finite-support distribution with exact rational weights summing to 1."""

    weights: tuple  # sorted tuple of (value, Fraction) pairs

    @staticmethod
    def of(mapping) -> "FinDist":
        items = [(v, Q(p)) for v, p in
                 (mapping.items() if isinstance(mapping, dict) else mapping)
                 if Q(p) != 0]
        for _, p in items:
            if p < 0:
                raise OracleError("negative probability")
        total = sum((p for _, p in items), Q(0))
        if total != 1:
            raise OracleError(f"weights sum to {total}, not 1")
        merged = {}
        for v, p in items:
            merged[v] = merged.get(v, Q(0)) + p
        return FinDist(tuple(sorted(merged.items(), key=lambda kv: repr(kv[0]))))

    @staticmethod
    def dirac(v) -> "FinDist":
        return FinDist.of({v: Q(1)})

    @staticmethod
    def uniform(values) -> "FinDist":
        values = list(values)
        return FinDist.of({v: Q(1, len(values)) for v in values})

    def support(self):
        return [v for v, _ in self.weights]

    def prob(self, v) -> Fraction:
        for w, p in self.weights:
            if w == v:
                return p
        return Q(0)

    def as_dict(self) -> dict:
        return dict(self.weights)

    def map(self, f) -> "FinDist":
        out = {}
        for v, p in self.weights:
            w = f(v)
            out[w] = out.get(w, Q(0)) + p
        return FinDist.of(out)

    def bind(self, k) -> "FinDist":
        out = {}
        for v, p in self.weights:
            inner = k(v)
            for w, q in inner.weights:
                out[w] = out.get(w, Q(0)) + p * q
        return FinDist.of(out)


# ---------------------------------------------------------------------------
# Interpreter
# ---------------------------------------------------------------------------

DEFAULT_FUEL = 10_000


class Fuel:
    def __init__(self, amount=DEFAULT_FUEL):
        self.remaining = amount

    def tick(self):
        self.remaining -= 1
        if self.remaining < 0:
            raise FuelExhausted("fixpoint unrolling budget exhausted")


def _arith(op, args, span=None):
    def as_num(v):
        if isinstance(v, bool):
            raise OracleError(f"{op} applied to a boolean")
        return v

    a = [as_num(x) for x in args]
    if op == "add":
        if INF in a:
            return INF
        return a[0] + a[1]
    if op == "sub":
        if a[0] is INF:
            return INF
        if a[1] is INF:
            raise OracleError("subtraction of infinity")
        if isinstance(a[0], int) and isinstance(a[1], int):
            return max(0, a[0] - a[1])  # nat monus
        return a[0] - a[1]
    if op == "mul":
        if INF in a:
            other = a[0] if a[1] is INF else a[1]
            if other == 0:
                raise OracleError("0 * inf is undefined here")
            return INF
        return a[0] * a[1]
    if op == "div":
        if a[1] is INF:
            return Q(0)
        if a[0] is INF:
            return INF
        if a[1] == 0:
            raise OracleError("division by zero")
        return Q(a[0], 1) / Q(a[1], 1) if isinstance(a[0], int) else a[0] / a[1]
    if op == "neg":
        return -a[0]
    if op == "abs":
        if a[0] is INF:
            return INF
        return abs(a[0])
    if op == "max":
        return _cmp_max(a[0], a[1], True)
    if op == "min":
        return _cmp_max(a[0], a[1], False)
    if op == "pow":
        if a[0] is INF:
            return INF
        return a[0] ** a[1]
    if op in ("log", "exp"):
        raise OracleError(f"{op} has no exact rational semantics")
    raise OracleError(f"unknown arithmetic op {op}")


def _le(a, b) -> bool:
    if a is INF:
        return b is INF
    if b is INF:
        return True
    return a <= b


def _cmp_max(a, b, want_max):
    if _le(a, b):
        return b if want_max else a
    return a if want_max else b


def interp(theta: dict, e: Expr, fuel: Optional[Fuel] = None):
    """Denotation of `e` under valuation theta ((name, side) -> value).

    General fixpoints are evaluated by bounded unrolling; exhausting the
    budget raises FuelExhausted, which `clet` converts into the bottom of the
    partiality monad (use interp_c at C-typed top level).
    """
    if fuel is None:
        fuel = Fuel()

    def ev(expr, env):
        if isinstance(expr, FVar):
            key = (expr.name, expr.side)
            if key not in env:
                raise OracleError(f"valuation missing {key}")
            return env[key]
        if isinstance(expr, BVar):
            raise OracleError("dangling bound variable")
        if isinstance(expr, NatLit):
            return expr.value
        if isinstance(expr, RealLit):
            return expr.value
        if isinstance(expr, InfLit):
            return INF
        if isinstance(expr, UnitLit):
            return UNIT
        if isinstance(expr, BoolLit):
            return expr.value
        if isinstance(expr, NilLit):
            return vlist([])
        if isinstance(expr, Cons):
            tl = ev(expr.tail, env)
            if not is_vlist(tl):
                raise OracleError("cons onto a non-list")
            return ("#list", ev(expr.head, env)) + tl[1:]
        if isinstance(expr, Pair):
            return vpair(ev(expr.fst, env), ev(expr.snd, env))
        if isinstance(expr, App):
            f = ev(expr.fun, env)
            a = ev(expr.arg, env)
            if not callable(f):
                raise OracleError("application of a non-function")
            return f(a)
        if isinstance(expr, PrimApp):
            if expr.op in ("lt", "le", "gt", "ge", "eq", "ne"):
                a = ev(expr.args[0], env)
                b = ev(expr.args[1], env)
                if expr.op == "eq":
                    return a == b
                if expr.op == "ne":
                    return a != b
                if expr.op == "le":
                    return _le(a, b)
                if expr.op == "lt":
                    return _le(a, b) and a != b
                if expr.op == "ge":
                    return _le(b, a)
                return _le(b, a) and a != b
            if expr.op == "size":
                v = ev(expr.args[0], env)
                if not is_vlist(v):
                    raise OracleError("sz of a non-list")
                return len(v) - 1
            if expr.op == "nth":
                i = ev(expr.args[0], env)
                v = ev(expr.args[1], env)
                if not is_vlist(v) or not isinstance(i, int):
                    raise OracleError("nth expects an index and a list")
                if not 0 <= i < len(v) - 1:
                    raise OracleError("nth out of range")
                return v[1 + i]
            if expr.op == "append":
                a = ev(expr.args[0], env)
                b = ev(expr.args[1], env)
                if not (is_vlist(a) and is_vlist(b)):
                    raise OracleError("++ expects lists")
                return a + b[1:]
            if expr.op == "fst":
                v = ev(expr.args[0], env)
                if not is_vpair(v):
                    raise OracleError("fst of a non-pair")
                return v[1]
            if expr.op == "snd":
                v = ev(expr.args[0], env)
                if not is_vpair(v):
                    raise OracleError("snd of a non-pair")
                return v[2]
            return _arith(expr.op, [ev(a, env) for a in expr.args], expr.span)
        if isinstance(expr, Lam):
            def clo(v, _body=expr.body, _env=env):
                nm = fresh_name("a", {k for k, _ in _env})
                e2 = dict(_env)
                e2[(nm, None)] = v
                return ev(open_plain(_body, nm), e2)
            return clo
        if isinstance(expr, Let):
            v = ev(expr.rhs, env)
            nm = fresh_name(expr.hint, {k for k, _ in env})
            e2 = dict(env)
            e2[(nm, None)] = v
            return ev(open_plain(expr.body, nm), e2)
        if isinstance(expr, LetRec):
            def rec(v, _expr=expr, _env=env):
                fuel.tick()
                fn = fresh_name(_expr.fhint or "f", {k for k, _ in _env})
                xn = fresh_name(_expr.xhint or "x", {k for k, _ in _env} | {fn})
                body = open_at(open_at(_expr.body, 1, {None: FVar(fn)}),
                               0, {None: FVar(xn)})
                e2 = dict(_env)
                e2[(fn, None)] = rec
                e2[(xn, None)] = v
                return ev(body, e2)
            return rec
        if isinstance(expr, If):
            c = ev(expr.cond, env)
            if not isinstance(c, bool):
                raise OracleError("if condition is not a boolean")
            return ev(expr.then if c else expr.els, env)
        if isinstance(expr, ListCase):
            v = ev(expr.scrut, env)
            if not is_vlist(v):
                raise OracleError("match scrutinee is not a list")
            if len(v) == 1:
                return ev(expr.nil_branch, env)
            avoid = {k for k, _ in env}
            h = fresh_name(expr.hhint, avoid)
            t = fresh_name(expr.thint, avoid | {h})
            body = open_at(open_at(expr.cons_branch, 1, {None: FVar(h)}),
                           0, {None: FVar(t)})
            e2 = dict(env)
            e2[(h, None)] = v[1]
            e2[(t, None)] = ("#list",) + v[2:]
            return ev(body, e2)
        if isinstance(expr, NatCase):
            v = ev(expr.scrut, env)
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise OracleError("match scrutinee is not a natural")
            if v == 0:
                return ev(expr.zero_branch, env)
            p = fresh_name(expr.phint, {k for k, _ in env})
            e2 = dict(env)
            e2[(p, None)] = v - 1
            return ev(open_plain(expr.succ_branch, p), e2)
        if isinstance(expr, PairCase):
            v = ev(expr.scrut, env)
            if not is_vpair(v):
                raise OracleError("pair destructuring of a non-pair")
            avoid = {k for k, _ in env}
            a = fresh_name(expr.ahint, avoid)
            b = fresh_name(expr.bhint, avoid | {a})
            body = open_at(open_at(expr.body, 1, {None: FVar(a)}),
                           0, {None: FVar(b)})
            e2 = dict(env)
            e2[(a, None)] = v[1]
            e2[(b, None)] = v[2]
            return ev(body, e2)
        if isinstance(expr, UnitC):
            return ev(expr.arg, env)
        if isinstance(expr, BindC):
            try:
                d = ev(expr.rhs, env)
            except FuelExhausted:
                return BOTTOM
            if d is BOTTOM:
                return BOTTOM
            nm = fresh_name(expr.hint, {k for k, _ in env})
            e2 = dict(env)
            e2[(nm, None)] = d
            return ev(open_plain(expr.body, nm), e2)
        if isinstance(expr, UnitM):
            return FinDist.dirac(ev(expr.arg, env))
        if isinstance(expr, BindM):
            d = ev(expr.rhs, env)
            if not isinstance(d, FinDist):
                raise OracleError("mlet of a non-distribution")
            nm = fresh_name(expr.hint, {k for k, _ in env})

            def k(v):
                e2 = dict(env)
                e2[(nm, None)] = v
                out = ev(open_plain(expr.body, nm), e2)
                if not isinstance(out, FinDist):
                    raise OracleError("mlet body is not a distribution")
                return out

            return d.bind(k)
        raise OracleError(f"cannot interpret {expr!r}")

    return ev(e, dict(theta))


def interp_c(theta, e, fuel=None):
    """Like interp, but a fuel exhaustion at top level denotes bottom."""
    try:
        return interp(theta, e, fuel)
    except FuelExhausted:
        return BOTTOM


# ---------------------------------------------------------------------------
# Skewed distance, two ways
# ---------------------------------------------------------------------------


def eps_distance_subsets(eps_mult: Fraction, mu1: FinDist, mu2: FinDist) -> Fraction:
    """max over event sets E of Pr1[E] - m * Pr2[E] (brute force)."""
    support = sorted(set(mu1.support()) | set(mu2.support()), key=repr)
    if len(support) > 20:
        raise OracleError("support too large for subset brute force")
    m = Q(eps_mult)
    best = Q(0)  # E = empty set
    for r in range(1, len(support) + 1):
        for combo in itertools.combinations(support, r):
            val = sum((mu1.prob(v) for v in combo), Q(0)) \
                - m * sum((mu2.prob(v) for v in combo), Q(0))
            if val > best:
                best = val
    return best


def eps_distance_pointwise(eps_mult: Fraction, mu1: FinDist, mu2: FinDist) -> Fraction:
    """sum over points of max(0, mu1(x) - m * mu2(x))."""
    m = Q(eps_mult)
    support = set(mu1.support()) | set(mu2.support())
    return sum((max(Q(0), mu1.prob(v) - m * mu2.prob(v)) for v in support), Q(0))


def eps_distance(eps_mult: Fraction, mu1: FinDist, mu2: FinDist,
                 cross_check: bool = True) -> Fraction:
    """Skewed distance with e**eps given as the exact rational `eps_mult`.

    When the joint support is small enough the subset brute force is run as
    an independent second computation and the two must agree exactly.
    """
    if eps_mult < 0:
        raise OracleError("eps multiplier must be nonnegative")
    val = eps_distance_pointwise(eps_mult, mu1, mu2)
    if cross_check:
        support = set(mu1.support()) | set(mu2.support())
        if len(support) <= 20:
            brute = eps_distance_subsets(eps_mult, mu1, mu2)
            if brute != val:
                raise OracleError(
                    f"distance disagreement: subsets {brute} vs pointwise {val}")
    return val


# ---------------------------------------------------------------------------
# Lifting
# ---------------------------------------------------------------------------


def _rel_holds(psi, a, b) -> bool:
    if callable(psi):
        return bool(psi(a, b))
    return (a, b) in psi


def lift_check(psi, eps_mult: Fraction, delta: Fraction,
               mu1: FinDist, mu2: FinDist):
    """Decide the approximate lifting of psi between mu1 and mu2.

    Returns (ok, witness) where the witness is the coupling as a dict
    (a, b) -> weight.  Decided by exact LP feasibility: weights for pairs in
    psi restricted to the supports, marginal domination, and both skewed
    distances between each mu_i and its witness marginal bounded by delta.
    """
    m = Q(eps_mult)
    delta = Q(delta)
    s1 = mu1.support()
    s2 = mu2.support()
    pairs = [(a, b) for a in s1 for b in s2 if _rel_holds(psi, a, b)]

    wname = {p: f"w{i}" for i, p in enumerate(pairs)}
    cons = []
    nonneg = set(wname.values())

    def marginal_terms(side, v):
        out = {}
        for (a, b), nm in wname.items():
            if (a if side == 1 else b) == v:
                out[nm] = Q(1)
        return out

    for a in s1:
        cons.append(LinCons(marginal_terms(1, a), "le", mu1.prob(a)))
    for b in s2:
        cons.append(LinCons(marginal_terms(2, b), "le", mu2.prob(b)))

    # sum_a max(0, mu1(a) - m * pi1(a)) <= delta, linearized with slack t_a
    for side, mu, sup in ((1, mu1, s1), (2, mu2, s2)):
        tnames = []
        for j, v in enumerate(sup):
            t = f"t{side}_{j}"
            tnames.append(t)
            nonneg.add(t)
            coeffs = {nm: m for nm in marginal_terms(side, v)}
            coeffs[t] = Q(1)
            # t + m * pi(v) >= mu(v)  i.e.  -t - m*pi <= -mu(v)
            cons.append(LinCons({k: -q for k, q in coeffs.items()},
                                "le", -mu.prob(v)))
        cons.append(LinCons({t: Q(1) for t in tnames}, "le", delta))

    model = feasible(cons, nonneg=nonneg, model_hint_vars=sorted(nonneg))
    if model is None:
        return False, None
    witness = {p: model.get(nm, Q(0)) for p, nm in wname.items()
               if model.get(nm, Q(0)) != 0}
    return True, witness


# ---------------------------------------------------------------------------
# Expectation
# ---------------------------------------------------------------------------


def expectation(mu: FinDist, f: Callable):
    """Sum of mu(x) * f(x); f must be total and nonnegative on the support.
    Returns a Fraction or INF."""
    total = Q(0)
    for v, p in mu.weights:
        y = f(v)
        if y is INF:
            if p > 0:
                return INF
            continue
        y = Q(y)
        if y < 0:
            raise OracleError("expectation of a negative-valued function")
        total += p * y
    return total


# ---------------------------------------------------------------------------
# Relational interpretation of types and assertions over finite fragments
# ---------------------------------------------------------------------------


@dataclass
class Fragment:
    """Finite carriers for base types, used to enumerate quantifier and
    dependent-product domains."""

    nat_max: int = 3
    reals: tuple = (Q(0), Q(1), Q(1, 2))
    list_max: int = 2

    def enumerate_simple(self, t: SimpleType):
        if isinstance(t, SUnit):
            yield UNIT
        elif isinstance(t, SBool):
            yield False
            yield True
        elif isinstance(t, SNat):
            yield from range(self.nat_max + 1)
        elif isinstance(t, (SReal, SXReal)):
            yield from self.reals
            if isinstance(t, SXReal):
                yield INF
        elif isinstance(t, SList):
            elem = list(self.enumerate_simple(t.elem))
            for n in range(self.list_max + 1):
                for combo in itertools.product(elem, repeat=n):
                    yield vlist(combo)
        elif isinstance(t, SProd):
            for a in self.enumerate_simple(t.fst):
                for b in self.enumerate_simple(t.snd):
                    yield vpair(a, b)
        else:
            raise OracleError(f"cannot enumerate {t}")


def eval_assertion(theta: dict, a: Assertion, fragment: Fragment = None,
                   preds: dict = None, exp_of: dict = None) -> bool:
    """Truth of an assertion under a valuation; quantifiers range over the
    fragment's finite carriers."""
    fragment = fragment or Fragment()
    preds = preds or {}

    def ev(x):
        return interp(theta, x)

    if isinstance(a, ATrue):
        return True
    if isinstance(a, AFalse):
        return False
    if isinstance(a, ANot):
        return not eval_assertion(theta, a.body, fragment, preds, exp_of)
    if isinstance(a, AAnd):
        return all(eval_assertion(theta, x, fragment, preds, exp_of)
                   for x in a.items)
    if isinstance(a, AOr):
        return any(eval_assertion(theta, x, fragment, preds, exp_of)
                   for x in a.items)
    if isinstance(a, AImp):
        return (not eval_assertion(theta, a.lhs, fragment, preds, exp_of)) or \
            eval_assertion(theta, a.rhs, fragment, preds, exp_of)
    if isinstance(a, AIff):
        return eval_assertion(theta, a.lhs, fragment, preds, exp_of) == \
            eval_assertion(theta, a.rhs, fragment, preds, exp_of)
    if isinstance(a, ACmp):
        va, vb = ev(a.lhs), ev(a.rhs)
        if a.op == "eq":
            return va == vb
        if a.op == "le":
            return _le(va, vb)
        return _le(va, vb) and va != vb
    if isinstance(a, APred):
        if a.name not in preds:
            raise OracleError(f"unknown predicate {a.name}")
        return bool(preds[a.name](*[ev(x) for x in a.args]))
    if isinstance(a, (AForallP, AExistsP)):
        nm = fresh_name(a.hint, {k for k, _ in theta})
        vals = fragment.enumerate_simple(a.ty)
        results = []
        for v in vals:
            t2 = dict(theta)
            t2[(nm, None)] = v
            results.append(eval_assertion(
                t2, open_plain(a.body, nm), fragment, preds, exp_of))
        return all(results) if isinstance(a, AForallP) else any(results)
    if isinstance(a, (AForallR, AExistsR)):
        nm = fresh_name(a.hint, {k for k, _ in theta})
        results = []
        for d1, d2 in enumerate_rel_pairs(theta, a.ty, fragment, preds, exp_of):
            t2 = dict(theta)
            t2[(nm, "l")] = d1
            t2[(nm, "r")] = d2
            results.append(eval_assertion(
                t2, open_rel(a.body, nm), fragment, preds, exp_of))
        return all(results) if isinstance(a, AForallR) else any(results)
    raise OracleError(f"cannot evaluate assertion {a!r}")


def enumerate_rel_pairs(theta, t: RelType, fragment: Fragment,
                        preds=None, exp_of=None):
    base = erase(t)
    for d1 in fragment.enumerate_simple(base):
        for d2 in fragment.enumerate_simple(base):
            if rel_interp_check(theta, t, (d1, d2), fragment, preds, exp_of):
                yield d1, d2


def rel_interp_check(theta: dict, t: RelType, pair, fragment: Fragment = None,
                     preds=None, exp_of=None) -> bool:
    """Membership of a value pair in the relational interpretation of t."""
    fragment = fragment or Fragment()
    d1, d2 = pair
    if isinstance(t, RBase):
        return _in_simple(d1, t.core, fragment) and _in_simple(d2, t.core, fragment)
    if isinstance(t, RRef):
        if not rel_interp_check(theta, t.base, pair, fragment, preds, exp_of):
            return False
        nm = fresh_name(t.hint, {k for k, _ in theta})
        t2 = dict(theta)
        t2[(nm, "l")] = d1
        t2[(nm, "r")] = d2
        return eval_assertion(t2, open_rel(t.phi, nm), fragment, preds, exp_of)
    if isinstance(t, RC):
        if d1 is BOTTOM and d2 is BOTTOM:
            return True
        if d1 is BOTTOM or d2 is BOTTOM:
            return False
        return rel_interp_check(theta, t.body, pair, fragment, preds, exp_of)
    if isinstance(t, RM):
        if not (isinstance(d1, FinDist) and isinstance(d2, FinDist)):
            return False
        eps_val = interp(theta, t.eps)
        delta_val = interp(theta, t.delta)
        if delta_val is INF or eps_val is INF:
            return True  # infinite budget relates everything
        mult = _eps_to_mult(eps_val, exp_of)

        def psi(a, b):
            return rel_interp_check(theta, t.body, (a, b), fragment, preds,
                                    exp_of)

        ok, _ = lift_check(psi, mult, Q(delta_val), d1, d2)
        return ok
    if isinstance(t, RPi):
        if not (callable(d1) and callable(d2)):
            return False
        nm = fresh_name(t.hint, {k for k, _ in theta})
        for a1, a2 in enumerate_rel_pairs(theta, t.dom, fragment, preds, exp_of):
            t2 = dict(theta)
            t2[(nm, "l")] = a1
            t2[(nm, "r")] = a2
            cod = open_rel(t.cod, nm)
            if not rel_interp_check(t2, cod, (d1(a1), d2(a2)), fragment,
                                    preds, exp_of):
                return False
        return True
    raise OracleError(f"cannot check membership in {t!r}")


def _eps_to_mult(eps_val, exp_of) -> Fraction:
    if eps_val == 0:
        return Q(1)
    if exp_of and eps_val in exp_of:
        return Q(exp_of[eps_val])
    raise OracleError(
        f"no exact multiplier registered for eps = {eps_val}; pass exp_of")


def _in_simple(v, t: SimpleType, fragment) -> bool:
    if isinstance(t, SUnit):
        return v is UNIT
    if isinstance(t, SBool):
        return isinstance(v, bool)
    if isinstance(t, SNat):
        return isinstance(v, int) and not isinstance(v, bool) and v >= 0
    if isinstance(t, SReal):
        return isinstance(v, (int, Fraction)) and not isinstance(v, bool)
    if isinstance(t, SXReal):
        return v is INF or (isinstance(v, (int, Fraction))
                            and not isinstance(v, bool) and v >= 0)
    if isinstance(t, SList):
        return is_vlist(v) and all(_in_simple(x, t.elem, fragment)
                                   for x in v[1:])
    if isinstance(t, SProd):
        return is_vpair(v) and _in_simple(v[1], t.fst, fragment) \
            and _in_simple(v[2], t.snd, fragment)
    if isinstance(t, (SFun,)):
        return callable(v)
    if isinstance(t, SM):
        return isinstance(v, FinDist)
    if isinstance(t, SC):
        return v is BOTTOM or _in_simple(v, t.body, fragment)
    return False


# ---------------------------------------------------------------------------
# Differential privacy check
# ---------------------------------------------------------------------------


def dp_check(f: Union[Expr, Callable], phi: Iterable, eps_mult: Fraction,
             delta: Fraction, theta=None) -> bool:
    """Certify (eps, delta) differential privacy of a finite mechanism.

    phi enumerates the related input pairs.  For every pair the two output
    distributions must be related by the lifting of equality, and must also
    satisfy the direct event-subset inequality; the two criteria are both
    checked and must agree.
    """
    theta = dict(theta or {})

    def run(v):
        if callable(f) and not isinstance(f, Expr):
            out = f(v)
        else:
            nm = fresh_name("arg", {k for k, _ in theta})
            t2 = dict(theta)
            t2[(nm, None)] = v
            out = interp(t2, App(f, FVar(nm)))
        if not isinstance(out, FinDist):
            raise OracleError("mechanism did not return a distribution")
        return out

    for v1, v2 in phi:
        mu1, mu2 = run(v1), run(v2)
        ok_lift, _ = lift_check(lambda a, b: a == b, eps_mult, delta, mu1, mu2)
        ok_dist = eps_distance(eps_mult, mu1, mu2) <= Q(delta)
        if ok_lift != ok_dist:
            raise OracleError(
                "lifting and distance criteria disagree (internal error)")
        if not ok_lift:
            return False
    return True
