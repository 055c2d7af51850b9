"""Relational refinement typechecking.

The checker is bidirectional: definitions are checked against their
top-level annotations; synthesis covers variables, applications, primitive
constants and monadic spines.  Subtyping is normalization-based: both sides
are flattened to refinements over simple types and the semantic inclusion is
emitted as one proof obligation, except that the probability and partiality
constructors are compared structurally (index weakening plus the inner
inclusion).

Case analysis tries the synchronous rule first when a probe for the
synchronicity condition is available, and otherwise falls back to the
asynchronous cross product of branches with one-sided hypotheses; mixed
branch pairings that cannot be related structurally yield a falsity
obligation, which discharges exactly when the combined hypotheses are
contradictory.

Checking produces a list of VCs: closed implications between hypotheses
harvested from the environment and a goal assertion, tagged with the rule
and source location that gave rise to them.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, List, Optional, Tuple

from .parser import (
    AssumeDecl, FactDecl, LetDecl, ParamDecl, PredDecl, SourceFile,
)
from .simple import (
    SNGuardError, SimpleTypeError, compat, sn_guard, typecheck_simple,
)
from .syntax import (
    AAnd, ACmp, AFalse, AForallP, AForallR, AIff, AImp, ALift, ANot, AOr,
    APred, ATrue, App, Assertion, BVar, BindC, BindM, BoolLit, Cons, Expr,
    FVar, If, InfLit, Lam, Let, LetRec, ListCase, NatCase, NatLit, NilLit,
    Pair, PairCase, PrimApp, RBase, RC, RM, RPi, RRef, RealLit, RelBinding,
    RelEnv, RelFact, RelType, SBool, SC, SFun, SList, SM, SNat, SProd, SReal,
    SUnit, SXReal, SimpleType, Span, UnitC, UnitLit, UnitM, _map_children,
    a_and, a_imp, close_at, erase, erase_env, embed, free_names, free_vars,
    fresh_name, open_at, open_plain, open_rel, open_rel_with_pair,
    pp_assertion, pp_expr, pp_reltype, reduce_admin, simplify_assertion,
    subst_free, subst_rel,
)

Q = Fraction


class CheckError(Exception):
    def __init__(self, msg, span=None):
        self.span = span
        super().__init__(f"{msg}" + (f" at {span}" if span else ""))


class SubtypeIncompatible(CheckError):
    pass


# ---------------------------------------------------------------------------
# Verification conditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VC:
    """A closed proof obligation.

    env holds the relational bindings and facts in scope, in order; assumes
    maps primitive names (shared by both runs) to their types.  Validity of
    `refinements(env) and facts impl goal` justifies the rule application
    recorded in the provenance fields.
    """

    env: tuple  # RelBinding | RelFact items
    goal: Assertion
    rule: str
    tag: str
    span: Optional[Span] = None
    assumes: tuple = ()  # (name, RelType) pairs

    def pretty(self) -> str:
        lines = [f"; rule {self.rule} [{self.tag}]"
                 + (f" at {self.span}" if self.span else "")]
        for it in self.env:
            if isinstance(it, RelBinding):
                lines.append(f";   {it.name} :: {pp_reltype(it.ty)}")
            else:
                lines.append(f";   fact {pp_assertion(it.phi)}")
        lines.append(f";   |- {pp_assertion(self.goal)}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Normalization: any relational type becomes {x :: simple | phi}
# ---------------------------------------------------------------------------


def normalize(t: RelType) -> RRef:
    """Equivalent refinement over the erased simple type.

    Dependent products become universally quantified implications about the
    applied function, the probabilistic constructor becomes a lifting atom,
    the partiality constructor a divergence case split, and refinements are
    flattened.  Idempotent on its own output."""
    base = erase(t)
    x = fresh_name("v", free_names(t))
    phi = simplify_assertion(_norm_phi(t, x))
    return RRef(RBase(base), close_at(phi, 0, x), hint=_hint_of(t, x))


def _norm_phi(ty: RelType, subject: str) -> Assertion:
    if isinstance(ty, RBase):
        return ATrue()
    if isinstance(ty, RRef):
        return a_and([_norm_phi(ty.base, subject),
                      open_rel(ty.phi, subject)])
    if isinstance(ty, RPi):
        arg = fresh_name(ty.hint if ty.hint != "_" else "a",
                         free_names(ty) | {subject})
        dom_n = normalize(ty.dom)
        hyp = open_rel(dom_n.phi, arg)
        cod = open_rel(ty.cod, arg)
        fl = App(FVar(subject, "l"), FVar(arg, "l"))
        fr = App(FVar(subject, "r"), FVar(arg, "r"))
        body = a_imp(hyp, normalize_open(cod, fl, fr))
        if isinstance(body, ATrue):
            return ATrue()
        return AForallR(RBase(erase(ty.dom)), close_at(body, 0, arg),
                        hint=arg)
    if isinstance(ty, RM):
        return ALift(ty.eps, ty.delta, normalize(ty.body),
                     FVar(subject, "l"), FVar(subject, "r"))
    if isinstance(ty, RC):
        inner = normalize(ty.body)
        lv = PrimApp("cval", (FVar(subject, "l"),))
        rv = PrimApp("cval", (FVar(subject, "r"),))
        both_div = AAnd((APred("divq", (FVar(subject, "l"),)),
                         APred("divq", (FVar(subject, "r"),))))
        neither = a_and([ANot(APred("divq", (FVar(subject, "l"),))),
                         ANot(APred("divq", (FVar(subject, "r"),))),
                         open_at(inner.phi, 0, {"l": lv, "r": rv})])
        return AOr((both_div, neither))
    raise CheckError(f"cannot normalize {ty!r}")


def normalize_open(ty: RelType, left: Expr, right: Expr) -> Assertion:
    """Refinement of normalize(ty) instantiated at the given side terms."""
    n = normalize(ty)
    return open_at(n.phi, 0, {"l": left, "r": right})


def _hint_of(t: RelType, default: str) -> str:
    if isinstance(t, (RRef, RPi)) and t.hint != "_":
        return t.hint
    return default


def refinement_at(ty: RelType, e1: Expr, e2: Expr) -> Assertion:
    """Normalized refinement of ty instantiated at a pair of plain
    expressions (embedded into the left/right run)."""
    n = normalize(ty)
    return simplify_assertion(open_rel_with_pair(n.phi, (e1, e2)))


def _conjuncts(a: Assertion) -> list:
    if isinstance(a, AAnd):
        out = []
        for x in a.items:
            out.extend(_conjuncts(x))
        return out
    if isinstance(a, ATrue):
        return []
    return [a]


def _sum_exprs(parts: List[Expr]) -> Expr:
    parts = [p for p in parts
             if not (isinstance(p, NatLit) and p.value == 0)
             and not (isinstance(p, RealLit) and p.value == 0)]
    if not parts:
        return NatLit(0)
    out = parts[0]
    for p in parts[1:]:
        out = PrimApp("add", (out, p))
    return out


def _has_effects(e: Expr) -> bool:
    if isinstance(e, (UnitM, BindM, UnitC, BindC, LetRec, Lam)):
        return True
    from dataclasses import fields as dc_fields
    if not hasattr(e, "__dataclass_fields__"):
        return False
    for f in dc_fields(e):
        v = getattr(e, f.name)
        if isinstance(v, Expr) and _has_effects(v):
            return True
        if isinstance(v, tuple) and any(
                isinstance(x, Expr) and _has_effects(x) for x in v):
            return True
    return False


# ---------------------------------------------------------------------------
# Checker
# ---------------------------------------------------------------------------


class Checker:
    """Checks expressions against relational types, producing VCs.

    sync_probe, when given, is called with a candidate synchronicity VC and
    returns True when it is valid; case analysis then uses the synchronous
    rule instead of the asynchronous cross product."""

    def __init__(self, assumes=None, preds=None, facts=None,
                 sync_probe: Optional[Callable[[VC], bool]] = None):
        self.assumes: dict = dict(assumes or {})
        self.preds: dict = dict(preds or {})
        self.facts: list = list(facts or [])
        self.sync_probe = sync_probe
        self._probe_cache: dict = {}

    # -- plumbing -------------------------------------------------------------

    def _fresh(self, base, env: RelEnv) -> str:
        return fresh_name(base if base != "_" else "x",
                          set(env.names()) | set(self.assumes))

    def expand_preds(self, a: Assertion) -> Assertion:
        def go(n, depth):
            if isinstance(n, APred) and n.name in self.preds:
                params, body = self.preds[n.name]
                if len(params) != len(n.args):
                    raise CheckError(f"predicate {n.name} arity mismatch")
                out = body
                for p, arg in zip(params, n.args):
                    out = subst_free(out, p, {None: arg})
                return go(out, depth)
            return _map_children(n, go, depth)

        return go(a, 0)

    def expand_preds_type(self, t: RelType) -> RelType:
        def go(n, depth):
            if isinstance(n, APred) and n.name in self.preds:
                return self.expand_preds(n)
            return _map_children(n, go, depth)

        return go(t, 0)

    def _mk_vc(self, env: RelEnv, goal: Assertion, rule: str, tag: str,
               span=None) -> List[VC]:
        goal = self.expand_preds(simplify_assertion(goal))
        if isinstance(goal, ATrue):
            return []
        items = []
        for it in env.items:
            if isinstance(it, RelBinding):
                items.append(RelBinding(it.name, self.expand_preds_type(it.ty)))
            else:
                items.append(RelFact(self.expand_preds(it.phi)))
        names = set(env.names()) | set(self.assumes)
        for label, f in self.facts:
            if free_names(f) <= names:
                items.append(RelFact(self.expand_preds(f)))
        assumes = tuple(sorted(
            (n, self.expand_preds_type(t)) for n, t in self.assumes.items()))
        return [VC(tuple(items), goal, rule, tag, span, assumes)]

    def simple_env(self, env: RelEnv) -> dict:
        out = {}
        for name, ty in self.assumes.items():
            s = erase(ty)
            out[(name, None)] = s
            out[(name, "l")] = s
            out[(name, "r")] = s
        for it in env.bindings():
            s = erase(it.ty)
            out[(it.name, None)] = s
            out[(it.name, "l")] = s
            out[(it.name, "r")] = s
        return out

    # -- subtyping -------------------------------------------------------------

    def subtype(self, env: RelEnv, t: RelType, u: RelType, tag: str,
                span=None) -> List[VC]:
        et, eu = erase(t), erase(u)
        if et != eu and not (compat(et, eu) and compat(eu, et)):
            raise SubtypeIncompatible(
                f"subtyping between different erasures: "
                f"{pp_reltype(t)} vs {pp_reltype(u)}", span)
        if t == u:
            return []
        if isinstance(t, RM) and isinstance(u, RM):
            vcs = []
            if not (t.eps == u.eps and t.delta == u.delta):
                idx = a_and([ACmp("le", t.eps, u.eps),
                             ACmp("lt", u.eps, InfLit()),
                             ACmp("le", t.delta, u.delta),
                             ACmp("lt", u.delta, InfLit())])
                vcs += self._mk_vc(env, idx, "Sub-M", tag, span)
            return vcs + self.subtype(env, t.body, u.body, tag, span)
        if isinstance(t, RC) and isinstance(u, RC):
            return self.subtype(env, t.body, u.body, tag, span)
        nt, nu = normalize(t), normalize(u)
        ct = _conjuncts(self.expand_preds(nt.phi))
        cu = _conjuncts(self.expand_preds(nu.phi))
        if all(any(c == d for d in ct) for c in cu):
            return []  # Sub-Refl / Sub-Left: target conjuncts already present
        x = self._fresh(nu.hint, env)
        inner = env.bind(x, RBase(et))
        goal = a_imp(open_rel(nt.phi, x), open_rel(nu.phi, x))
        return self._mk_vc(inner, goal, "Sub-Right", tag, span)

    # -- synthesis ---------------------------------------------------------------

    def synth(self, env: RelEnv, e: Expr, tag: str) -> Tuple[RelType, List[VC]]:
        e = reduce_admin(e)
        if isinstance(e, FVar):
            ty = env.lookup(e.name)
            if ty is None:
                ty = self.assumes.get(e.name)
            if ty is None:
                raise CheckError(f"unbound variable {e.name}", e.span)
            return ty, []
        if isinstance(e, (NatLit, RealLit, BoolLit, UnitLit, InfLit, NilLit,
                          Cons, Pair, PrimApp)):
            sty = typecheck_simple(self.simple_env(env), e)
            return self._selfify(e, sty), []
        if isinstance(e, App):
            return self._synth_app(env, e, tag)
        if isinstance(e, LetRec):
            vcs = self.check_letrec(env, e, tag)
            return e.anno, vcs
        if isinstance(e, Let):
            t1, vcs = self.synth(env, e.rhs, tag)
            x = self._fresh(e.hint, env)
            inner = env.bind(x, self._self_bind(t1, e.rhs))
            t2, vcs2 = self.synth(inner, open_plain(e.body, x), tag)
            if x in free_names(t2):
                t2 = subst_rel(t2, x, (e.rhs, e.rhs))
            return t2, vcs + vcs2
        if isinstance(e, UnitM):
            t, vcs = self.synth(env, e.arg, tag)
            return RM(NatLit(0), NatLit(0), t), vcs
        if isinstance(e, UnitC):
            t, vcs = self.synth(env, e.arg, tag)
            return RC(t), vcs
        raise CheckError(
            "cannot synthesize a type here; an annotation is required",
            getattr(e, "span", None))

    def _selfify(self, e: Expr, sty: SimpleType) -> RelType:
        x = fresh_name("s", free_names(e))
        phi = AAnd((ACmp("eq", FVar(x, "l"), embed(e, "l")),
                    ACmp("eq", FVar(x, "r"), embed(e, "r"))))
        return RRef(RBase(sty), close_at(phi, 0, x), hint=x)

    def _self_bind(self, t: RelType, rhs: Expr) -> RelType:
        """Strengthen a let binding with equational knowledge of its pure,
        base-typed right-hand side."""
        if _has_effects(rhs):
            return t
        if isinstance(t, RRef) and isinstance(t.base, RBase):
            x = fresh_name("s", free_names(rhs) | free_names(t))
            extra = AAnd((ACmp("eq", FVar(x, "l"), embed(rhs, "l")),
                          ACmp("eq", FVar(x, "r"), embed(rhs, "r"))))
            return RRef(t.base, close_at(a_and([open_rel(t.phi, x), extra]),
                                         0, x), hint=t.hint)
        if isinstance(t, RBase):
            return self._selfify(rhs, t.core)
        return t

    def _peel(self, t: RelType) -> RelType:
        while isinstance(t, RRef):
            t = t.base
        return t

    def _synth_app(self, env: RelEnv, e: App, tag: str):
        spine = []
        cur = e
        while isinstance(cur, App):
            spine.append(cur.arg)
            cur = cur.fun
        spine.reverse()
        fty, vcs = self.synth(env, cur, tag)
        i = 0
        while i < len(spine):
            fty = self._peel(fty)
            if isinstance(fty, RPi) and fty.implicit:
                fty, extra = self._solve_implicits(env, fty, spine[i], tag)
                vcs += extra
                continue
            if not isinstance(fty, RPi):
                raise CheckError("application of a non-function", e.span)
            arg = spine[i]
            vcs += self.check(env, arg, fty.dom, tag)
            fty = open_rel_with_pair(fty.cod, (arg, arg))
            i += 1
        return fty, vcs

    def _solve_implicits(self, env: RelEnv, t: RPi, next_arg: Expr, tag):
        """Solve a chain of implicit index parameters by matching the next
        explicit argument's synthesized distribution type."""
        names = []
        body: RelType = t
        while isinstance(body, RPi) and body.implicit:
            nm = self._fresh(body.hint or "i", env)
            names.append(nm)
            body = open_rel(body.cod, nm)
        body = self._peel(body)
        if not isinstance(body, RPi):
            raise CheckError("implicit parameters must precede an explicit one")
        dom = self._peel(body.dom)
        if not isinstance(dom, RM):
            raise CheckError("implicit parameters must index a "
                             "distribution-typed argument")
        arg_ty, vcs = self.synth(env, next_arg, tag)
        arg_m = self._peel(arg_ty)
        if not isinstance(arg_m, RM):
            raise CheckError("expected a distribution-typed argument")
        sol = {}
        for pat, actual in ((dom.eps, arg_m.eps), (dom.delta, arg_m.delta)):
            if isinstance(pat, FVar) and pat.name in names:
                sol.setdefault(pat.name, actual)
        out = body
        for nm in names:
            if nm not in sol:
                raise CheckError(f"could not solve implicit parameter {nm}")
            out = subst_free(out, nm,
                             {"l": sol[nm], "r": sol[nm], None: sol[nm]})
        return out, vcs

    def synth_m(self, env: RelEnv, e: Expr, tag: str):
        t, vcs = self.synth(env, e, tag)
        tp = self._peel(t)
        if not isinstance(tp, RM):
            raise CheckError("expected a probabilistic computation",
                             getattr(e, "span", None))
        return tp.eps, tp.delta, tp.body, vcs

    def synth_c(self, env: RelEnv, e: Expr, tag: str):
        t, vcs = self.synth(env, e, tag)
        tp = self._peel(t)
        if not isinstance(tp, RC):
            raise CheckError("expected a possibly-diverging computation",
                             getattr(e, "span", None))
        return tp.body, vcs

    # -- checking -----------------------------------------------------------------

    def check(self, env: RelEnv, e: Expr, t: RelType, tag: str) -> List[VC]:
        return self.check2(env, e, e, t, tag)

    def check2(self, env: RelEnv, e1: Expr, e2: Expr, t: RelType,
               tag: str) -> List[VC]:
        # closure under reduction (administrative normal form)
        r1, r2 = reduce_admin(e1), reduce_admin(e2)
        if (r1, r2) != (e1, e2):
            return self.check2(env, r1, r2, t, tag)
        span = getattr(e1, "span", None)

        if e1 == e2:
            e = e1
            if isinstance(e, (If, ListCase, NatCase)) and not isinstance(t, (RM, RC)):
                return self.check_case(
                    env, e,
                    lambda env2, b1, b2: self.check2(env2, b1, b2, t, tag),
                    tag)
            if isinstance(e, PairCase):
                return self._destructure_pair(
                    env, e,
                    lambda env2, body: self.check(env2, body, t, tag), tag)
            if isinstance(e, Let):
                t1, vcs = self.synth(env, e.rhs, tag)
                x = self._fresh(e.hint, env)
                inner = env.bind(x, self._self_bind(t1, e.rhs))
                return vcs + self.check(inner, open_plain(e.body, x), t, tag)

        if isinstance(t, RRef):
            vcs = self.check2(env, e1, e2, t.base, tag)
            goal = open_rel_with_pair(t.phi, (e1, e2))
            hyps = [refinement_at(t.base, e1, e2)]
            if isinstance(e1, LetRec) and e1.anno is not None and e1 == e2:
                hyps.append(refinement_at(e1.anno, e1, e2))
            vcs += self._mk_vc(env, a_imp(a_and(hyps), goal), "Sub-Right",
                               tag, span)
            return vcs

        if isinstance(t, RBase):
            return []  # erasure-level typing is established per declaration

        if e1 == e2:
            e = e1
            if isinstance(t, RPi):
                if isinstance(e, Lam):
                    x = self._fresh(e.hint, env)
                    inner = env.bind(x, t.dom)
                    return self.check(inner, open_plain(e.body, x),
                                      open_rel(t.cod, x), tag)
                if isinstance(e, LetRec):
                    vcs = self.check_letrec(env, e, tag)
                    return vcs + self.subtype(env, e.anno, t, tag, e.span)
                s, vcs = self.synth(env, e, tag)
                return vcs + self.subtype(env, s, t, tag, span)
            if isinstance(t, RM):
                return self.check_m(env, e, [], [], t, tag)
            if isinstance(t, RC):
                return self.check_c(env, e, t, tag)
            raise CheckError(f"cannot check against {pp_reltype(t)}", span)

        # asynchronous pairing at a structured type: descend through equal
        # constructors; otherwise emit a falsity obligation, which holds
        # exactly when the branch hypotheses are contradictory
        if isinstance(t, RC) and isinstance(e1, UnitC) and isinstance(e2, UnitC):
            return self.check2(env, e1.arg, e2.arg, t.body, tag)
        if isinstance(t, RM) and isinstance(e1, UnitM) and isinstance(e2, UnitM):
            return self.check2(env, e1.arg, e2.arg, t.body, tag)
        return self._mk_vc(env, AFalse(), "ACase-shape", tag, span)

    # -- monadic checking: per-path index accounting ------------------------------

    def check_m(self, env: RelEnv, e: Expr, eps_parts, delta_parts,
                t: RM, tag: str) -> List[VC]:
        e = reduce_admin(e)
        span = getattr(e, "span", None)
        if isinstance(e, BindM):
            eps, delta, elem, vcs = self.synth_m(env, e.rhs, tag)
            x = self._fresh(e.hint, env)
            inner = env.bind(x, elem)
            return vcs + self.check_m(inner, open_plain(e.body, x),
                                      eps_parts + [eps],
                                      delta_parts + [delta], t, tag)
        if isinstance(e, UnitM):
            vcs = self.check(env, e.arg, t.body, tag)
            return vcs + self._index_vc(env, eps_parts, delta_parts, t, tag,
                                        span)
        if isinstance(e, Let):
            t1, vcs = self.synth(env, e.rhs, tag)
            x = self._fresh(e.hint, env)
            inner = env.bind(x, self._self_bind(t1, e.rhs))
            return vcs + self.check_m(inner, open_plain(e.body, x), eps_parts,
                                      delta_parts, t, tag)
        if isinstance(e, PairCase):
            return self._destructure_pair(
                env, e, lambda env2, body: self.check_m(
                    env2, body, eps_parts, delta_parts, t, tag), tag)
        if isinstance(e, (If, ListCase, NatCase)):
            def k(env2, b1, b2):
                if b1 == b2:
                    return self.check_m(env2, b1, eps_parts, delta_parts, t, tag)
                return self.check2(env2, b1, b2, t, tag)
            return self.check_case(env, e, k, tag)
        eps, delta, elem, vcs = self.synth_m(env, e, tag)
        vcs += self.subtype(env, elem, t.body, tag, span)
        return vcs + self._index_vc(env, eps_parts + [eps],
                                    delta_parts + [delta], t, tag, span)

    def _index_vc(self, env, eps_parts, delta_parts, t: RM, tag, span):
        senv = self.simple_env(env)
        for idx in (t.eps, t.delta):
            sty = typecheck_simple(senv, idx)
            if not compat(sty, SXReal()):
                raise CheckError(
                    "monad index is not a nonnegative extended real", span)
        eps_sum = _sum_exprs(eps_parts)
        delta_sum = _sum_exprs(delta_parts)
        conj = []
        if eps_sum != t.eps:
            conj.append(ACmp("le", eps_sum, t.eps))
        if not isinstance(t.eps, (NatLit, RealLit)):
            conj.append(ACmp("lt", t.eps, InfLit()))
        if delta_sum != t.delta:
            conj.append(ACmp("le", delta_sum, t.delta))
        if not isinstance(t.delta, (NatLit, RealLit)):
            conj.append(ACmp("lt", t.delta, InfLit()))
        return self._mk_vc(env, a_and(conj), "BindM-index", tag, span)

    def check_c(self, env: RelEnv, e: Expr, t: RC, tag: str) -> List[VC]:
        e = reduce_admin(e)
        span = getattr(e, "span", None)
        if isinstance(e, UnitC):
            return self.check(env, e.arg, t.body, tag)
        if isinstance(e, BindC):
            elem, vcs = self.synth_c(env, e.rhs, tag)
            x = self._fresh(e.hint, env)
            inner = env.bind(x, elem)
            return vcs + self.check_c(inner, open_plain(e.body, x), t, tag)
        if isinstance(e, Let):
            t1, vcs = self.synth(env, e.rhs, tag)
            x = self._fresh(e.hint, env)
            inner = env.bind(x, self._self_bind(t1, e.rhs))
            return vcs + self.check_c(inner, open_plain(e.body, x), t, tag)
        if isinstance(e, PairCase):
            return self._destructure_pair(
                env, e,
                lambda env2, body: self.check_c(env2, body, t, tag), tag)
        if isinstance(e, (If, ListCase, NatCase)):
            def k(env2, b1, b2):
                if b1 == b2:
                    return self.check_c(env2, b1, t, tag)
                return self.check2(env2, b1, b2, t, tag)
            return self.check_case(env, e, k, tag)
        elem, vcs = self.synth_c(env, e, tag)
        return vcs + self.subtype(env, elem, t.body, tag, span)

    def _destructure_pair(self, env, e: PairCase, k, tag):
        sty = typecheck_simple(self.simple_env(env), e.scrut)
        if not isinstance(sty, SProd):
            raise CheckError("pair destructuring of a non-pair", e.span)
        a = self._fresh(e.ahint, env)
        env2 = env.bind(a, RBase(sty.fst))
        b = self._fresh(e.bhint, env2)
        env2 = env2.bind(b, RBase(sty.snd))
        for nm, proj in ((a, "fst"), (b, "snd")):
            for side in ("l", "r"):
                env2 = env2.fact(ACmp(
                    "eq", FVar(nm, side),
                    PrimApp(proj, (embed(e.scrut, side),))))
        body = open_at(open_at(e.body, 1, {None: FVar(a)}), 0, {None: FVar(b)})
        return k(env2, body)

    # -- case analysis -------------------------------------------------------------

    def check_case(self, env: RelEnv, e, branch_k, tag: str,
                   mode: Optional[str] = None) -> List[VC]:
        """If / list-case / nat-case, synchronous or asynchronous.

        branch_k(env2, left_body, right_body) produces the VCs of one branch
        pairing.  mode forces "sync" or "async"; by default the synchronicity
        condition is probed when a probe is available."""
        scrut = e.cond if isinstance(e, If) else e.scrut
        sl, sr = embed(scrut, "l"), embed(scrut, "r")
        span = getattr(e, "span", None)

        if isinstance(e, If):
            sync_goal = AIff(ACmp("eq", sl, BoolLit(True)),
                             ACmp("eq", sr, BoolLit(True)))
        elif isinstance(e, ListCase):
            sync_goal = AIff(ACmp("eq", sl, NilLit()),
                             ACmp("eq", sr, NilLit()))
        else:
            sync_goal = AIff(ACmp("eq", sl, NatLit(0)),
                             ACmp("eq", sr, NatLit(0)))
        sync_vcs = self._mk_vc(env, sync_goal, "Case-sync", tag, span)

        if mode is None:
            if self.sync_probe is not None and sync_vcs:
                key = (sync_vcs[0].env, sync_vcs[0].goal)
                if key not in self._probe_cache:
                    self._probe_cache[key] = bool(self.sync_probe(sync_vcs[0]))
                mode = "sync" if self._probe_cache[key] else "async"
            else:
                mode = "async"

        elem_core = None
        if isinstance(e, ListCase):
            sty = typecheck_simple(self.simple_env(env), scrut)
            elem_core = sty.elem if isinstance(sty, SList) and sty.elem \
                else SReal()

        def lit_fact(side, which):
            s = sl if side == "l" else sr
            if isinstance(e, If):
                return ACmp("eq", s, BoolLit(which == 0))
            if isinstance(e, ListCase):
                return ACmp("eq", s, NilLit())
            return ACmp("eq", s, NatLit(0))

        def bind_pattern(env2, prefix=""):
            """Bind the cons/succ pattern variables; returns
            (env3, fact(side), body_opener)."""
            if isinstance(e, ListCase):
                h = self._fresh(prefix + e.hhint, env2)
                env3 = env2.bind(h, RBase(elem_core))
                tl = self._fresh(prefix + e.thint, env3)
                env3 = env3.bind(tl, RBase(SList(elem_core)))

                def fact(side):
                    s = sl if side == "l" else sr
                    return ACmp("eq", s, Cons(FVar(h, side), FVar(tl, side)))

                body = open_at(open_at(e.cons_branch, 1, {None: FVar(h)}),
                               0, {None: FVar(tl)})
                return env3, fact, body
            p = self._fresh(prefix + e.phint, env2)
            env3 = env2.bind(p, RBase(SNat()))

            def fact(side):
                s = sl if side == "l" else sr
                return ACmp("eq", s, PrimApp("add", (FVar(p, side), NatLit(1))))

            return env3, fact, open_plain(e.succ_branch, p)

        first_body = e.then if isinstance(e, If) else (
            e.nil_branch if isinstance(e, ListCase) else e.zero_branch)
        second_is_pattern = not isinstance(e, If)

        out: List[VC] = []
        if mode == "sync":
            out += sync_vcs
            env0 = env.fact(lit_fact("l", 0)).fact(lit_fact("r", 0))
            out += branch_k(env0, first_body, first_body)
            if second_is_pattern:
                env1, fact, body = bind_pattern(env)
                env1 = env1.fact(fact("l")).fact(fact("r"))
                out += branch_k(env1, body, body)
            else:
                env1 = env.fact(lit_fact("l", 1)).fact(lit_fact("r", 1))
                out += branch_k(env1, e.els, e.els)
            return out

        # asynchronous cross product
        def sides(side, env2, prefix):
            """[(env3, body)] for each branch on one side."""
            entries = []
            env_f = env2.fact(lit_fact(side, 0))
            entries.append((env_f, first_body))
            if second_is_pattern:
                env3, fact, body = bind_pattern(env2, prefix)
                entries.append((env3.fact(fact(side)), body))
            else:
                entries.append((env2.fact(lit_fact(side, 1)), e.els))
            return entries

        for li in range(2):
            env_l_entries = sides("l", env, "")
            env_l, body_l = env_l_entries[li]
            for ri in range(2):
                env_r_entries = sides("r", env_l, "r_")
                env_r, body_r = env_r_entries[ri]
                out += branch_k(env_r, body_l, body_r)
        return out

    # -- recursion -------------------------------------------------------------

    def check_letrec(self, env: RelEnv, e: LetRec, tag: str) -> List[VC]:
        if e.anno is None:
            raise CheckError("recursive definition requires an annotation",
                             e.span)
        if e.sn:
            sn_guard(e)
        f = self._fresh(e.fhint, env)
        inner = env.bind(f, e.anno)
        lam = Lam(open_at(e.body, 1, {None: FVar(f)}), hint=e.xhint,
                  span=e.span)
        return self.check(inner, lam, e.anno, tag)


# ---------------------------------------------------------------------------
# Whole-file checking
# ---------------------------------------------------------------------------


@dataclass
class DeclResult:
    name: str
    vcs: List[VC] = field(default_factory=list)


def check_program(source: SourceFile, prelude: Optional[SourceFile] = None,
                  sync_probe=None) -> List[DeclResult]:
    """Check every declaration of a file, threading earlier declarations
    (and the prelude's assumptions, parameters, facts and predicates) into
    the environment.  Returns per-declaration VC sets."""
    assumes, preds, facts, params = {}, {}, [], []
    for sf in ([prelude] if prelude else []) + [source]:
        for d in sf.decls:
            if isinstance(d, AssumeDecl):
                assumes[d.name] = d.ty
            elif isinstance(d, PredDecl):
                preds[d.name] = (d.params, d.body)
            elif isinstance(d, FactDecl):
                facts.append((d.label, d.phi))
            elif isinstance(d, ParamDecl):
                params.append(d)

    checker = Checker(assumes, preds, facts, sync_probe)
    env = RelEnv()
    for p in params:
        env = env.bind(p.name, p.ty)

    results = []
    for d in source.decls:
        if not isinstance(d, LetDecl):
            continue
        res = DeclResult(d.name)
        expr = reduce_admin(d.expr) if (d.reduce_left or d.reduce_right) \
            else d.expr
        senv = checker.simple_env(env)
        try:
            if d.anno is not None:
                typecheck_simple(senv, expr, erase(d.anno))
                res.vcs = checker.check(env, expr, d.anno, d.name)
                env = env.bind(d.name, d.anno)
            else:
                typecheck_simple(senv, expr)
                ty, vcs = checker.synth(env, expr, d.name)
                res.vcs = vcs
                env = env.bind(d.name, ty)
        except (SimpleTypeError, CheckError) as ex:
            if isinstance(ex, CheckError) and ex.args and \
                    str(ex).startswith(f"in {d.name}:"):
                raise
            raise CheckError(f"in {d.name}: {ex}", d.span) from ex
        results.append(res)
    return results
