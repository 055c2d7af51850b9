"""Erasure-level (simple) typechecking and the SN termination guard.

Simple typing is bidirectional: lambdas and nil literals need an expected
type, everything else synthesizes.  Numeric widening nat <= real <= xreal is
allowed at applications, joins and annotations; list element types may be
temporarily undetermined (empty literal) and are resolved by joins.
"""

from __future__ import annotations

from typing import Optional

from .syntax import (
    App, BVar, BindC, BindM, BoolLit, Cons, Expr, FVar, If, InfLit, Lam, Let,
    LetRec, ListCase, NatCase, NatLit, NilLit, Pair, PairCase, PrimApp,
    RealLit, SBool, SC, SFun, SList, SM, SNat, SProd, SReal, SUnit, SXReal,
    SimpleType, UnitC, UnitLit, UnitM, erase, fresh_name, free_names,
    open_plain, open_at,
)


class SimpleTypeError(Exception):
    def __init__(self, msg, span=None):
        self.span = span
        super().__init__(f"{msg}" + (f" at {span}" if span else ""))


class SNGuardError(SimpleTypeError):
    pass


_NUMERIC = (SNat, SReal, SXReal)


def is_numeric(t) -> bool:
    return isinstance(t, _NUMERIC)


def compat(sub: Optional[SimpleType], sup: Optional[SimpleType]) -> bool:
    """Structural compatibility with numeric widening and undetermined list
    elements (None)."""
    if sub is None or sup is None:
        return True
    if type(sub) is type(sup):
        if isinstance(sub, SList):
            return compat(sub.elem, sup.elem) and compat(sup.elem, sub.elem) \
                or compat(sub.elem, sup.elem)
        if isinstance(sub, SProd):
            return compat(sub.fst, sup.fst) and compat(sub.snd, sup.snd)
        if isinstance(sub, SFun):
            return compat(sup.dom, sub.dom) and compat(sub.cod, sup.cod)
        if isinstance(sub, (SM, SC)):
            return compat(sub.body, sup.body)
        return True
    if isinstance(sub, SNat) and isinstance(sup, (SReal, SXReal)):
        return True
    if isinstance(sub, SReal) and isinstance(sup, SXReal):
        return True
    return False


def join(a: Optional[SimpleType], b: Optional[SimpleType], span=None):
    if a is None:
        return b
    if b is None:
        return a
    if compat(a, b) and compat(b, a):
        # identical up to undetermined elements: prefer the more determined
        if isinstance(a, SList):
            return SList(join(a.elem, b.elem, span))
        return a
    if compat(a, b):
        return b
    if compat(b, a):
        return a
    if isinstance(a, SList) and isinstance(b, SList):
        return SList(join(a.elem, b.elem, span))
    raise SimpleTypeError(f"incompatible types {a} and {b}", span)


def _prim_type(op, args, span, synth):
    ts = [synth(a) for a in args]
    if op in ("add", "sub", "mul", "max", "min"):
        a, b = ts
        if not (is_numeric(a) and is_numeric(b)):
            raise SimpleTypeError(f"{op} expects numeric operands", span)
        return join(a, b, span)
    if op == "div":
        a, b = ts
        if not (is_numeric(a) and is_numeric(b)):
            raise SimpleTypeError("div expects numeric operands", span)
        return SXReal() if isinstance(join(a, b, span), SXReal) else SReal()
    if op in ("neg",):
        return SReal()
    if op == "abs":
        (a,) = ts
        if not is_numeric(a):
            raise SimpleTypeError("abs expects a numeric operand", span)
        return a
    if op == "pow":
        a, b = ts
        if not (is_numeric(a) and isinstance(b, SNat)):
            raise SimpleTypeError("pow expects numeric base and nat exponent", span)
        return a
    if op in ("log", "exp"):
        (a,) = ts
        if not is_numeric(a):
            raise SimpleTypeError(f"{op} expects a numeric operand", span)
        return SReal()
    if op == "size":
        (a,) = ts
        if not isinstance(a, SList):
            raise SimpleTypeError("sz expects a list", span)
        return SNat()
    if op == "nth":
        a, b = ts
        if not isinstance(a, SNat) or not isinstance(b, SList):
            raise SimpleTypeError("nth expects an index and a list", span)
        return b.elem if b.elem is not None else SReal()
    if op == "append":
        a, b = ts
        if not (isinstance(a, SList) and isinstance(b, SList)):
            raise SimpleTypeError("++ expects lists", span)
        return join(a, b, span)
    if op == "fst":
        (a,) = ts
        if not isinstance(a, SProd):
            raise SimpleTypeError("fst expects a pair", span)
        return a.fst
    if op == "snd":
        (a,) = ts
        if not isinstance(a, SProd):
            raise SimpleTypeError("snd expects a pair", span)
        return a.snd
    if op in ("lt", "le", "gt", "ge"):
        a, b = ts
        if not (is_numeric(a) and is_numeric(b)):
            raise SimpleTypeError("comparison expects numeric operands", span)
        return SBool()
    if op in ("eq", "ne"):
        a, b = ts
        if not (compat(a, b) or compat(b, a)):
            raise SimpleTypeError(f"cannot compare {a} and {b}", span)
        return SBool()
    raise SimpleTypeError(f"unknown primitive {op}", span)


def typecheck_simple(env: dict, e: Expr, expected: Optional[SimpleType] = None,
                     fuelled_names=None) -> SimpleType:
    """Check or synthesize the simple type of `e`.

    env maps (name, side) to SimpleType; plain program variables use side
    None.  If `expected` is given the expression is checked against it
    (required for lambdas and useful for nil literals).
    """

    def synth(x, exp=None):
        return typecheck_simple(env, x, exp)

    def check_result(t, span):
        if expected is not None and not compat(t, expected):
            raise SimpleTypeError(f"expected {expected}, found {t}", span)
        return t if expected is None else expected

    if isinstance(e, FVar):
        key = (e.name, e.side)
        if key not in env:
            raise SimpleTypeError(f"unbound variable {e.name}"
                                  + (f"<{e.side}>" if e.side else ""), e.span)
        return check_result(env[key], e.span)
    if isinstance(e, BVar):
        raise SimpleTypeError("dangling bound variable (internal)", e.span)
    if isinstance(e, NatLit):
        return check_result(SNat(), e.span)
    if isinstance(e, RealLit):
        return check_result(SReal(), e.span)
    if isinstance(e, InfLit):
        return check_result(SXReal(), e.span)
    if isinstance(e, UnitLit):
        return check_result(SUnit(), e.span)
    if isinstance(e, BoolLit):
        return check_result(SBool(), e.span)
    if isinstance(e, NilLit):
        if isinstance(expected, SList):
            return expected
        return check_result(SList(None), e.span)
    if isinstance(e, Cons):
        te = None
        tl = SList(None)
        te = synth(e.head)
        tl = synth(e.tail)
        if not isinstance(tl, SList):
            raise SimpleTypeError("cons onto a non-list", e.span)
        return check_result(SList(join(te, tl.elem, e.span)), e.span)
    if isinstance(e, Pair):
        if isinstance(expected, SProd):
            a = synth(e.fst, expected.fst)
            b = synth(e.snd, expected.snd)
            return SProd(a, b)
        return check_result(SProd(synth(e.fst), synth(e.snd)), e.span)
    if isinstance(e, App):
        tf = synth(e.fun)
        if not isinstance(tf, SFun):
            raise SimpleTypeError(f"applying a non-function of type {tf}", e.span)
        synth(e.arg, tf.dom)
        return check_result(tf.cod, e.span)
    if isinstance(e, PrimApp):
        return check_result(_prim_type(e.op, e.args, e.span, synth), e.span)
    if isinstance(e, Lam):
        if not isinstance(expected, SFun):
            raise SimpleTypeError("cannot synthesize a lambda without an "
                                  "expected function type", e.span)
        x = fresh_name(e.hint, set(n for n, _ in env))
        body = open_plain(e.body, x)
        inner = dict(env)
        inner[(x, None)] = expected.dom
        typecheck_simple(inner, body, expected.cod)
        return expected
    if isinstance(e, Let):
        t1 = synth(e.rhs)
        x = fresh_name(e.hint, set(n for n, _ in env))
        inner = dict(env)
        inner[(x, None)] = t1
        return typecheck_simple(inner, open_plain(e.body, x), expected)
    if isinstance(e, LetRec):
        if e.anno is None:
            raise SimpleTypeError("recursive definition requires an annotation",
                                  e.span)
        ty = erase(e.anno)
        if not isinstance(ty, SFun):
            raise SimpleTypeError("recursive definition must have function type",
                                  e.span)
        if e.sn:
            sn_guard(e)
        else:
            if not _pointed(ty.cod):
                raise SimpleTypeError(
                    "general recursion requires a result in the partiality "
                    "monad", e.span)
        avoid = set(n for n, _ in env)
        f = fresh_name(e.fhint, avoid)
        x = fresh_name(e.xhint, avoid | {f})
        body = open_at(open_at(e.body, 1, {None: FVar(f)}), 0, {None: FVar(x)})
        inner = dict(env)
        inner[(f, None)] = ty
        inner[(x, None)] = ty.dom
        typecheck_simple(inner, body, ty.cod)
        return check_result(ty, e.span)
    if isinstance(e, If):
        synth(e.cond, SBool())
        t1 = typecheck_simple(env, e.then, expected)
        t2 = typecheck_simple(env, e.els, expected)
        return check_result(join(t1, t2, e.span), e.span)
    if isinstance(e, ListCase):
        ts = synth(e.scrut)
        if not isinstance(ts, SList):
            raise SimpleTypeError("match scrutinee is not a list", e.span)
        t1 = typecheck_simple(env, e.nil_branch, expected)
        avoid = set(n for n, _ in env)
        h = fresh_name(e.hhint, avoid)
        t = fresh_name(e.thint, avoid | {h})
        body = open_at(open_at(e.cons_branch, 1, {None: FVar(h)}),
                       0, {None: FVar(t)})
        inner = dict(env)
        inner[(h, None)] = ts.elem if ts.elem is not None else SReal()
        inner[(t, None)] = ts
        t2 = typecheck_simple(inner, body, expected)
        return check_result(join(t1, t2, e.span), e.span)
    if isinstance(e, NatCase):
        synth(e.scrut, SNat())
        t1 = typecheck_simple(env, e.zero_branch, expected)
        p = fresh_name(e.phint, set(n for n, _ in env))
        inner = dict(env)
        inner[(p, None)] = SNat()
        t2 = typecheck_simple(inner, open_plain(e.succ_branch, p), expected)
        return check_result(join(t1, t2, e.span), e.span)
    if isinstance(e, PairCase):
        ts = synth(e.scrut)
        if not isinstance(ts, SProd):
            raise SimpleTypeError("pair destructuring of a non-pair", e.span)
        avoid = set(n for n, _ in env)
        a = fresh_name(e.ahint, avoid)
        b = fresh_name(e.bhint, avoid | {a})
        body = open_at(open_at(e.body, 1, {None: FVar(a)}), 0, {None: FVar(b)})
        inner = dict(env)
        inner[(a, None)] = ts.fst
        inner[(b, None)] = ts.snd
        return typecheck_simple(inner, body, expected)
    if isinstance(e, UnitC):
        if isinstance(expected, SC):
            synth(e.arg, expected.body)
            return expected
        return check_result(SC(synth(e.arg)), e.span)
    if isinstance(e, UnitM):
        if isinstance(expected, SM):
            synth(e.arg, expected.body)
            return expected
        return check_result(SM(synth(e.arg)), e.span)
    if isinstance(e, (BindC, BindM)):
        mono = SC if isinstance(e, BindC) else SM
        t1 = synth(e.rhs)
        if not isinstance(t1, mono):
            raise SimpleTypeError(
                f"{'clet' if mono is SC else 'mlet'} of a non-monadic "
                f"expression of type {t1}", e.span)
        x = fresh_name(e.hint, set(n for n, _ in env))
        inner = dict(env)
        inner[(x, None)] = t1.body if t1.body is not None else SReal()
        t2 = typecheck_simple(inner, open_plain(e.body, x), expected)
        if not isinstance(t2, mono):
            raise SimpleTypeError("monadic bind body must stay in the monad",
                                  e.span)
        return check_result(t2, e.span)
    raise SimpleTypeError(f"cannot type {e!r}", getattr(e, "span", None))


def _pointed(t: SimpleType) -> bool:
    """Result types a general fixpoint may live at: C[..] possibly under
    further arguments."""
    if isinstance(t, SC):
        return True
    if isinstance(t, SFun):
        return _pointed(t.cod)
    return False


# ---------------------------------------------------------------------------
# SN termination guard
# ---------------------------------------------------------------------------


class GuardFailure:
    def __init__(self, reason, span=None):
        self.reason = reason
        self.span = span

    def __bool__(self):
        return False

    def __str__(self):
        return self.reason + (f" at {self.span}" if self.span else "")


def sn_guard(letrec: LetRec, raise_on_fail=True):
    """Syntactic structural descent on the designated (first) argument.

    Passes iff every occurrence of the recursive name heads an application
    whose first argument is a strict structural piece of the argument: a tail
    reached by list matching on the argument (or a piece of it), or a
    predecessor from nat matching.
    """
    avoid = free_names(letrec.body)
    f = fresh_name(letrec.fhint or "f", avoid)
    x = fresh_name(letrec.xhint or "x", avoid | {f})
    body = open_at(open_at(letrec.body, 1, {None: FVar(f)}), 0, {None: FVar(x)})

    failure = []

    def walk(e, pieces, strict):
        # pieces: names structurally below-or-equal x; strict: strictly below
        if isinstance(e, FVar):
            if e.name == f:
                failure.append(GuardFailure(
                    "recursive name escapes application position", e.span))
            return
        if isinstance(e, App):
            spine = []
            cur = e
            while isinstance(cur, App):
                spine.append(cur.arg)
                cur = cur.fun
            spine.reverse()
            if isinstance(cur, FVar) and cur.name == f:
                first = spine[0]
                if not (isinstance(first, FVar) and first.name in strict):
                    failure.append(GuardFailure(
                        "recursive call is not on a strict structural piece "
                        "of the argument", e.span))
                for a in spine[1:]:
                    walk(a, pieces, strict)
                return
            walk(cur, pieces, strict)
            for a in spine:
                walk(a, pieces, strict)
            return
        if isinstance(e, ListCase):
            walk(e.scrut, pieces, strict)
            walk(e.nil_branch, pieces, strict)
            av = pieces | strict | {f, x}
            h = fresh_name("h", av)
            t = fresh_name("t", av | {h})
            opened = open_at(open_at(e.cons_branch, 1, {None: FVar(h)}),
                             0, {None: FVar(t)})
            if isinstance(e.scrut, FVar) and (e.scrut.name == x
                                              or e.scrut.name in pieces
                                              or e.scrut.name in strict):
                walk(opened, pieces | {t}, strict | {t})
            else:
                walk(opened, pieces, strict)
            return
        if isinstance(e, NatCase):
            walk(e.scrut, pieces, strict)
            walk(e.zero_branch, pieces, strict)
            av = pieces | strict | {f, x}
            p = fresh_name("p", av)
            opened = open_plain(e.succ_branch, p)
            if isinstance(e.scrut, FVar) and (e.scrut.name == x
                                              or e.scrut.name in pieces
                                              or e.scrut.name in strict):
                walk(opened, pieces | {p}, strict | {p})
            else:
                walk(opened, pieces, strict)
            return
        # generic: open binders with fresh names and recurse
        from .syntax import _BINDING_DEPTH, _map_children  # local idiom

        binder_info = _BINDING_DEPTH.get(type(e), {})
        from dataclasses import fields as dc_fields
        for fld in dc_fields(e) if hasattr(e, "__dataclass_fields__") else []:
            v = getattr(e, fld.name)
            if isinstance(v, Expr):
                nb = binder_info.get(fld.name, 0)
                opened = v
                av = pieces | strict | {f, x}
                for k in range(nb - 1, -1, -1):
                    nm = fresh_name("v", av)
                    av = av | {nm}
                    opened = open_at(opened, k, {None: FVar(nm)})
                walk(opened, pieces, strict)

    walk(body, {x}, set())
    if failure:
        if raise_on_fail:
            raise SNGuardError(f"termination guard failed: {failure[0]}")
        return failure[0]
    return True
