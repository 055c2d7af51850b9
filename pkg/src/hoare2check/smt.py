"""Encoding of verification conditions into SMT-LIB 2 and solver driving.

Doubled variables x<l>/x<r> become constants x!l / x!r; primitive constants
shared by both runs stay single.  Naturals are Int with nonnegativity
assertions, extended nonnegative reals are (Bool, Real) pairs with
lexicographic order and guarded arithmetic, lists and products are
uninterpreted sorts with an axiomatized size/constructor theory, functions
are uninterpreted sorts with explicit application operators.

Scripts are deterministic text: identical VCs give byte-identical scripts.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .relcheck import VC, normalize
from .simple import SimpleTypeError, typecheck_simple
from .syntax import (
    AAnd, ACmp, AExistsP, AExistsR, AFalse, AForallP, AForallR, AIff, AImp,
    ALift, ANot, AOr, APred, ATrue, App, Assertion, BVar, BoolLit, Cons,
    Expr, FVar, If, InfLit, NatLit, NilLit, Pair, PrimApp, RBase, RelBinding,
    RelFact, RelType, RealLit, SBool, SC, SFun, SList, SM, SNat, SProd,
    SReal, SUnit, SXReal, SimpleType, UnitLit, erase, free_names, fresh_name,
    open_plain, open_rel, pp_assertion,
)

Q = Fraction


class EncodeError(Exception):
    def __init__(self, msg, vc: Optional[VC] = None):
        self.vc = vc
        prov = f" [{vc.rule} {vc.tag}" + (f" at {vc.span}]" if vc and vc.span
                                          else "]") if vc else ""
        super().__init__(msg + prov)


@dataclass(frozen=True)
class SmtScript:
    text: str
    vc: VC


@dataclass(frozen=True)
class SolverVerdict:
    status: str  # "valid" | "invalid" | "unknown"
    seconds: float
    model: str = ""
    detail: str = ""


# ---------------------------------------------------------------------------
# Sort plumbing
# ---------------------------------------------------------------------------


def mangle(t: SimpleType) -> str:
    if isinstance(t, SUnit):
        return "Unt"
    if isinstance(t, SBool):
        return "Bool"
    if isinstance(t, SNat):
        return "Int"
    if isinstance(t, SReal):
        return "Real"
    if isinstance(t, SXReal):
        return "XR"
    if isinstance(t, SList):
        return "L" + mangle(t.elem if t.elem is not None else SReal())
    if isinstance(t, SProd):
        return "P" + mangle(t.fst) + "_" + mangle(t.snd) + "_"
    if isinstance(t, SFun):
        return "F" + mangle(t.dom) + "_" + mangle(t.cod) + "_"
    if isinstance(t, SM):
        return "D" + mangle(t.body)
    if isinstance(t, SC):
        return "K" + mangle(t.body)
    raise EncodeError(f"cannot mangle {t}")


def fields_of(t: SimpleType) -> List[Tuple[str, str]]:
    """(suffix, smt sort) per scalar component of the encoding of t."""
    if isinstance(t, SUnit):
        return [("", "Unt")]
    if isinstance(t, SBool):
        return [("", "Bool")]
    if isinstance(t, SNat):
        return [("", "Int")]
    if isinstance(t, SReal):
        return [("", "Real")]
    if isinstance(t, SXReal):
        return [("!inf", "Bool"), ("!val", "Real")]
    if isinstance(t, (SList, SProd, SFun, SM, SC)):
        return [("", mangle(t))]
    raise EncodeError(f"no field layout for {t}")


@dataclass
class Vec:
    """Encoded expression: one SMT term per field, plus its simple type."""

    ty: SimpleType
    parts: List[str]

    @property
    def one(self) -> str:
        assert len(self.parts) == 1, f"expected scalar, got {self.ty}"
        return self.parts[0]


def _num(v: Fraction, sort: str) -> str:
    v = Q(v)
    if sort == "Int":
        return str(v.numerator) if v >= 0 else f"(- {-v.numerator})"
    if v.denominator == 1:
        s = f"{abs(v.numerator)}.0"
    else:
        s = f"(/ {abs(v.numerator)}.0 {v.denominator}.0)"
    return s if v >= 0 else f"(- {s})"


class Encoder:
    def __init__(self, vc: VC):
        self.vc = vc
        self.sorts: List[str] = []
        self.decls: List[str] = []
        self.axioms: List[str] = []  # theory axioms (lists, pow, log/exp)
        self.hyps: List[str] = []
        self._declared = set()
        self._sort_seen = set()
        self._axiom_keys = set()
        self._lift_preds: Dict[str, str] = {}
        self.tyenv: Dict[tuple, SimpleType] = {}
        self.assume_names = {n for n, _ in vc.assumes}
        self._locals = set()  # quantifier-bound names, not declared

    # -- declarations -----------------------------------------------------------

    def _sort(self, name: str):
        if name not in ("Bool", "Int", "Real") and name not in self._sort_seen:
            self._sort_seen.add(name)
            self.sorts.append(f"(declare-sort {name} 0)")

    def _declare(self, name: str, argsorts: List[str], result: str):
        if name in self._declared:
            return
        self._declared.add(name)
        for s in argsorts + [result]:
            self._sort(s)
        args = " ".join(argsorts)
        self.decls.append(f"(declare-fun {name} ({args}) {result})")

    def _const_vec(self, base: str, t: SimpleType) -> Vec:
        parts = []
        for suf, srt in fields_of(t):
            nm = base + suf
            self._declare(nm, [], srt)
            parts.append(nm)
        return Vec(t, parts)

    # -- variables ---------------------------------------------------------------

    def var_vec(self, name: str, side: Optional[str]) -> Vec:
        if name in self.assume_names:
            t = self.tyenv[(name, None)]
            return self._const_vec(f"c!{name}", t)
        key = (name, side)
        if key not in self.tyenv:
            raise EncodeError(f"variable {name}<{side}> not in scope", self.vc)
        t = self.tyenv[key]
        if name in self._locals:
            return Vec(t, self.var_parts(name, side, t))
        tag = {"l": "l", "r": "r", None: "p"}[side]
        return self._const_vec(f"{name}!{tag}", t)

    def bind_sort_guards(self, name: str, side: Optional[str], t: SimpleType):
        v = self.var_vec(name, side)
        if isinstance(t, SNat):
            self.hyps.append(f"(assert (>= {v.one} 0))")
            self.hyps.append(f"(assert (or (= {v.one} 0) (>= {v.one} 1)))")
        if isinstance(t, SXReal):
            self.hyps.append(f"(assert (>= {v.parts[1]} 0.0))")

    # -- theory axiom packs --------------------------------------------------------

    def _list_ops(self, lt: SList):
        key = "list:" + mangle(lt)
        ls = mangle(lt)
        elem = lt.elem if lt.elem is not None else SReal()
        ef = fields_of(elem)
        if len(ef) != 1:
            raise EncodeError(f"list elements of type {elem} are not "
                              "encodable", self.vc)
        es = ef[0][1]
        names = {
            "nil": f"nil!{ls}", "cons": f"cons!{ls}", "sz": f"sz!{ls}",
            "nth": f"nth!{ls}", "app": f"app!{ls}",
        }
        if key in self._axiom_keys:
            return names
        self._axiom_keys.add(key)
        self._declare(names["nil"], [], ls)
        self._declare(names["cons"], [es, ls], ls)
        self._declare(names["sz"], [ls], "Int")
        self._declare(names["nth"], ["Int", ls], es)
        self._declare(names["app"], [ls, ls], ls)
        nil, cons, sz, app = names["nil"], names["cons"], names["sz"], names["app"]
        ax = [
            f"(assert (= ({sz} {nil}) 0))",
            f"(assert (forall ((l {ls})) (>= ({sz} l) 0)))",
            f"(assert (forall ((h {es}) (t {ls})) "
            f"(= ({sz} ({cons} h t)) (+ 1 ({sz} t)))))",
            f"(assert (forall ((l {ls})) (=> (= ({sz} l) 0) (= l {nil}))))",
            f"(assert (forall ((h {es}) (t {ls})) "
            f"(not (= ({cons} h t) {nil}))))",
            f"(assert (forall ((h1 {es}) (t1 {ls}) (h2 {es}) (t2 {ls})) "
            f"(=> (= ({cons} h1 t1) ({cons} h2 t2)) "
            f"(and (= h1 h2) (= t1 t2)))))",
            f"(assert (forall ((a {ls}) (b {ls})) "
            f"(= ({sz} ({app} a b)) (+ ({sz} a) ({sz} b)))))",
            f"(assert (forall ((h {es}) (t {ls})) "
            f"(= ({names['nth']} 0 ({cons} h t)) h)))",
            f"(assert (forall ((i Int) (h {es}) (t {ls})) "
            f"(=> (>= i 1) (= ({names['nth']} i ({cons} h t)) "
            f"({names['nth']} (- i 1) t)))))",
        ]
        self.axioms.extend(ax)
        return names

    def _pair_ops(self, pt: SProd):
        key = "pair:" + mangle(pt)
        ps = mangle(pt)
        f1, f2 = fields_of(pt.fst), fields_of(pt.snd)
        if len(f1) != 1 or len(f2) != 1:
            raise EncodeError("pair components must be scalar-encodable",
                              self.vc)
        names = {"fst": f"fst!{ps}", "snd": f"snd!{ps}", "mk": f"mk!{ps}"}
        if key in self._axiom_keys:
            return names
        self._axiom_keys.add(key)
        self._declare(names["fst"], [ps], f1[0][1])
        self._declare(names["snd"], [ps], f2[0][1])
        self._declare(names["mk"], [f1[0][1], f2[0][1]], ps)
        self.axioms.append(
            f"(assert (forall ((a {f1[0][1]}) (b {f2[0][1]})) "
            f"(and (= ({names['fst']} ({names['mk']} a b)) a) "
            f"(= ({names['snd']} ({names['mk']} a b)) b))))")
        self.axioms.append(
            f"(assert (forall ((p {ps}) (q {ps})) "
            f"(=> (and (= ({names['fst']} p) ({names['fst']} q)) "
            f"(= ({names['snd']} p) ({names['snd']} q))) (= p q))))")
        return names

    def _pow_op(self, base: int) -> str:
        nm = f"pw{base}"
        if f"pow:{base}" not in self._axiom_keys:
            self._axiom_keys.add(f"pow:{base}")
            self._declare(nm, ["Int"], "Int")
            self.axioms.append(f"(assert (= ({nm} 0) 1))")
            self.axioms.append(
                f"(assert (forall ((m Int)) (=> (>= m 0) (>= ({nm} m) 1))))")
            self.axioms.append(
                f"(assert (forall ((m Int)) (=> (>= m 1) "
                f"(= ({nm} m) (* {base} ({nm} (- m 1)))))))")
        return nm

    def _logexp_op(self, which: str) -> str:
        nm = "u" + which
        if f"fn:{nm}" not in self._axiom_keys:
            self._axiom_keys.add(f"fn:{nm}")
            self._declare(nm, ["Real"], "Real")
            self.axioms.append(
                f"(assert (forall ((a Real) (b Real)) "
                f"(=> (<= a b) (<= ({nm} a) ({nm} b)))))")
            if which == "exp":
                self.axioms.append(
                    f"(assert (forall ((a Real)) (> ({nm} a) 0.0)))")
        return nm

    def _cword_ops(self, ct: SC):
        cs = mangle(ct)
        inner = fields_of(ct.body)
        if len(inner) != 1:
            raise EncodeError("partiality over multi-field payloads is not "
                              "encodable", self.vc)
        names = {"dv": f"dv!{cs}", "cv": f"cv!{cs}"}
        self._declare(names["dv"], [cs], "Bool")
        self._declare(names["cv"], [cs], inner[0][1])
        return names

    def _fun_apply(self, ft: SFun) -> List[str]:
        fs = mangle(ft)
        dom_f = fields_of(ft.dom)
        cod_f = fields_of(ft.cod)
        out = []
        for i, (suf, srt) in enumerate(cod_f):
            nm = f"ap!{fs}!{i}" if len(cod_f) > 1 else f"ap!{fs}"
            self._declare(nm, [fs] + [s for _, s in dom_f], srt)
            out.append(nm)
        return out

    # -- expressions ---------------------------------------------------------------

    def _simple_type(self, e: Expr, expected=None) -> SimpleType:
        try:
            return typecheck_simple(self.tyenv, e, expected)
        except SimpleTypeError as ex:
            raise EncodeError(f"untypable term in assertion: {ex}", self.vc)

    def _coerce(self, v: Vec, want: SimpleType) -> Vec:
        if type(v.ty) is type(want):
            if isinstance(want, SList) and want.elem is not None and \
                    (v.ty.elem is None):
                return Vec(want, v.parts)
            return v
        if isinstance(v.ty, SNat) and isinstance(want, SReal):
            return Vec(want, [f"(to_real {v.one})"])
        if isinstance(v.ty, SNat) and isinstance(want, SXReal):
            return Vec(want, ["false", f"(to_real {v.one})"])
        if isinstance(v.ty, SReal) and isinstance(want, SXReal):
            return Vec(want, ["false", v.one])
        raise EncodeError(f"cannot coerce {v.ty} to {want}", self.vc)

    def _join_num(self, a: Vec, b: Vec) -> Tuple[Vec, Vec, SimpleType]:
        order = {SNat: 0, SReal: 1, SXReal: 2}
        ta, tb = type(a.ty), type(b.ty)
        if ta not in order or tb not in order:
            raise EncodeError(f"non-numeric operands {a.ty}, {b.ty}", self.vc)
        want = a.ty if order[ta] >= order[tb] else b.ty
        return self._coerce(a, want), self._coerce(b, want), want

    def expr(self, e: Expr, expected: Optional[SimpleType] = None) -> Vec:
        if isinstance(e, FVar):
            return self.var_vec(e.name, e.side)
        if isinstance(e, BVar):
            raise EncodeError("dangling bound variable in assertion", self.vc)
        if isinstance(e, NatLit):
            if isinstance(expected, SReal):
                return Vec(SReal(), [_num(Q(e.value), "Real")])
            return Vec(SNat(), [_num(Q(e.value), "Int")])
        if isinstance(e, RealLit):
            return Vec(SReal(), [_num(e.value, "Real")])
        if isinstance(e, InfLit):
            return Vec(SXReal(), ["true", "0.0"])
        if isinstance(e, BoolLit):
            return Vec(SBool(), ["true" if e.value else "false"])
        if isinstance(e, UnitLit):
            self._declare("unt", [], "Unt")
            return Vec(SUnit(), ["unt"])
        if isinstance(e, NilLit):
            lt = expected if isinstance(expected, SList) else \
                self._simple_type(e, expected)
            if not isinstance(lt, SList) or lt.elem is None:
                raise EncodeError("cannot determine the element type of []",
                                  self.vc)
            ops = self._list_ops(lt)
            return Vec(lt, [ops["nil"]])
        if isinstance(e, Cons):
            tl = self.expr(e.tail, expected)
            lt = tl.ty if isinstance(tl.ty, SList) and tl.ty.elem is not None \
                else self._simple_type(e, expected)
            if not isinstance(lt, SList) or lt.elem is None:
                raise EncodeError("cannot determine a cons cell's list type",
                                  self.vc)
            hd = self._coerce(self.expr(e.head, lt.elem), lt.elem)
            tl = self._coerce(tl, lt)
            ops = self._list_ops(lt)
            return Vec(lt, [f"({ops['cons']} {hd.one} {tl.one})"])
        if isinstance(e, Pair):
            pt = self._simple_type(e, expected)
            assert isinstance(pt, SProd)
            ops = self._pair_ops(pt)
            a = self._coerce(self.expr(e.fst, pt.fst), pt.fst)
            b = self._coerce(self.expr(e.snd, pt.snd), pt.snd)
            return Vec(pt, [f"({ops['mk']} {a.one} {b.one})"])
        if isinstance(e, App):
            fv = self.expr(e.fun)
            if not isinstance(fv.ty, SFun):
                raise EncodeError("application of a non-function in an "
                                  "assertion", self.vc)
            av = self._coerce(self.expr(e.arg, fv.ty.dom), fv.ty.dom)
            aps = self._fun_apply(fv.ty)
            parts = [f"({ap} {fv.one} {' '.join(av.parts)})" for ap in aps]
            return Vec(fv.ty.cod, parts)
        if isinstance(e, If):
            c = self.expr(e.cond, SBool())
            a = self.expr(e.then, expected)
            b = self.expr(e.els, expected)
            if type(a.ty) is not type(b.ty):
                a2, b2, want = self._join_num(a, b)
                a, b = a2, b2
            parts = [f"(ite {c.one} {pa} {pb})"
                     for pa, pb in zip(a.parts, b.parts)]
            return Vec(a.ty, parts)
        if isinstance(e, PrimApp):
            return self._prim(e, expected)
        raise EncodeError(
            f"unencodable construct in assertion: {type(e).__name__}", self.vc)

    def _prim(self, e: PrimApp, expected) -> Vec:
        op = e.op
        if op in ("lt", "le", "gt", "ge", "eq", "ne"):
            if op in ("gt", "ge"):
                a, b = e.args[1], e.args[0]
                op = {"gt": "lt", "ge": "le"}[op]
            else:
                a, b = e.args[0], e.args[1]
            if op in ("eq", "ne"):
                s = self.eq_formula(a, b)
                return Vec(SBool(), [s if op == "eq" else f"(not {s})"])
            s = self.cmp_formula(op, a, b)
            return Vec(SBool(), [s])
        if op in ("add", "sub", "mul", "div", "max", "min"):
            a, b, want = self._join_num(self.expr(e.args[0]),
                                        self.expr(e.args[1]))
            if isinstance(want, SXReal):
                if op not in ("add", "mul", "max", "min"):
                    raise EncodeError(f"{op} on extended reals is not "
                                      "supported", self.vc)
                ai, av = a.parts
                bi, bv = b.parts
                if op in ("add", "mul"):
                    smt = {"add": "+", "mul": "*"}[op]
                    return Vec(want, [f"(or {ai} {bi})",
                                      f"({smt} {av} {bv})"])
                if op == "max":
                    return Vec(want, [f"(or {ai} {bi})",
                                      f"(ite (>= {av} {bv}) {av} {bv})"])
                return Vec(want, [f"(and {ai} {bi})",
                                  f"(ite (<= {av} {bv}) {av} {bv})"])
            x, y = a.one, b.one
            if op == "add":
                return Vec(want, [f"(+ {x} {y})"])
            if op == "sub":
                if isinstance(want, SNat):
                    return Vec(want, [f"(ite (>= {x} {y}) (- {x} {y}) 0)"])
                return Vec(want, [f"(- {x} {y})"])
            if op == "mul":
                return Vec(want, [f"(* {x} {y})"])
            if op == "div":
                return Vec(SReal(),
                           [f"(/ {_tor(x, want)} {_tor(y, want)})"])
            if op == "max":
                return Vec(want, [f"(ite (>= {x} {y}) {x} {y})"])
            return Vec(want, [f"(ite (<= {x} {y}) {x} {y})"])
        if op == "neg":
            a = self.expr(e.args[0])
            return Vec(SReal(), [f"(- {_tor(a.one, a.ty)})"])
        if op == "abs":
            a = self.expr(e.args[0])
            if isinstance(a.ty, SXReal):
                return a
            z = "0" if isinstance(a.ty, SNat) else "0.0"
            return Vec(a.ty,
                       [f"(ite (>= {a.one} {z}) {a.one} (- {z} {a.one}))"])
        if op == "pow":
            base = e.args[0]
            if not isinstance(base, NatLit):
                raise EncodeError("only literal bases are supported in ^",
                                  self.vc)
            ex = self.expr(e.args[1])
            if not isinstance(ex.ty, SNat):
                raise EncodeError("exponent must be a natural", self.vc)
            nm = self._pow_op(base.value)
            return Vec(SNat(), [f"({nm} {ex.one})"])
        if op in ("log", "exp"):
            a = self.expr(e.args[0])
            nm = self._logexp_op(op)
            return Vec(SReal(), [f"({nm} {_tor(a.one, a.ty)})"])
        if op == "size":
            l = self.expr(e.args[0])
            if not isinstance(l.ty, SList):
                raise EncodeError("sz of a non-list", self.vc)
            ops = self._list_ops(_defaulted(l.ty))
            return Vec(SNat(), [f"({ops['sz']} {l.one})"])
        if op == "nth":
            i = self.expr(e.args[0])
            l = self.expr(e.args[1])
            lt = _defaulted(l.ty)
            ops = self._list_ops(lt)
            return Vec(lt.elem, [f"({ops['nth']} {i.one} {l.one})"])
        if op == "append":
            a = self.expr(e.args[0])
            b = self.expr(e.args[1])
            lt = _defaulted(a.ty if a.ty.elem is not None else b.ty)
            ops = self._list_ops(lt)
            return Vec(lt, [f"({ops['app']} {a.one} {b.one})"])
        if op in ("fst", "snd"):
            p = self.expr(e.args[0])
            if not isinstance(p.ty, SProd):
                raise EncodeError(f"{op} of a non-pair", self.vc)
            ops = self._pair_ops(p.ty)
            out_ty = p.ty.fst if op == "fst" else p.ty.snd
            return Vec(out_ty, [f"({ops[op]} {p.one})"])
        if op == "cval":
            c = self.expr(e.args[0])
            if not isinstance(c.ty, SC):
                raise EncodeError("cval of a non-partial value", self.vc)
            ops = self._cword_ops(c.ty)
            return Vec(c.ty.body, [f"({ops['cv']} {c.one})"])
        raise EncodeError(f"unencodable primitive {op}", self.vc)

    # -- formulas -------------------------------------------------------------------

    def eq_formula(self, a: Expr, b: Expr) -> str:
        ta = self._simple_type(a)
        tb = self._simple_type(b, ta if not isinstance(ta, SList) or
                               ta.elem is not None else None)
        want = _num_join_type(ta, tb)
        va = self._coerce(self.expr(a, want or tb), want or tb) \
            if want else self.expr(a, tb if _more_defined(tb, ta) else None)
        vb = self._coerce(self.expr(b, want or ta), want or ta) \
            if want else self.expr(b, va.ty)
        if len(va.parts) != len(vb.parts):
            raise EncodeError("field mismatch in equality", self.vc)
        eqs = [f"(= {x} {y})" for x, y in zip(va.parts, vb.parts)]
        return eqs[0] if len(eqs) == 1 else "(and " + " ".join(eqs) + ")"

    def cmp_formula(self, op: str, a: Expr, b: Expr) -> str:
        ta, tb = self._simple_type(a), self._simple_type(b)
        want = _num_join_type(ta, tb)
        if want is None:
            raise EncodeError("comparison of non-numeric values", self.vc)
        va = self._coerce(self.expr(a, want), want)
        vb = self._coerce(self.expr(b, want), want)
        smt = {"le": "<=", "lt": "<"}[op]
        if isinstance(want, SXReal):
            ai, av = va.parts
            bi, bv = vb.parts
            if op == "le":
                return (f"(or {bi} (and (not {ai}) (<= {av} {bv})))")
            return f"(and (not {ai}) (or {bi} (< {av} {bv})))"
        return f"({smt} {va.one} {vb.one})"

    def formula(self, a: Assertion) -> str:
        if isinstance(a, ATrue):
            return "true"
        if isinstance(a, AFalse):
            return "false"
        if isinstance(a, ANot):
            return f"(not {self.formula(a.body)})"
        if isinstance(a, AAnd):
            return "(and " + " ".join(self.formula(x) for x in a.items) + ")"
        if isinstance(a, AOr):
            return "(or " + " ".join(self.formula(x) for x in a.items) + ")"
        if isinstance(a, AImp):
            return f"(=> {self.formula(a.lhs)} {self.formula(a.rhs)})"
        if isinstance(a, AIff):
            return f"(= {self.formula(a.lhs)} {self.formula(a.rhs)})"
        if isinstance(a, ACmp):
            if a.op == "eq":
                return self.eq_formula(a.lhs, a.rhs)
            return self.cmp_formula(a.op, a.lhs, a.rhs)
        if isinstance(a, APred):
            if a.name == "divq":
                c = self.expr(a.args[0])
                if not isinstance(c.ty, SC):
                    raise EncodeError("divq of a non-partial value", self.vc)
                ops = self._cword_ops(c.ty)
                return f"({ops['dv']} {c.one})"
            vecs = [self.expr(x) for x in a.args]
            sig = [s for v in vecs for _, s in fields_of(v.ty)]
            nm = f"pred!{a.name}"
            self._declare(nm, sig, "Bool")
            args = " ".join(p for v in vecs for p in v.parts)
            return f"({nm} {args})"
        if isinstance(a, ALift):
            return self._lift(a)
        if isinstance(a, (AForallP, AExistsP)):
            return self._quant_plain(a)
        if isinstance(a, (AForallR, AExistsR)):
            return self._quant_rel(a)
        raise EncodeError(f"unencodable assertion {type(a).__name__}", self.vc)

    def _lift(self, a: ALift) -> str:
        lv = self.expr(a.left)
        rv = self.expr(a.right)
        if _is_zero(a.eps) and _is_zero(a.delta) and _is_eq_refinement(a.elem):
            # zero-budget lifting of equality coincides with equality of
            # distributions
            eqs = [f"(= {x} {y})" for x, y in zip(lv.parts, rv.parts)]
            return eqs[0] if len(eqs) == 1 else "(and " + " ".join(eqs) + ")"
        key = pp_assertion(ALift(a.eps, a.delta, a.elem,
                                 FVar("!m", "l"), FVar("!m", "r")))
        if key not in self._lift_preds:
            self._lift_preds[key] = f"lift!{len(self._lift_preds)}"
        nm = self._lift_preds[key]
        sig = [s for v in (lv, rv) for _, s in fields_of(v.ty)]
        self._declare(nm, sig, "Bool")
        args = " ".join(lv.parts + rv.parts)
        return f"({nm} {args})"

    def _quant_plain(self, a) -> str:
        nm = fresh_name(a.hint if a.hint != "_" else "q",
                        {k for k, _ in self.tyenv})
        self.tyenv[(nm, None)] = a.ty
        self._locals.add(nm)
        body = self.formula(open_plain(a.body, nm))
        guards = _sort_guards(self, nm, None, a.ty)
        binders = " ".join(f"({p} {s})"
                           for p, (suf, s) in zip(
                               self.var_parts(nm, None, a.ty),
                               fields_of(a.ty)))
        del self.tyenv[(nm, None)]
        self._locals.discard(nm)
        if isinstance(a, AForallP):
            inner = f"(=> {guards} {body})" if guards else body
            return f"(forall ({binders}) {inner})"
        inner = f"(and {guards} {body})" if guards else body
        return f"(exists ({binders}) {inner})"

    def _quant_rel(self, a) -> str:
        nm = fresh_name(a.hint if a.hint != "_" else "q",
                        {k for k, _ in self.tyenv})
        base = erase(a.ty)
        self.tyenv[(nm, "l")] = base
        self.tyenv[(nm, "r")] = base
        self._locals.add(nm)
        n = normalize(a.ty)
        hyp_a = open_rel(n.phi, nm)
        body_a = open_rel(a.body, nm)
        hyp = self.formula(hyp_a) if not isinstance(hyp_a, ATrue) else ""
        body = self.formula(body_a)
        binders = []
        guards = []
        for side in ("l", "r"):
            for p, (suf, s) in zip(self.var_parts(nm, side, base),
                                   fields_of(base)):
                binders.append(f"({p} {s})")
            g = _sort_guards(self, nm, side, base)
            if g:
                guards.append(g)
        if hyp:
            guards.append(hyp)
        del self.tyenv[(nm, "l")]
        del self.tyenv[(nm, "r")]
        self._locals.discard(nm)
        guard = " ".join(guards)
        guard = f"(and {guard})" if len(guards) > 1 else (guards[0] if guards else "")
        bs = " ".join(binders)
        if isinstance(a, AForallR):
            inner = f"(=> {guard} {body})" if guard else body
            return f"(forall ({bs}) {inner})"
        inner = f"(and {guard} {body})" if guard else body
        return f"(exists ({bs}) {inner})"

    def var_parts(self, name, side, t: SimpleType) -> List[str]:
        tag = {"l": "l", "r": "r", None: "p"}[side]
        if name in self.assume_names:
            return [f"c!{name}{suf}" for suf, _ in fields_of(t)]
        return [f"{name}!{tag}{suf}" for suf, _ in fields_of(t)]

    # -- top level ------------------------------------------------------------------

    def encode(self) -> str:
        vc = self.vc
        for name, ty in vc.assumes:
            self.tyenv[(name, None)] = erase(ty)
            self.tyenv[(name, "l")] = erase(ty)
            self.tyenv[(name, "r")] = erase(ty)
        bind_items = []
        for it in vc.env:
            if isinstance(it, RelBinding):
                base = erase(it.ty)
                self.tyenv[(it.name, "l")] = base
                self.tyenv[(it.name, "r")] = base
                bind_items.append(it)

        # relevance: only primitives reachable from the goal, the bindings,
        # or an applicable fact are declared and axiomatized
        bound = {it.name for it in bind_items}
        used = set(free_names(vc.goal))
        for it in bind_items:
            used |= free_names(it.ty)
        assume_ty = dict(vc.assumes)
        fact_items = [it for it in vc.env if isinstance(it, RelFact)]
        changed = True
        while changed:
            changed = False
            for name in list(used):
                if name in assume_ty:
                    fv = free_names(assume_ty[name])
                    if not fv <= used:
                        used |= fv
                        changed = True
            for it in fact_items:
                fv = free_names(it.phi)
                if fv & (used | bound) and not fv <= (used | bound):
                    used |= fv
                    changed = True

        # declarations + refinements for used primitive constants
        for name, ty in vc.assumes:
            if name in used:
                self._const_vec(f"c!{name}", erase(ty))
        for name, ty in vc.assumes:
            if name not in used:
                continue
            inst = open_rel(normalize(ty).phi, name)
            if not isinstance(inst, ATrue):
                self.hyps.append(f"(assert {self.formula(inst)})")

        # bindings: declarations, sort guards, refinement hypotheses
        for it in bind_items:
            base = erase(it.ty)
            for side in ("l", "r"):
                self._const_vec(f"{it.name}!{side}", base)
                self.bind_sort_guards(it.name, side, base)
        for it in vc.env:
            if isinstance(it, RelBinding):
                inst = open_rel(normalize(it.ty).phi, it.name)
                if not isinstance(inst, ATrue):
                    self.hyps.append(f"(assert {self.formula(inst)})")
            elif free_names(it.phi) <= (used | bound):
                self.hyps.append(f"(assert {self.formula(it.phi)})")

        goal = self.formula(vc.goal)
        lines = [
            f"; vc {vc.tag} :: {vc.rule}" + (f" @ {vc.span}" if vc.span else ""),
            "(set-logic ALL)",
            "(set-option :produce-models true)",
        ]
        lines += self.sorts
        lines += self.decls
        lines += self.axioms
        lines += self.hyps
        lines.append(f"(assert (not {goal}))")
        lines.append("(check-sat)")
        lines.append("(get-model)")
        return "\n".join(lines) + "\n"


def _tor(term: str, ty: SimpleType) -> str:
    return f"(to_real {term})" if isinstance(ty, SNat) else term


def _defaulted(lt: SList) -> SList:
    return lt if lt.elem is not None else SList(SReal())


def _more_defined(a: SimpleType, b: SimpleType) -> bool:
    return isinstance(a, SList) and a.elem is not None and \
        isinstance(b, SList) and b.elem is None


def _num_join_type(a, b) -> Optional[SimpleType]:
    order = {SNat: 0, SReal: 1, SXReal: 2}
    if type(a) in order and type(b) in order:
        return a if order[type(a)] >= order[type(b)] else b
    return None


def _sort_guards(enc: Encoder, name, side, t: SimpleType) -> str:
    parts = enc.var_parts(name, side, t)
    if isinstance(t, SNat):
        return f"(>= {parts[0]} 0)"
    if isinstance(t, SXReal):
        return f"(>= {parts[1]} 0.0)"
    return ""


def _is_zero(e: Expr) -> bool:
    return (isinstance(e, NatLit) and e.value == 0) or \
        (isinstance(e, RealLit) and e.value == 0)


def _is_eq_refinement(t: RelType) -> bool:
    from .relcheck import _conjuncts
    n = normalize(t)
    x = fresh_name("c", set())
    phi = open_rel(n.phi, x)
    cs = _conjuncts(phi)
    if len(cs) != 1 or not isinstance(cs[0], ACmp) or cs[0].op != "eq":
        return False
    lhs, rhs = cs[0].lhs, cs[0].rhs
    return (lhs == FVar(x, "l") and rhs == FVar(x, "r")) or \
        (lhs == FVar(x, "r") and rhs == FVar(x, "l"))


def encode(vc: VC) -> SmtScript:
    return SmtScript(Encoder(vc).encode(), vc)


# ---------------------------------------------------------------------------
# Solver driving
# ---------------------------------------------------------------------------


@dataclass
class SolverConfig:
    cmd: Optional[List[str]] = None  # argv; None selects the default
    timeout: float = 60.0
    jobs: int = 1
    emit_dir: Optional[str] = None

    def argv(self) -> List[str]:
        if self.cmd:
            return self.cmd
        envcmd = os.environ.get("HOARE2_SOLVER")
        if envcmd:
            return shlex.split(envcmd)
        return [sys.executable, "-m", "hoare2check.minismt"]


class SolverNotFound(Exception):
    pass


def discharge(vc: VC, cfg: Optional[SolverConfig] = None,
              script: Optional[SmtScript] = None) -> SolverVerdict:
    """Run the configured solver on encode(vc) and interpret its verdict.

    unsat of the negated goal means the VC is valid.  Never raises on a
    crashing solver; those come back as unknown with diagnostics."""
    cfg = cfg or SolverConfig()
    script = script or encode(vc)
    argv = cfg.argv()
    t0 = time.monotonic()
    try:
        proc = subprocess.run(
            argv, input=script.text.encode(), stdout=subprocess.PIPE,
            stderr=subprocess.PIPE, timeout=cfg.timeout)
    except FileNotFoundError as ex:
        raise SolverNotFound(f"solver executable not found: {argv[0]}") from ex
    except subprocess.TimeoutExpired:
        return SolverVerdict("unknown", time.monotonic() - t0,
                             detail="timeout")
    secs = time.monotonic() - t0
    out = proc.stdout.decode(errors="replace")
    lines = [ln.strip() for ln in out.splitlines() if ln.strip()]
    answer = next((ln for ln in lines if ln in ("sat", "unsat", "unknown")),
                  None)
    if answer == "unsat":
        return SolverVerdict("valid", secs)
    if answer == "sat":
        idx = lines.index("sat")
        model = "\n".join(lines[idx + 1:])
        return SolverVerdict("invalid", secs, model=model)
    detail = out if out else proc.stderr.decode(errors="replace")
    return SolverVerdict("unknown", secs, detail=detail[:2000])


def discharge_all(vcs: List[VC], cfg: Optional[SolverConfig] = None,
                  name: str = "vc") -> List[Tuple[VC, SolverVerdict]]:
    """Encode and discharge a VC list; results are joined in VC order.

    With cfg.emit_dir set, scripts are written as <name>_NNN.smt2 before
    solving."""
    cfg = cfg or SolverConfig()
    scripts = [encode(vc) for vc in vcs]
    if cfg.emit_dir:
        os.makedirs(cfg.emit_dir, exist_ok=True)
        for i, sc in enumerate(scripts):
            path = os.path.join(cfg.emit_dir, f"{name}_{i:03d}.smt2")
            with open(path, "w") as fh:
                fh.write(sc.text)
    if cfg.jobs <= 1 or len(vcs) <= 1:
        return [(vc, discharge(vc, cfg, sc)) for vc, sc in zip(vcs, scripts)]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        futs = [pool.submit(discharge, vc, cfg, sc)
                for vc, sc in zip(vcs, scripts)]
        return [(vc, f.result()) for vc, f in zip(vcs, futs)]


def probe_inprocess(vc: VC) -> bool:
    """Fast in-process validity probe used for synchronous-case selection."""
    from .minismt import Solver
    try:
        script = encode(vc)
    except EncodeError:
        return False
    solver = Solver()
    try:
        out = solver.run_script(script.text)
    except Exception:
        return False
    return any(ln == "unsat" for ln in out)
