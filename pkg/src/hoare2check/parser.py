"""Lexer and parser for the ML-like concrete syntax (.rho files).

Declarations: `assume x : T`, `param x : T`, `fact phi`, `pred p x1 .. = phi`,
`let [rec] f (x : T) .. : U = e`.  Projections of relational variables are
written `x<l>` / `x<r>`.  `mlet`/`munit` are the probability monad's bind and
unit, `clet`/`cunit` the partiality monad's.  Comments are `(* .. *)` and
nest.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from .syntax import (
    AAnd, ACmp, AExistsP, AExistsR, AFalse, AForallP, AForallR, AIff, AImp,
    ANot, AOr, APred, ATrue, App, Assertion, BVar, BindC, BindM, BoolLit,
    Cons, Expr, FVar, If, InfLit, Lam, Let, LetRec, ListCase, NatCase,
    NatLit, NilLit, Pair, PairCase, PrimApp, RBase, RC, RM, RPi, RRef,
    RealLit, RelType, SBool, SC, SFun, SList, SM, SNat, SProd, SReal, SUnit,
    SXReal, SimpleType, Span, UnitC, UnitLit, UnitM, close_at,
)

Q = Fraction


class ParseError(Exception):
    def __init__(self, msg, span=None, expected=None):
        self.span = span
        self.expected = expected or []
        loc = f" at {span}" if span else ""
        exp = f" (expected one of: {', '.join(sorted(self.expected))})" if expected else ""
        super().__init__(f"{msg}{loc}{exp}")


class LexError(ParseError):
    pass


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

KEYWORDS = {
    "let", "rec", "in", "fun", "if", "then", "else", "match", "with",
    "munit", "mlet", "cunit", "clet", "assume", "param", "fact", "pred",
    "true", "false", "inf", "top", "bot", "not", "forall", "exists",
    "Pi", "implicit", "M", "C", "list", "nat", "real", "xreal", "bool",
    "unit",
}

PRIM_NAMES = {
    "abs": 1, "max": 2, "min": 2, "log": 1, "exp": 1,
    "sz": 1, "nth": 2, "fst": 1, "snd": 1,
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>\(\*)
  | (?P<real>\d+\.\d+)
  | (?P<nat>\d+)
  | (?P<identl>[A-Za-z_][A-Za-z0-9_']*(\*(?![\w(]))?(<l>|◁))
  | (?P<identr>[A-Za-z_][A-Za-z0-9_']*(\*(?![\w(]))?(<r>|▷))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*(\*(?![\w(]))?)
  | (?P<op>::|==>|<=>|/\\|\\/|\+\+|<>|<=|>=|==|->|[(){}\[\];,.|=<>+\-*/^@:])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str  # ident, identl, identr, nat, real, op, kw, eof
    text: str
    span: Span


def tokenize(text: str, filename: str = "<input>") -> List[Token]:
    tokens = []
    pos = 0
    line, col = 1, 1
    n = len(text)

    def advance(s: str):
        nonlocal line, col
        for ch in s:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1

    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise LexError(f"unexpected character {text[pos]!r}",
                           Span(filename, line, col))
        span = Span(filename, line, col)
        kind = m.lastgroup
        s = m.group(0)
        if kind == "comment":
            # nested (* .. *)
            depth = 1
            i = m.end()
            while depth and i < n:
                if text.startswith("(*", i):
                    depth += 1
                    i += 2
                elif text.startswith("*)", i):
                    depth -= 1
                    i += 2
                else:
                    i += 1
            if depth:
                raise LexError("unterminated comment", span)
            s = text[pos:i]
            advance(s)
            pos = i
            continue
        if kind == "ws":
            advance(s)
            pos = m.end()
            continue
        if kind == "nat":
            # reject things like 0x: a digit run immediately followed by a
            # letter is a malformed literal
            if m.end() < n and (text[m.end()].isalpha() or text[m.end()] == "_"):
                raise LexError(f"malformed numeric literal near {s!r}", span)
            tokens.append(Token("nat", s, span))
        elif kind == "real":
            if m.end() < n and (text[m.end()].isalpha() or text[m.end()] == "_"):
                raise LexError(f"malformed numeric literal near {s!r}", span)
            tokens.append(Token("real", s, span))
        elif kind == "identl":
            base = re.sub(r"(<l>|◁)$", "", s)
            tokens.append(Token("identl", base, span))
        elif kind == "identr":
            base = re.sub(r"(<r>|▷)$", "", s)
            tokens.append(Token("identr", base, span))
        elif kind == "ident":
            if s in KEYWORDS:
                tokens.append(Token("kw", s, span))
            else:
                tokens.append(Token("ident", s, span))
        else:
            tokens.append(Token("op", s, span))
        advance(s)
        pos = m.end()
    tokens.append(Token("eof", "", Span(filename, line, col)))
    return tokens


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------


@dataclass
class AssumeDecl:
    name: str
    ty: RelType
    span: Optional[Span] = None


@dataclass
class ParamDecl:
    name: str
    ty: RelType
    span: Optional[Span] = None


@dataclass
class FactDecl:
    phi: Assertion
    label: str = ""
    span: Optional[Span] = None


@dataclass
class PredDecl:
    name: str
    params: Tuple[str, ...]
    body: Assertion
    span: Optional[Span] = None


@dataclass
class LetDecl:
    name: str
    expr: Expr
    anno: Optional[RelType]
    rec: bool = False
    reduce_left: bool = False
    reduce_right: bool = False
    span: Optional[Span] = None


@dataclass
class SourceFile:
    filename: str
    decls: list = field(default_factory=list)

    def let_decls(self):
        return [d for d in self.decls if isinstance(d, LetDecl)]


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class Parser:
    def __init__(self, tokens: List[Token], preds=()):
        self.toks = tokens
        self.i = 0
        self.pred_names = set(preds)

    # -- token plumbing ----------------------------------------------------

    def peek(self, k=0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, kind, text=None, k=0) -> bool:
        t = self.peek(k)
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind, text=None) -> Token:
        t = self.peek()
        if not self.at(kind, text):
            want = text if text is not None else kind
            raise ParseError(f"unexpected token {t.text!r}", t.span, [str(want)])
        return self.next()

    def try_eat(self, kind, text=None) -> bool:
        if self.at(kind, text):
            self.next()
            return True
        return False

    # -- files ---------------------------------------------------------------

    def parse_file(self, filename: str) -> SourceFile:
        sf = SourceFile(filename)
        while not self.at("eof"):
            sf.decls.append(self.parse_decl())
        return sf

    def parse_decl(self):
        t = self.peek()
        reduce_left = reduce_right = False
        while self.at("op", "@"):
            self.next()
            which = self.expect("ident").text
            if which == "reduce_left":
                reduce_left = True
            elif which == "reduce_right":
                reduce_right = True
            else:
                raise ParseError(f"unknown annotation @{which}", t.span)
        if self.at("kw", "assume"):
            self.next()
            name = self.expect("ident").text
            self.expect("op", ":")
            ty = self.parse_reltype()
            return AssumeDecl(name, ty, t.span)
        if self.at("kw", "param"):
            self.next()
            name = self.expect("ident").text
            self.expect("op", ":")
            ty = self.parse_reltype()
            return ParamDecl(name, ty, t.span)
        if self.at("kw", "fact"):
            self.next()
            label = ""
            if self.at("ident") and self.at("op", ":", k=1):
                label = self.next().text
                self.next()
            phi = self.parse_assertion()
            return FactDecl(phi, label, t.span)
        if self.at("kw", "pred"):
            self.next()
            name = self.expect("ident").text
            params = []
            while self.at("ident"):
                params.append(self.next().text)
            self.expect("op", "=")
            body = self.parse_assertion()
            self.pred_names.add(name)
            return PredDecl(name, tuple(params), body, t.span)
        if self.at("kw", "let"):
            return self.parse_let_decl(reduce_left, reduce_right)
        raise ParseError(f"unexpected token {t.text!r}", t.span,
                         ["assume", "param", "fact", "pred", "let"])

    def parse_let_decl(self, reduce_left=False, reduce_right=False):
        t = self.expect("kw", "let")
        rec = self.try_eat("kw", "rec")
        name = self.expect("ident").text
        params = []  # (name, RelType)
        while self.at("op", "("):
            self.next()
            pname = self.expect("ident").text
            if not (self.try_eat("op", "::") or self.try_eat("op", ":")):
                raise ParseError("expected ':' in parameter", self.peek().span)
            pty = self.parse_reltype()
            self.expect("op", ")")
            params.append((pname, pty))
        anno_result = None
        if self.try_eat("op", ":"):
            anno_result = self.parse_reltype()
        self.expect("op", "=")
        body = self.parse_expr()

        anno = None
        if anno_result is not None:
            anno = anno_result
            for pname, pty in reversed(params):
                anno = RPi(pty, close_at(anno, 0, pname), hint=pname)
        elif params and all(pty is not None for _, pty in params):
            pass  # unannotated result: synthesized later

        if rec:
            if anno is None:
                raise ParseError(
                    f"recursive definition {name} requires a result annotation",
                    t.span)
            if not params:
                raise ParseError("let rec needs at least one parameter", t.span)
            # letrec f x = fun rest -> body
            inner = body
            for pname, _ in reversed(params[1:]):
                inner = Lam(close_at(inner, 0, pname), hint=pname)
            inner = close_at(close_at(inner, 0, params[0][0]), 1, name)
            # SN form iff the annotated result (after all params) is not C[..]
            res = anno
            for _ in params:
                assert isinstance(res, RPi)
                res = res.cod
            sn = not isinstance(res, RC)
            expr = LetRec(sn, inner, anno=anno, fhint=name,
                          xhint=params[0][0], span=t.span)
        else:
            expr = body
            for pname, _ in reversed(params):
                expr = Lam(close_at(expr, 0, pname), hint=pname, span=t.span)
        return LetDecl(name, expr, anno, rec=rec, reduce_left=reduce_left,
                       reduce_right=reduce_right, span=t.span)

    # -- expressions -------------------------------------------------------

    def parse_expr(self) -> Expr:
        t = self.peek()
        if self.at("kw", "fun"):
            self.next()
            names = []
            while self.at("ident"):
                names.append(self.next().text)
            if not names:
                raise ParseError("fun needs at least one parameter", t.span)
            self.expect("op", "->")
            body = self.parse_expr()
            for nm in reversed(names):
                body = Lam(close_at(body, 0, nm), hint=nm, span=t.span)
            return body
        if self.at("kw", "let"):
            if self.at("op", "(", k=1):
                self.next()
                self.next()
                a = self.expect("ident").text
                self.expect("op", ",")
                b = self.expect("ident").text
                self.expect("op", ")")
                self.expect("op", "=")
                rhs = self.parse_expr()
                self.expect("kw", "in")
                body = self.parse_expr()
                body = close_at(close_at(body, 0, b), 1, a)
                return PairCase(rhs, body, ahint=a, bhint=b, span=t.span)
            self.next()
            if self.at("kw", "rec"):
                raise ParseError("local let rec is not supported", t.span)
            nm = self.expect("ident").text
            self.expect("op", "=")
            rhs = self.parse_expr()
            self.expect("kw", "in")
            body = self.parse_expr()
            return Let(rhs, close_at(body, 0, nm), hint=nm, span=t.span)
        if self.at("kw", "mlet") or self.at("kw", "clet"):
            is_m = self.next().text == "mlet"
            nm = self.expect("ident").text
            self.expect("op", "=")
            rhs = self.parse_expr()
            self.expect("kw", "in")
            body = self.parse_expr()
            cls = BindM if is_m else BindC
            return cls(rhs, close_at(body, 0, nm), hint=nm, span=t.span)
        if self.at("kw", "if"):
            self.next()
            c = self.parse_expr()
            self.expect("kw", "then")
            th = self.parse_expr()
            self.expect("kw", "else")
            el = self.parse_expr()
            return If(c, th, el, span=t.span)
        if self.at("kw", "match"):
            return self.parse_match()
        return self.parse_cmp()

    def parse_match(self) -> Expr:
        t = self.expect("kw", "match")
        scrut = self.parse_expr()
        self.expect("kw", "with")
        self.try_eat("op", "|")
        # first arm decides list-case vs nat-case
        if self.at("op", "["):
            self.next()
            self.expect("op", "]")
            self.expect("op", "->")
            nil_b = self.parse_expr()
            self.expect("op", "|")
            h = self.expect("ident").text
            self.expect("op", "::")
            tl = self.expect("ident").text
            self.expect("op", "->")
            cons_b = self.parse_expr()
            cons_b = close_at(close_at(cons_b, 0, tl), 1, h)
            return ListCase(scrut, nil_b, cons_b, hhint=h, thint=tl, span=t.span)
        if self.at("nat", "0"):
            self.next()
            self.expect("op", "->")
            zero_b = self.parse_expr()
            self.expect("op", "|")
            # `p + 1 ->` or `1 + p ->`
            if self.at("nat", "1"):
                self.next()
                self.expect("op", "+")
                p = self.expect("ident").text
            else:
                p = self.expect("ident").text
                self.expect("op", "+")
                self.expect("nat", "1")
            self.expect("op", "->")
            succ_b = self.parse_expr()
            return NatCase(scrut, zero_b, close_at(succ_b, 0, p),
                           phint=p, span=t.span)
        raise ParseError("unsupported match pattern", self.peek().span,
                         ["[]", "0"])

    _CMP_OPS = {"=": "eq", "==": "eq", "<>": "ne", "<": "lt", "<=": "le",
                ">": "gt", ">=": "ge"}

    def parse_cmp(self) -> Expr:
        lhs = self.parse_additive()
        t = self.peek()
        if t.kind == "op" and t.text in self._CMP_OPS:
            self.next()
            rhs = self.parse_additive()
            return PrimApp(self._CMP_OPS[t.text], (lhs, rhs), span=t.span)
        return lhs

    def parse_additive(self) -> Expr:
        e = self.parse_multiplicative()
        while self.at("op", "+") or self.at("op", "-") or self.at("op", "++") \
                or self.at("op", "::"):
            t = self.next()
            rhs = self.parse_multiplicative()
            if t.text == "+":
                e = PrimApp("add", (e, rhs), span=t.span)
            elif t.text == "-":
                e = PrimApp("sub", (e, rhs), span=t.span)
            elif t.text == "::":
                e = Cons(e, rhs, span=t.span)  # right assoc would be nicer;
                # lists in source are short so this only matters for x::y::l,
                # which we re-associate below
            else:
                e = PrimApp("append", (e, rhs), span=t.span)
        # fix associativity of :: (a :: b) :: c -> a :: (b :: c)
        def reassoc(x):
            if isinstance(x, Cons) and isinstance(x.head, Cons):
                inner = x.head
                return reassoc(Cons(inner.head, reassoc(Cons(inner.tail, x.tail)),
                                    span=x.span))
            return x
        return reassoc(e)

    def parse_multiplicative(self) -> Expr:
        e = self.parse_power()
        while self.at("op", "*") or self.at("op", "/"):
            t = self.next()
            rhs = self.parse_power()
            e = PrimApp("mul" if t.text == "*" else "div", (e, rhs), span=t.span)
        return e

    def parse_power(self) -> Expr:
        e = self.parse_app()
        if self.at("op", "^"):
            t = self.next()
            rhs = self.parse_power()
            return PrimApp("pow", (e, rhs), span=t.span)
        return e

    def parse_app(self) -> Expr:
        t = self.peek()
        if self.at("kw", "munit") or self.at("kw", "cunit"):
            kw = self.next().text
            arg = self.parse_atom()
            return (UnitM if kw == "munit" else UnitC)(arg, span=t.span)
        if self.at("ident") and self.peek().text in PRIM_NAMES and \
                self._starts_atom(self.peek(1)):
            name = self.next().text
            arity = PRIM_NAMES[name]
            args = tuple(self.parse_atom() for _ in range(arity))
            op = {"sz": "size"}.get(name, name)
            return PrimApp(op, args, span=t.span)
        e = self.parse_atom()
        while self._starts_atom(self.peek(), head=False):
            arg = self.parse_atom()
            e = App(e, arg, span=t.span)
        return e

    @staticmethod
    def _starts_atom(t: Token, head: bool = True) -> bool:
        if t.kind in ("ident", "identl", "identr", "nat", "real"):
            return True
        if t.kind == "kw" and t.text in ("true", "false", "inf", "munit", "cunit"):
            return True
        # `|e|` only opens an atom in head position; as a function argument it
        # must be parenthesized (the bare bar would be ambiguous with match
        # arms)
        if t.kind == "op" and (t.text in ("(", "[") or (head and t.text == "|")):
            return True
        return False

    def parse_atom(self) -> Expr:
        t = self.peek()
        if self.at("ident"):
            return FVar(self.next().text, None, span=t.span)
        if self.at("identl"):
            return FVar(self.next().text, "l", span=t.span)
        if self.at("identr"):
            return FVar(self.next().text, "r", span=t.span)
        if self.at("nat"):
            return NatLit(int(self.next().text), span=t.span)
        if self.at("real"):
            s = self.next().text
            ip, fp = s.split(".")
            val = Q(int(ip)) + Q(int(fp), 10 ** len(fp)) if fp else Q(int(ip))
            return RealLit(val, span=t.span)
        if self.at("kw", "true"):
            self.next()
            return BoolLit(True, span=t.span)
        if self.at("kw", "false"):
            self.next()
            return BoolLit(False, span=t.span)
        if self.at("kw", "inf"):
            self.next()
            return InfLit(span=t.span)
        if self.at("kw", "munit"):
            self.next()
            return UnitM(self.parse_atom(), span=t.span)
        if self.at("kw", "cunit"):
            self.next()
            return UnitC(self.parse_atom(), span=t.span)
        if self.at("op", "|"):
            self.next()
            inner = self.parse_expr()
            self.expect("op", "|")
            return PrimApp("abs", (inner,), span=t.span)
        if self.at("op", "["):
            self.next()
            if self.try_eat("op", "]"):
                return NilLit(span=t.span)
            items = [self.parse_expr()]
            while self.try_eat("op", ";"):
                items.append(self.parse_expr())
            self.expect("op", "]")
            out: Expr = NilLit(span=t.span)
            for it in reversed(items):
                out = Cons(it, out, span=t.span)
            return out
        if self.at("op", "("):
            self.next()
            if self.try_eat("op", ")"):
                return UnitLit(span=t.span)
            e = self.parse_expr()
            if self.try_eat("op", ","):
                e2 = self.parse_expr()
                self.expect("op", ")")
                return Pair(e, e2, span=t.span)
            self.expect("op", ")")
            return e
        raise ParseError(f"unexpected token {t.text!r} in expression",
                         t.span, ["identifier", "literal", "("])

    # -- relational types ----------------------------------------------------

    def parse_reltype(self) -> RelType:
        t = self.peek()
        if self.at("op", "{"):
            self.next()
            name = self.expect("ident").text
            self.expect("op", "::")
            base = self.parse_reltype()
            self.expect("op", "|")
            phi = self.parse_assertion()
            self.expect("op", "}")
            ref = RRef(base, close_at(phi, 0, name), hint=name, span=t.span)
            return self._maybe_arrow(ref)
        if self.at("kw", "Pi"):
            self.next()
            implicit = self.try_eat("kw", "implicit")
            self.expect("op", "(")
            name = self.expect("ident").text
            self.expect("op", "::")
            dom = self.parse_reltype()
            self.expect("op", ")")
            self.expect("op", ".")
            cod = self.parse_reltype()
            return RPi(dom, close_at(cod, 0, name), hint=name, span=t.span,
                       implicit=implicit)
        if self.at("kw", "M"):
            self.next()
            if not self.at("op", "["):
                # unindexed distribution type, usable as a refinement base
                return self._maybe_arrow(
                    RBase(SM(self.parse_simple_atom()), span=t.span))
            self.expect("op", "[")
            eps = self.parse_expr()
            self.expect("op", ",")
            delta = self.parse_expr()
            self.expect("op", "]")
            body = self.parse_reltype()
            return self._maybe_arrow(RM(eps, delta, body, span=t.span))
        if self.at("kw", "C"):
            self.next()
            body = self.parse_reltype()
            return self._maybe_arrow(RC(body, span=t.span))
        core = self.parse_simpletype()
        return self._maybe_arrow(RBase(core, span=t.span))

    def _maybe_arrow(self, dom: RelType) -> RelType:
        if self.try_eat("op", "->"):
            cod = self.parse_reltype()
            return RPi(dom, cod, hint="_")
        return dom

    def parse_simpletype(self) -> SimpleType:
        t = self.parse_simple_atom()
        if self.at("op", "*"):
            self.next()
            rhs = self.parse_simpletype()
            return SProd(t, rhs)
        return t

    def parse_simple_atom(self) -> SimpleType:
        t = self.peek()
        if self.at("kw", "unit"):
            self.next()
            return SUnit()
        if self.at("kw", "bool"):
            self.next()
            return SBool()
        if self.at("kw", "nat"):
            self.next()
            return SNat()
        if self.at("kw", "real"):
            self.next()
            return SReal()
        if self.at("kw", "xreal"):
            self.next()
            return SXReal()
        if self.at("kw", "list"):
            self.next()
            return SList(self.parse_simple_atom())
        if self.at("kw", "M"):
            self.next()
            return SM(self.parse_simple_atom())
        if self.at("kw", "C"):
            self.next()
            return SC(self.parse_simple_atom())
        if self.at("op", "("):
            self.next()
            inner = self.parse_simple_fun()
            self.expect("op", ")")
            return inner
        raise ParseError(f"unexpected token {t.text!r} in simple type", t.span,
                         ["unit", "bool", "nat", "real", "xreal", "list", "("])

    def parse_simple_fun(self) -> SimpleType:
        dom = self.parse_simpletype()
        if self.try_eat("op", "->"):
            return SFun(dom, self.parse_simple_fun())
        return dom

    # -- assertions ----------------------------------------------------------

    def parse_assertion(self) -> Assertion:
        return self.parse_iff()

    def parse_iff(self) -> Assertion:
        lhs = self.parse_imp()
        if self.try_eat("op", "<=>"):
            rhs = self.parse_iff()
            return AIff(lhs, rhs)
        return lhs

    def parse_imp(self) -> Assertion:
        lhs = self.parse_or()
        if self.try_eat("op", "==>"):
            rhs = self.parse_imp()
            return AImp(lhs, rhs)
        return lhs

    def parse_or(self) -> Assertion:
        items = [self.parse_and()]
        while self.try_eat("op", "\\/"):
            items.append(self.parse_and())
        return items[0] if len(items) == 1 else AOr(tuple(items))

    def parse_and(self) -> Assertion:
        items = [self.parse_not()]
        while self.try_eat("op", "/\\"):
            items.append(self.parse_not())
        return items[0] if len(items) == 1 else AAnd(tuple(items))

    def parse_not(self) -> Assertion:
        if self.at("kw", "not"):
            self.next()
            return ANot(self.parse_not())
        return self.parse_aatom()

    def parse_aatom(self) -> Assertion:
        t = self.peek()
        if self.at("kw", "top"):
            self.next()
            return ATrue()
        if self.at("kw", "bot"):
            self.next()
            return AFalse()
        if self.at("kw", "forall") or self.at("kw", "exists"):
            is_forall = self.next().text == "forall"
            name = self.expect("ident").text
            if self.try_eat("op", "::"):
                ty = self.parse_reltype()
                self.expect("op", ".")
                body = self.parse_assertion()
                cls = AForallR if is_forall else AExistsR
                return cls(ty, close_at(body, 0, name), hint=name)
            self.expect("op", ":")
            sty = self.parse_simple_fun()
            self.expect("op", ".")
            body = self.parse_assertion()
            cls = AForallP if is_forall else AExistsP
            return cls(sty, close_at(body, 0, name), hint=name)
        if self.at("op", "("):
            # backtrack: try assertion grouping first, fall back to an
            # expression atom (comparison / predicate application)
            save = self.i
            try:
                self.next()
                inner = self.parse_assertion()
                self.expect("op", ")")
                # if a comparison operator follows, it was an expression
                if self.peek().kind == "op" and self.peek().text in self._CMP_OPS:
                    raise ParseError("expression, not assertion", t.span)
                return inner
            except ParseError:
                self.i = save
        if self.at("ident") and self.peek().text in self.pred_names:
            name = self.next().text
            args = []
            while self._starts_atom(self.peek()):
                args.append(self.parse_atom())
            return APred(name, tuple(args))
        # comparison atom
        lhs = self.parse_additive()
        op_t = self.peek()
        if not (op_t.kind == "op" and op_t.text in self._CMP_OPS):
            raise ParseError(f"expected comparison in assertion, got {op_t.text!r}",
                             op_t.span, list(self._CMP_OPS))
        self.next()
        rhs = self.parse_additive()
        kind = self._CMP_OPS[op_t.text]
        if kind == "eq":
            return ACmp("eq", lhs, rhs)
        if kind == "ne":
            return ANot(ACmp("eq", lhs, rhs))
        if kind == "lt":
            return ACmp("lt", lhs, rhs)
        if kind == "le":
            return ACmp("le", lhs, rhs)
        if kind == "gt":
            return ACmp("lt", rhs, lhs)
        if kind == "ge":
            return ACmp("le", rhs, lhs)
        raise AssertionError(kind)


def parse_expr(text: str, filename="<expr>", preds=()) -> Expr:
    p = Parser(tokenize(text, filename), preds)
    e = p.parse_expr()
    p.expect("eof")
    return e


def parse_reltype(text: str, filename="<type>", preds=()) -> RelType:
    p = Parser(tokenize(text, filename), preds)
    t = p.parse_reltype()
    p.expect("eof")
    return t


def parse_assertion(text: str, filename="<assertion>", preds=()) -> Assertion:
    p = Parser(tokenize(text, filename), preds)
    a = p.parse_assertion()
    p.expect("eof")
    return a


def parse_file(text: str, filename="<file>", preds=()) -> SourceFile:
    p = Parser(tokenize(text, filename), preds)
    return p.parse_file(filename)
