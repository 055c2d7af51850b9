"""A small SMT-LIB 2 solver, exact over the rationals.

Reads a script on stdin (or from a file argument) and prints sat / unsat /
unknown.  Built for the fragment the verification-condition generator emits:

  * booleans, Int / Real arithmetic (exact rationals, no tolerances),
  * uninterpreted sorts, functions and predicates with congruence closure,
  * universally quantified axioms, discharged by ground instantiation over
    the term universe (several rounds, capped),
  * nonlinear monomials via linearization plus sign and factor-monotonicity
    lemmas justified by entailed factor bounds,
  * term-level ite, abs, and boolean structure by recursive case splitting.

`unsat` answers are always sound: instantiation only ever weakens the
hypothesis set, arithmetic is an exact rational relaxation, and every lemma
added is valid.  `sat` is reported only for quantifier-free problems whose
integer-sorted terms received integral values; everything else is `unknown`.
"""

from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .simplex import LinCons, feasible

Q = Fraction

MAX_INST_ROUNDS = 3
MAX_INSTANCES = 4000


class SmtError(Exception):
    pass


class Unsupported(SmtError):
    pass


# ---------------------------------------------------------------------------
# S-expression parsing
# ---------------------------------------------------------------------------


def parse_sexprs(text: str) -> list:
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            toks.append(c)
            i += 1
        elif c == "|":
            j = text.index("|", i + 1)
            toks.append(text[i:j + 1])
            i = j + 1
        elif c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            toks.append(text[i:j + 1])
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n();":
                j += 1
            toks.append(text[i:j])
            i = j
    out, stack = [], []
    for t in toks:
        if t == "(":
            stack.append([])
        elif t == ")":
            if not stack:
                raise SmtError("unbalanced parentheses")
            done = stack.pop()
            (stack[-1] if stack else out).append(done)
        else:
            (stack[-1] if stack else out).append(t)
    if stack:
        raise SmtError("unbalanced parentheses")
    return out


def _is_numeral(s) -> bool:
    if not isinstance(s, str) or not s:
        return False
    body = s[1:] if s[0] == "-" else s
    return body.replace(".", "", 1).isdigit() and body != ""


def _to_q(s: str) -> Fraction:
    if "." in s:
        ip, fp = s.split(".")
        sign = -1 if ip.startswith("-") else 1
        ip = ip.lstrip("-") or "0"
        return sign * (Q(int(ip)) + Q(int(fp or 0), 10 ** len(fp)))
    return Q(int(s))


# ---------------------------------------------------------------------------
# Terms: nested tuples.  Leaves: ("var", name), ("num", Fraction),
# ("bvar", name, sort).  Applications: ("apply", fname, args...).  Logic and
# arithmetic heads keep their SMT-LIB names.
# ---------------------------------------------------------------------------

TRUE = ("true",)
FALSE = ("false",)

_CONNECTIVES = {"true", "false", "and", "or", "not", "=>"}
_NUM_PREDS = {"<=", "<", ">=", ">"}
_ARITH = {"+", "-", "*", "/", "abs", "to_real", "ite"}


_KEY_CACHE: dict = {}


def _term_key(t):
    k = _KEY_CACHE.get(t)
    if k is None:
        k = repr(t)
        _KEY_CACHE[t] = k
    return k


def _substitute(term, sub: dict):
    if term in sub:
        return sub[term]
    if not isinstance(term, tuple) or term[0] in ("var", "num", "bvar",
                                                  "true", "false"):
        return term
    if term[0] == "forall":
        return ("forall", term[1], _substitute(term[2], sub))
    if term[0] == "apply":
        return ("apply", term[1], *[_substitute(a, sub) for a in term[2:]])
    return (term[0], *[_substitute(a, sub) for a in term[1:]])


def _has_quant(t) -> bool:
    if not isinstance(t, tuple):
        return False
    if t[0] == "forall":
        return True
    return any(_has_quant(a) for a in t[1:] if isinstance(a, tuple))


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------


@dataclass
class Context:
    sorts: set = field(default_factory=lambda: {"Bool", "Int", "Real"})
    funs: Dict[str, Tuple[tuple, str]] = field(default_factory=dict)
    defs: Dict[str, tuple] = field(default_factory=dict)


class Solver:
    def __init__(self):
        self.ctx = Context()
        self.assertions = []
        self.status = None
        self.model_text = ""
        self._fresh = 0

    # -- scripts -------------------------------------------------------------

    def run_script(self, text: str) -> List[str]:
        out = []
        for sx in parse_sexprs(text):
            r = self.command(sx)
            if r is not None:
                out.append(r)
        return out

    def command(self, sx) -> Optional[str]:
        if not isinstance(sx, list) or not sx:
            raise SmtError(f"bad command {sx!r}")
        head = sx[0]
        if head in ("set-logic", "set-info", "set-option", "echo"):
            return None
        if head == "declare-sort":
            self.ctx.sorts.add(sx[1])
            return None
        if head == "declare-fun":
            name = sx[1].strip("|")
            self.ctx.funs[name] = (
                tuple(s if isinstance(s, str) else "?" for s in sx[2]),
                sx[3] if isinstance(sx[3], str) else "?")
            return None
        if head == "declare-const":
            name = sx[1].strip("|")
            self.ctx.funs[name] = ((), sx[2] if isinstance(sx[2], str) else "?")
            return None
        if head == "define-fun":
            name = sx[1].strip("|")
            params = [(p[0].strip("|"), p[1] if isinstance(p[1], str) else "?")
                      for p in sx[2]]
            bound = {p: ("bvar", p, s) for p, s in params}
            body = self._parse_term(sx[4], bound)
            self.ctx.defs[name] = (params, body)
            return None
        if head == "assert":
            self.assertions.append(self._parse_term(sx[1], {}))
            return None
        if head == "check-sat":
            self.status = self.check()
            return self.status
        if head == "get-model":
            return self.model_text or "(model)"
        if head == "exit":
            return None
        raise SmtError(f"unsupported command {head}")

    def _parse_term(self, sx, bound: dict):
        if isinstance(sx, str):
            if sx == "true":
                return TRUE
            if sx == "false":
                return FALSE
            if _is_numeral(sx):
                return ("num", _to_q(sx))
            name = sx.strip("|")
            if name in bound:
                return bound[name]
            if name in self.ctx.defs:
                params, body = self.ctx.defs[name]
                if params:
                    raise SmtError(f"{name} needs arguments")
                return body
            if name in self.ctx.funs:
                return ("var", name)
            raise SmtError(f"unknown symbol {name}")
        if not sx:
            raise SmtError("empty application")
        head = sx[0]
        if head in ("forall", "exists"):
            vars_ = tuple((v[0].strip("|"), v[1] if isinstance(v[1], str) else "?")
                          for v in sx[1])
            inner = dict(bound)
            for nm, srt in vars_:
                inner[nm] = ("bvar", nm, srt)
            return (head, vars_, self._parse_term(sx[2], inner))
        if head == "let":
            inner = dict(bound)
            for b in sx[1]:
                inner[b[0].strip("|")] = self._parse_term(b[1], bound)
            return self._parse_term(sx[2], inner)
        if head == "!":
            return self._parse_term(sx[1], bound)
        args = [self._parse_term(a, bound) for a in sx[1:]]
        hname = head.strip("|") if isinstance(head, str) else None
        if hname in _CONNECTIVES or hname in _NUM_PREDS or \
                hname in ("=", "distinct", "+", "-", "*", "/", "abs",
                          "to_real", "ite"):
            return (hname, *args)
        if hname in self.ctx.defs:
            params, body = self.ctx.defs[hname]
            if len(params) != len(args):
                raise SmtError(f"arity mismatch for {hname}")
            sub = {("bvar", p, s): a for (p, s), a in zip(params, args)}
            return _substitute(body, sub)
        if hname in self.ctx.funs:
            return ("apply", hname, *args)
        raise SmtError(f"unknown symbol {head}")

    # -- sorts ---------------------------------------------------------------

    def _fun_sort(self, name) -> str:
        return self.ctx.funs.get(name, ((), "?"))[1]

    def term_sort(self, t) -> str:
        op = t[0]
        if op == "num":
            return "Int" if t[1].denominator == 1 else "Real"
        if op == "var":
            return self._fun_sort(t[1])
        if op == "bvar":
            return t[2]
        if op == "apply":
            return self._fun_sort(t[1])
        if op in ("+", "-", "*"):
            sorts = {self.term_sort(a) for a in t[1:]}
            return "Real" if "Real" in sorts else "Int"
        if op in ("/", "to_real"):
            return "Real"
        if op == "abs":
            return self.term_sort(t[1])
        if op == "ite":
            return self.term_sort(t[2])
        return "Bool"

    def _is_bool(self, t) -> bool:
        return self.term_sort(t) == "Bool"

    # -- preprocessing --------------------------------------------------------

    def _fix_booleq(self, t):
        if not isinstance(t, tuple) or t[0] in ("var", "num", "bvar", "true",
                                                "false"):
            return t
        if t[0] in ("forall", "exists"):
            return (t[0], t[1], self._fix_booleq(t[2]))
        args = [self._fix_booleq(a) for a in t[1:]]
        if t[0] == "=" and len(args) == 2 and (self._is_bool(args[0])
                                               or self._is_bool(args[1])):
            a, b = args
            return ("or", ("and", a, b), ("and", ("not", a), ("not", b)))
        if t[0] == "distinct":
            return ("not", ("=", *args))
        if t[0] == "apply":
            return ("apply", t[1], *args)
        return (t[0], *args)

    def _nnf(self, t, pol=True):
        op = t[0]
        if op == "not":
            return self._nnf(t[1], not pol)
        if op == "=>":
            if pol:
                return ("or", self._nnf(t[1], False), self._nnf(t[2], True))
            return ("and", self._nnf(t[1], True), self._nnf(t[2], False))
        if op in ("and", "or"):
            flip = {"and": "or", "or": "and"}
            return (op if pol else flip[op],
                    *[self._nnf(a, pol) for a in t[1:]])
        if op == "forall":
            return ("forall" if pol else "exists", t[1], self._nnf(t[2], pol))
        if op == "exists":
            return ("exists" if pol else "forall", t[1], self._nnf(t[2], pol))
        if op == "true":
            return TRUE if pol else FALSE
        if op == "false":
            return FALSE if pol else TRUE
        return t if pol else ("not", t)

    def _skolemize(self, t, uvars=()):
        """Replace existentials by skolem functions of the enclosing
        universals (equisatisfiable, so sound for both verdicts)."""
        op = t[0]
        if op == "exists":
            sub = {}
            for nm, srt in t[1]:
                self._fresh += 1
                sk = f"!sk{self._fresh}"
                self.ctx.funs[sk] = (tuple(s for _, _, s in uvars), srt)
                sub[("bvar", nm, srt)] = \
                    ("apply", sk, *uvars) if uvars else ("var", sk)
            return self._skolemize(_substitute(t[2], sub), uvars)
        if op in ("and", "or"):
            return (op, *[self._skolemize(a, uvars) for a in t[1:]])
        if op == "forall":
            inner = uvars + tuple(("bvar", nm, srt) for nm, srt in t[1])
            return ("forall", t[1], self._skolemize(t[2], inner))
        return t

    def _miniscope(self, t):
        """Narrow universal quantifiers (NNF, no existentials): distribute
        disjunctions over conjunctions under a forall, split the forall over
        the resulting conjuncts, and drop binders a conjunct does not use.
        This keeps independently-triggerable parts of an axiom usable even
        when other parts never find instances."""
        op = t[0]
        if op in ("and", "or"):
            return (op, *[self._miniscope(a) for a in t[1:]])
        if op != "forall":
            return t
        body = self._miniscope(t[2])
        body = _dist_or_over_and(body)
        vs = t[1]
        if body[0] == "and":
            out = []
            for c in body[1:]:
                used = _bvars_of(c)
                kept = tuple((nm, srt) for nm, srt in vs
                             if ("bvar", nm, srt) in used)
                out.append(self._miniscope(("forall", kept, c))
                           if kept else c)
            return ("and", *out)
        used = _bvars_of(body)
        kept = tuple((nm, srt) for nm, srt in vs if ("bvar", nm, srt) in used)
        if not kept:
            return body
        if body[0] == "forall":
            return ("forall", kept + body[1], body[2])
        return ("forall", kept, body)

    def _prenex(self, t):
        """Pull every positive forall to the top (NNF, no existentials)."""
        op = t[0]
        if op == "forall":
            inner_vars, body = t[1], t[2]
            renamed = {}
            out_vars = []
            for nm, srt in inner_vars:
                self._fresh += 1
                fresh = f"{nm}!{self._fresh}"
                renamed[("bvar", nm, srt)] = ("bvar", fresh, srt)
                out_vars.append((fresh, srt))
            vs, b = self._prenex(_substitute(body, renamed))
            return tuple(out_vars) + vs, b
        if op in ("and", "or"):
            all_vars = []
            parts = []
            for a in t[1:]:
                vs, b = self._prenex(a)
                all_vars.extend(vs)
                parts.append(b)
            return tuple(all_vars), (op, *parts)
        return (), t

    # -- main check ------------------------------------------------------------

    def check(self) -> str:
        try:
            return self._check_inner()
        except Unsupported:
            return "unknown"

    def _check_inner(self) -> str:
        ground, quantified = [], []
        for a in self.assertions:
            t = self._skolemize(self._nnf(self._fix_booleq(a)))
            t = self._miniscope(t)
            vs, matrix = self._prenex(t)
            if vs:
                quantified.append((vs, matrix))
            else:
                # split top-level conjunctions for readability of cores
                stack = [matrix]
                while stack:
                    m = stack.pop()
                    if m[0] == "and":
                        stack.extend(m[1:])
                    else:
                        ground.append(m)
        ground.reverse()

        instances = []
        seen = set()
        for _ in range(MAX_INST_ROUNDS):
            universe = self._ground_terms(
                ground + instances + [m for _, m in quantified])
            new = []
            for qi, (vs, matrix) in enumerate(quantified):
                new.extend(self._instantiate(qi, vs, matrix, universe, seen))
                if len(seen) > MAX_INSTANCES:
                    break
            if not new:
                break
            instances.extend(new)

        parts = ground + instances
        formula = ("and", *parts) if parts else TRUE
        verdict, model = self._dpll_check(formula)
        if verdict == "unsat":
            self.model_text = ""
            return "unsat"
        if verdict == "sat" and not quantified and model is not None \
                and self._model_integral(model):
            self.model_text = self._format_model(model)
            return "sat"
        self.model_text = ""
        return "unknown"

    def _ground_terms(self, formulas) -> Dict[str, list]:
        by_sort: Dict[str, list] = {}
        seen = set()

        def visit(t) -> bool:
            if not isinstance(t, tuple):
                return True
            if t[0] == "bvar":
                return False
            if t[0] == "forall":
                visit(t[2])
                return False
            start = 2 if t[0] == "apply" else 1
            ok = True
            for a in t[start:]:
                if isinstance(a, tuple) and not visit(a):
                    ok = False
            if ok and t[0] in ("var", "num", "apply", "+", "-", "*", "/",
                               "abs", "ite", "to_real"):
                if t not in seen:
                    seen.add(t)
                    by_sort.setdefault(self.term_sort(t), []).append(t)
            return ok

        for f in formulas:
            visit(f)
        for srt in by_sort:
            by_sort[srt].sort(key=_term_key)
        return by_sort

    def _instantiate(self, qi, vs, matrix, universe, seen) -> list:
        """Trigger-based instantiation.

        Application subterms of the matrix containing bound variables are
        used as patterns and matched syntactically against the ground term
        universe; variables not covered by any matching trigger are
        enumerated from the (capped) sort pools.  Misses only cost
        completeness, never soundness."""
        bvars = [("bvar", nm, srt) for nm, srt in vs]
        bset = set(bvars)

        # candidate triggers: applications and interpreted terms mentioning
        # at least one bound variable, largest variable coverage first
        cands = []

        def collect(t):
            if not isinstance(t, tuple):
                return
            start = 2 if t[0] == "apply" else 1
            for a in t[start:]:
                if isinstance(a, tuple):
                    collect(a)
            if t[0] in ("apply", "+", "-", "*", "/", "abs", "ite"):
                cover = _bvars_of(t) & bset
                if cover:
                    cands.append((len(cover), _term_size(t), t))

        collect(matrix)
        # prefer high coverage, then the smallest (most matchable) pattern
        cands.sort(key=lambda c: (-c[0], c[1], _term_key(c[2])))

        def match(pat, gnd, binding):
            if pat in bset:
                prev = binding.get(pat)
                if prev is None:
                    srt = pat[2]
                    gs = self.term_sort(gnd)
                    if srt != gs and not (srt == "Real" and gs == "Int"):
                        return None
                    b2 = dict(binding)
                    b2[pat] = gnd
                    return b2
                return binding if prev == gnd else None
            if not isinstance(pat, tuple) or not isinstance(gnd, tuple):
                return binding if pat == gnd else None
            if pat[0] != gnd[0] or len(pat) != len(gnd):
                return None
            start = 2 if pat[0] == "apply" else 1
            if start == 2 and pat[1] != gnd[1]:
                return None
            for pa, ga in zip(pat[start:], gnd[start:]):
                if isinstance(pa, tuple):
                    binding = match(pa, ga, binding)
                    if binding is None:
                        return None
                elif pa != ga:
                    return None
            return binding

        all_ground = [t for ts in universe.values() for t in ts]
        all_ground.sort(key=_term_key)

        triggered_vars = set()
        for _, _, trig in cands:
            triggered_vars |= _bvars_of(trig) & bset

        bindings = [dict()]
        covered = set()
        for _, _, trig in cands:
            newly = (_bvars_of(trig) & bset) - covered
            if not newly:
                continue
            nxt = []
            for b in bindings:
                pat = _substitute(trig, b)
                for g in all_ground:
                    b2 = match(pat, g, b)
                    if b2 is not None:
                        nxt.append(b2)
            if nxt:
                bindings = _dedup_bindings(nxt)
                covered |= _bvars_of(trig) & bset
            if len(bindings) > 400:
                bindings = bindings[:400]
        # Variables that occur in some trigger but found no match make the
        # quantifier unusable this round; blind enumeration of those would
        # blow up the instance set for no benefit.
        if triggered_vars - covered:
            return []
        # enumerate trigger-free leftovers from (capped) sort pools
        leftovers = [bv for bv in bvars if bv not in covered]
        pools = {}
        for bv in leftovers:
            srt = bv[2]
            pool = list(universe.get(srt, []))
            if srt == "Real":
                pool += universe.get("Int", [])
            if not pool and srt in ("Int", "Real"):
                pool = [("num", Q(0))]
            pools[bv] = pool[:12]
        if any(not pools[bv] for bv in leftovers):
            return []
        out = []
        for b in bindings:
            for combo in itertools.product(*(pools[bv] for bv in leftovers)):
                full = dict(b)
                for bv, val in zip(leftovers, combo):
                    full[bv] = val
                key = (qi, tuple(sorted((k[1], _term_key(v))
                                        for k, v in full.items())))
                if key in seen:
                    continue
                if len(seen) > MAX_INSTANCES:
                    return out
                seen.add(key)
                out.append(_substitute(matrix, full))
        return out

    # -- ground solving --------------------------------------------------------

    def _dpll_check(self, formula):
        defs = []
        for t in sorted(self._collect_terms(formula, ("ite", "abs")),
                        key=_term_key):
            if t[0] == "ite":
                defs.append(("or", ("not", t[1]), ("=", t, t[2])))
                defs.append(("or", t[1], ("=", t, t[3])))
            else:  # abs
                zero = ("num", Q(0))
                defs.append((">=", t, t[1]))
                defs.append((">=", t, ("-", zero, t[1])))
                defs.append(("or", ("=", t, t[1]), ("=", t, ("-", zero, t[1]))))
        if defs:
            formula = ("and", formula, *defs)

        # flatten into parts; the search maintains each part's truth value
        parts: List[tuple] = []
        stack = [formula]
        while stack:
            f = stack.pop()
            if f[0] == "and":
                stack.extend(f[1:])
            elif f[0] != "true":
                parts.append(f)
        parts.reverse()

        atoms: Dict[tuple, Optional[bool]] = {}
        part_atoms: List[list] = []
        atom_parts: Dict[tuple, list] = {}

        def collect_atoms(t, acc):
            op = t[0]
            if op in ("true", "false"):
                return
            if op in ("and", "or"):
                for a in t[1:]:
                    collect_atoms(a, acc)
            elif op == "not":
                collect_atoms(t[1], acc)
            else:
                acc.append(t)
                atoms.setdefault(t, None)

        for i, p in enumerate(parts):
            acc = []
            collect_atoms(p, acc)
            part_atoms.append(acc)
            for a in acc:
                atom_parts.setdefault(a, []).append(i)

        def truth(t):
            op = t[0]
            if op == "true":
                return True
            if op == "false":
                return False
            if op == "and":
                out = True
                for a in t[1:]:
                    v = truth(a)
                    if v is False:
                        return False
                    if v is None:
                        out = None
                return out
            if op == "or":
                out = False
                for a in t[1:]:
                    v = truth(a)
                    if v is True:
                        return True
                    if v is None:
                        out = None
                return out
            if op == "not":
                v = truth(t[1])
                return None if v is None else not v
            return atoms.get(t)

        def pick_in(t):
            op = t[0]
            if op in ("true", "false"):
                return None
            if op in ("and", "or"):
                if truth(t) is not None:
                    return None
                for a in t[1:]:
                    r = pick_in(a)
                    if r is not None:
                        return r
                return None
            if op == "not":
                return pick_in(t[1])
            return t if atoms.get(t) is None else None

        state = [truth(p) for p in parts]
        if any(v is False for v in state):
            return "unsat", None

        # trail entries: (atom, value, is_decision, tried_other)
        trail: List[list] = []
        theory_cache: Dict[frozenset, bool] = {}

        def assign(atom, val, decision):
            atoms[atom] = val
            trail.append([atom, val, decision, False])
            ok = True
            for pi in atom_parts.get(atom, []):
                state[pi] = truth(parts[pi])
                if state[pi] is False:
                    ok = False
            return ok

        def unassign(entry):
            atoms[entry[0]] = None
            for pi in atom_parts.get(entry[0], []):
                state[pi] = truth(parts[pi])

        def backtrack() -> bool:
            while trail:
                entry = trail.pop()
                unassign(entry)
                if entry[2] and not entry[3]:
                    ok = assign(entry[0], not entry[1], True)
                    trail[-1][3] = True
                    if ok:
                        return True
            return False

        def find_force(t, want):
            """Undecided atom (with the value that could make t == want),
            when t currently evaluates to None and exactly one child path is
            open."""
            op = t[0]
            if op in ("true", "false"):
                return None
            if op == "not":
                return find_force(t[1], not want)
            if op in ("and", "or"):
                block = False if (op == "and") == want else True
                # want=True on and / want=False on or: all children must
                # reach `want`; force the single undecided one
                if (op == "and" and want) or (op == "or" and not want):
                    undecided = [a for a in t[1:] if truth(a) is None]
                    if len(undecided) == 1:
                        return find_force(undecided[0], want)
                    return None
                # want=True on or / want=False on and: if one child open and
                # the rest already failed, force it
                open_children = [a for a in t[1:]
                                 if truth(a) is None]
                decided_wrong = all(truth(a) == (not want) or truth(a) is None
                                    for a in t[1:])
                if len(open_children) == 1 and decided_wrong:
                    return find_force(open_children[0], want)
                return None
            v = atoms.get(t)
            return (t, want) if v is None else None

        def pick_decision(t, want):
            """First undecided atom with its satisfying polarity."""
            op = t[0]
            if op in ("true", "false"):
                return None
            if op == "not":
                return pick_decision(t[1], not want)
            if op in ("and", "or"):
                for a in t[1:]:
                    if truth(a) is None:
                        r = pick_decision(a, want)
                        if r is not None:
                            return r
                return None
            return (t, want) if atoms.get(t) is None else None

        def theory_consistent():
            lits = frozenset((a, v) for a, v in atoms.items() if v is not None)
            hit = theory_cache.get(lits)
            if hit is not None:
                return hit if hit is False else hit
            ordered = sorted(lits, key=lambda kv: _term_key(kv[0]))
            th = self._theory_check(ordered)
            theory_cache[lits] = th if th is not None else False
            return th if th is not None else False

        while True:
            if any(v is False for v in state):
                if not backtrack():
                    return "unsat", None
                continue
            # unit propagation
            forced = None
            for pi, v in enumerate(state):
                if v is None:
                    forced = find_force(parts[pi], True)
                    if forced is not None:
                        break
            if forced is not None:
                assign(forced[0], forced[1], False)
                continue
            # consistency of the current partial assignment
            th = theory_consistent()
            if th is False:
                if not backtrack():
                    return "unsat", None
                continue
            # decision
            decision = None
            for pi, v in enumerate(state):
                if v is None:
                    decision = pick_decision(parts[pi], True)
                    if decision is not None:
                        break
            if decision is None:
                return "sat", (dict(atoms), th)
            assign(decision[0], decision[1], True)

    def _collect_terms(self, t, heads) -> set:
        out = set()

        def visit(x):
            if not isinstance(x, tuple):
                return
            if x[0] in heads:
                out.add(x)
            start = 2 if x[0] == "apply" else 1
            for a in x[start:]:
                if isinstance(a, tuple):
                    visit(a)

        visit(t)
        return out

    # -- theory check -----------------------------------------------------------

    def _theory_check(self, lits):
        eqs, diseqs, numcons, boolfacts = [], [], [], []
        for atom, val in lits:
            op = atom[0]
            if op == "=":
                (eqs if val else diseqs).append((atom[1], atom[2]))
            elif op in _NUM_PREDS:
                a, b = atom[1], atom[2]
                if op in (">=", ">"):
                    a, b = b, a
                    op = "<=" if op == ">=" else "<"
                if val:
                    numcons.append((op, a, b))
                else:
                    # not (a <= b)  ==  b < a ; not (a < b) == b <= a
                    numcons.append(("<" if op == "<=" else "<=", b, a))
            elif op in ("apply", "var"):
                boolfacts.append((atom, val))
            else:
                raise Unsupported(f"atom {atom!r} in theory check")

        uf = _UnionFind()
        terms = set()

        def register(t):
            if not isinstance(t, tuple) or t in terms:
                return
            terms.add(t)
            uf.add(t)
            start = 2 if t[0] == "apply" else 1
            if t[0] not in ("var", "num"):
                for a in t[start:]:
                    register(a)

        register(TRUE)
        register(FALSE)
        for a, b in eqs + diseqs:
            register(a)
            register(b)
        for _, a, b in numcons:
            register(a)
            register(b)
        for t, val in boolfacts:
            register(t)
            eqs.append((t, TRUE if val else FALSE))

        for a, b in eqs:
            uf.union(a, b)

        def congruence_round() -> bool:
            changed = False
            sig = {}
            for t in sorted(terms, key=_term_key):
                if t[0] in ("var", "num"):
                    continue
                start = 2 if t[0] == "apply" else 1
                key = (t[0], t[1] if t[0] == "apply" else None,
                       tuple(uf.find(a) if isinstance(a, tuple) else a
                             for a in t[start:]))
                if key in sig:
                    if uf.union(sig[key], t):
                        changed = True
                else:
                    sig[key] = t
            return changed

        while congruence_round():
            pass
        if uf.find(TRUE) == uf.find(FALSE):
            return None
        for a, b in diseqs:
            if uf.find(a) == uf.find(b):
                return None

        # arithmetic over monomials of congruence-class representatives
        monomials: Dict[str, tuple] = {}
        lincons: List[LinCons] = []
        expanding: set = set()

        def poly(t) -> Optional[dict]:
            if t[0] == "num":
                return {(): t[1]}
            if t[0] == "to_real":
                return poly(t[1])
            if t[0] == "+":
                out = {}
                for a in t[1:]:
                    p = poly(a)
                    if p is None:
                        return None
                    for k, v in p.items():
                        out[k] = out.get(k, Q(0)) + v
                return out
            if t[0] == "-":
                ps = [poly(a) for a in t[1:]]
                if any(p is None for p in ps):
                    return None
                if len(ps) == 1:
                    return {k: -v for k, v in ps[0].items()}
                out = dict(ps[0])
                for k, v in ps[1].items():
                    out[k] = out.get(k, Q(0)) - v
                return out
            if t[0] == "*":
                out = {(): Q(1)}
                for a in t[1:]:
                    p = poly(a)
                    if p is None:
                        return None
                    nxt = {}
                    for k1, v1 in out.items():
                        for k2, v2 in p.items():
                            k = tuple(sorted(k1 + k2, key=_term_key))
                            nxt[k] = nxt.get(k, Q(0)) + v1 * v2
                    out = nxt
                return out
            if t[0] == "/":
                p2 = poly(t[2])
                if p2 is not None and list(p2.keys()) == [()] and p2[()] != 0:
                    p1 = poly(t[1])
                    if p1 is not None:
                        return {k: v / p2[()] for k, v in p1.items()}
                return {(uf.find(t),): Q(1)}
            # base term (var, apply, ite, abs): canonicalize through its
            # congruence class; arithmetic representatives are expanded so
            # that asserted equalities like t = p + 1 rewrite polynomials
            rep = uf.find(t)
            if rep[0] == "num":
                return {(): rep[1]}
            if rep[0] in ("+", "-", "*", "to_real") and rep not in expanding:
                expanding.add(rep)
                out = poly(rep)
                expanding.discard(rep)
                if out is not None:
                    return out
            return {(rep,): Q(1)}

        def lin_of(a, b):
            pa, pb = poly(a), poly(b)
            if pa is None or pb is None:
                return None, None
            diff = dict(pa)
            for k, v in pb.items():
                diff[k] = diff.get(k, Q(0)) - v
            coeffs, rhs = {}, Q(0)
            for k, v in diff.items():
                if v == 0:
                    continue
                if k == ():
                    rhs -= v
                else:
                    nm = _mono_name(k)
                    monomials[nm] = k
                    coeffs[nm] = coeffs.get(nm, Q(0)) + v
            return coeffs, rhs

        numeric_sorts = ("Int", "Real")
        for op, a, b in numcons:
            coeffs, rhs = lin_of(a, b)
            if coeffs is None:
                continue
            lincons.append(LinCons(coeffs, "le" if op == "<=" else "lt", rhs))
        for a, b in eqs:
            if self.term_sort(a) in numeric_sorts or \
                    self.term_sort(b) in numeric_sorts:
                coeffs, rhs = lin_of(a, b)
                if coeffs is None:
                    continue
                lincons.append(LinCons(coeffs, "eq", rhs))

        if feasible(lincons, nonneg=()) is None:
            return None

        if any(len(k) > 1 for k in monomials.values()):
            self._nonlinear_lemmas(monomials, lincons)
            if feasible(lincons, nonneg=()) is None:
                return None

        # numeric disequalities: conflict iff the equality is entailed; the
        # current model screens out the common case cheaply
        model = feasible(lincons, nonneg=())

        def model_value(coeffs, mdl):
            return sum((q * mdl.get(v, Q(0)) for v, q in coeffs.items()), Q(0))

        for a, b in diseqs:
            if self.term_sort(a) not in numeric_sorts and \
                    self.term_sort(b) not in numeric_sorts:
                continue
            coeffs, rhs = lin_of(a, b)
            if coeffs is None:
                continue
            if model is not None and model_value(coeffs, model) != rhs:
                continue  # the model already separates the two sides
            lt = feasible(lincons + [LinCons(coeffs, "lt", rhs)], nonneg=())
            if lt is not None:
                model = lt
                continue
            gt = feasible(lincons + [LinCons({k: -v for k, v in coeffs.items()},
                                             "lt", -rhs)], nonneg=())
            if gt is None:
                return None
            model = gt

        self._last_monomials = dict(monomials)
        return model if model is not None else {}

    def _nonlinear_lemmas(self, monomials, lincons):
        def entails(extra: LinCons) -> bool:
            return feasible(lincons + [extra], nonneg=()) is None

        def single(f) -> str:
            nm = _mono_name((f,))
            monomials.setdefault(nm, (f,))
            return nm

        def entails_nonneg(f) -> bool:
            return entails(LinCons({single(f): Q(1)}, "lt", Q(0)))

        def entails_le_comb(lhs: dict, rhs: dict) -> bool:
            # sum(lhs) <= sum(rhs) entailed iff sum(rhs) < sum(lhs) unsat
            coeffs = {}
            for f, q in rhs.items():
                coeffs[single(f)] = coeffs.get(single(f), Q(0)) + q
            for f, q in lhs.items():
                coeffs[single(f)] = coeffs.get(single(f), Q(0)) - q
            return entails(LinCons(coeffs, "lt", Q(0)))

        factors = sorted({f for k in monomials.values() for f in k},
                         key=_term_key)
        nonneg = {f for f in factors if entails_nonneg(f)}

        items = sorted(monomials.items())
        for nm, k in items:
            if len(k) > 1 and all(f in nonneg for f in k):
                lincons.append(LinCons({nm: Q(-1)}, "le", Q(0)))

        # group monomials sharing a common "rest": removing one factor from
        # each member of the group leaves the same multiset
        groups: Dict[tuple, list] = {}
        for nm, k in items:
            if len(k) < 2:
                continue
            for i in range(len(k)):
                if i > 0 and k[i] == k[i - 1]:
                    continue
                rest = k[:i] + k[i + 1:]
                groups.setdefault(rest, []).append((k[i], nm))
        for rest, members in sorted(groups.items(),
                                    key=lambda kv: _term_key(kv[0])):
            if not all(f in nonneg for f in rest):
                continue
            members = sorted(set(members), key=lambda m: _term_key(m[0]))
            if len(members) < 2:
                continue
            pool = [m for m in members if m[0] in nonneg]
            # factor monotonicity: a <= b gives a*rest <= b*rest
            for (a, na), (b, nb) in itertools.permutations(pool, 2):
                if entails_le_comb({a: Q(1)}, {b: Q(1)}):
                    lincons.append(LinCons({na: Q(1), nb: Q(-1)}, "le", Q(0)))
            # sum splitting: a <= b + c gives a*rest <= b*rest + c*rest
            if len(pool) >= 3:
                for (a, na) in pool:
                    for (b, nb), (c, nc) in itertools.combinations(
                            [m for m in pool if m[0] != a], 2):
                        if entails_le_comb({a: Q(1)}, {b: Q(1), c: Q(1)}):
                            lincons.append(LinCons(
                                {na: Q(1), nb: Q(-1), nc: Q(-1)}, "le", Q(0)))
                        if entails_le_comb({b: Q(1), c: Q(1)}, {a: Q(1)}):
                            lincons.append(LinCons(
                                {nb: Q(1), nc: Q(1), na: Q(-1)}, "le", Q(0)))

    def _model_integral(self, model) -> bool:
        _, numeric = model
        monos = getattr(self, "_last_monomials", {})
        for nm, val in numeric.items():
            k = monos.get(nm)
            if k is not None and len(k) == 1 and \
                    self.term_sort(k[0]) == "Int" and Q(val).denominator != 1:
                return False
        return True

    def _format_model(self, model) -> str:
        atoms, numeric = model
        lines = ["(model"]
        monos = getattr(self, "_last_monomial", None) or \
            getattr(self, "_last_monomials", {})
        shown = set()
        for nm, val in sorted(numeric.items()):
            k = monos.get(nm)
            if k is not None and len(k) == 1 and k[0][0] == "var":
                srt = self.term_sort(k[0])
                v = Q(val)
                body = str(v) if v.denominator == 1 and srt == "Int" else \
                    f"(/ {v.numerator} {v.denominator})" if v.denominator != 1 \
                    else f"{v.numerator}.0"
                lines.append(f"  (define-fun {k[0][1]} () {srt} {body})")
                shown.add(k[0][1])
        for atom, val in sorted(((a, v) for a, v in atoms.items()
                                 if v is not None),
                                key=lambda kv: _term_key(kv[0])):
            if atom[0] == "var" and atom[1] not in shown:
                lines.append(f"  (define-fun {atom[1]} () Bool "
                             f"{'true' if val else 'false'})")
        lines.append(")")
        return "\n".join(lines)


def _dist_or_over_and(t, budget=256):
    """Distribute or over and (bounded); returns an equivalent formula."""
    if not isinstance(t, tuple) or t[0] not in ("and", "or"):
        return t
    args = [_dist_or_over_and(a, budget) for a in t[1:]]
    if t[0] == "and":
        return ("and", *args)
    for i, a in enumerate(args):
        if a[0] == "and":
            rest = args[:i] + args[i + 1:]
            size = sum(_term_size(x) for x in args)
            if size > budget:
                break
            return ("and", *[_dist_or_over_and(("or", c, *rest), budget)
                             for c in a[1:]])
    return ("or", *args)


def _bvars_of(t) -> set:
    out = set()

    def visit(x):
        if not isinstance(x, tuple):
            return
        if x[0] == "bvar":
            out.add(x)
            return
        start = 2 if x[0] == "apply" else 1
        for a in x[start:]:
            if isinstance(a, tuple):
                visit(a)

    visit(t)
    return out


def _term_size(t) -> int:
    if not isinstance(t, tuple):
        return 1
    return 1 + sum(_term_size(a) for a in t[1:] if isinstance(a, tuple))


def _dedup_bindings(bs: list) -> list:
    seen = set()
    out = []
    for b in bs:
        key = tuple(sorted((k[1], _term_key(v)) for k, v in b.items()))
        if key not in seen:
            seen.add(key)
            out.append(b)
    return out


def _mono_name(key: tuple) -> str:
    return "m|" + "|".join(repr(k) for k in key)


def _multiset_diff(a: tuple, b: tuple) -> tuple:
    out = list(a)
    for x in b:
        if x in out:
            out.remove(x)
    return tuple(out)


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def add(self, x):
        if x not in self.parent:
            self.parent[x] = x

    def find(self, x):
        self.add(x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # prefer numerals as representatives, then deterministic order
        if ra[0] == "num" or (rb[0] != "num" and _term_key(ra) < _term_key(rb)):
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb
        return True


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] != "-":
        with open(argv[0]) as fh:
            text = fh.read()
    else:
        text = sys.stdin.read()
    solver = Solver()
    try:
        for line in solver.run_script(text):
            print(line)
    except SmtError as ex:
        print("unknown")
        print(f"; error: {ex}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
