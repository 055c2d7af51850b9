"""Exact-rational linear feasibility via phase-1 simplex.

All arithmetic is over `fractions.Fraction`; there are no tolerances anywhere.
Strict inequalities are handled with an infinitesimal: constants are pairs
(r, k) meaning r + k*eps for a symbolic eps > 0, compared lexicographically.
Bland's rule guarantees termination.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

Q = Fraction


@dataclass(frozen=True)
class EpsNum:
    """r + k*eps with eps a positive infinitesimal."""

    r: Fraction
    k: Fraction = Q(0)

    def __add__(self, other: "EpsNum") -> "EpsNum":
        return EpsNum(self.r + other.r, self.k + other.k)

    def __sub__(self, other: "EpsNum") -> "EpsNum":
        return EpsNum(self.r - other.r, self.k - other.k)

    def __neg__(self) -> "EpsNum":
        return EpsNum(-self.r, -self.k)

    def scale(self, q: Fraction) -> "EpsNum":
        return EpsNum(self.r * q, self.k * q)

    def __lt__(self, other: "EpsNum") -> bool:
        return (self.r, self.k) < (other.r, other.k)

    def __le__(self, other: "EpsNum") -> bool:
        return (self.r, self.k) <= (other.r, other.k)

    def is_zero(self) -> bool:
        return self.r == 0 and self.k == 0


EPS_ZERO = EpsNum(Q(0))


@dataclass(frozen=True)
class LinCons:
    """coeffs . x  (op)  rhs, with op one of 'le', 'lt', 'eq'."""

    coeffs: Mapping[str, Fraction]
    op: str
    rhs: Fraction

    def __post_init__(self):
        if self.op not in ("le", "lt", "eq"):
            raise ValueError(f"bad constraint op {self.op!r}")


def _solve_phase1(rows, rhss, ncols):
    """min sum of artificials for  A x = b, x >= 0.

    rows: list of dict col->Fraction, rhss: list of EpsNum (made >= 0 by
    caller).  Returns (optimum: EpsNum, solution: dict col->EpsNum).  The
    reduced-cost row is maintained incrementally; Bland's rule guarantees
    termination.
    """
    m = len(rows)
    tab = []
    for i, row in enumerate(rows):
        r = dict(row)
        r[ncols + i] = Q(1)
        tab.append(r)
    basis = [ncols + i for i in range(m)]

    # z[j] = c_j - sum_i c_B[i] * tab[i][j] with c = 1 on artificials;
    # initially c_B = all ones, so z[j] = -sum_i tab[i][j] for real columns.
    z = {}
    for i in range(m):
        for j, v in rows[i].items():
            z[j] = z.get(j, Q(0)) - v

    while True:
        entering = None
        for j in sorted(z):
            if z[j] < 0:
                entering = j
                break  # Bland: smallest improving column index
        if entering is None:
            break
        leaving = None
        best = None
        for i in range(m):
            a = tab[i].get(entering, Q(0))
            if a > 0:
                ratio = rhss[i].scale(Q(1) / a)
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[leaving]
                ):
                    best = ratio
                    leaving = i
        if leaving is None:
            raise RuntimeError("phase-1 unbounded")
        piv = tab[leaving][entering]
        tab[leaving] = {j: v / piv for j, v in tab[leaving].items() if v}
        rhss[leaving] = rhss[leaving].scale(Q(1) / piv)
        for i in range(m):
            if i == leaving:
                continue
            a = tab[i].get(entering, Q(0))
            if a:
                for j, v in tab[leaving].items():
                    nv = tab[i].get(j, Q(0)) - a * v
                    if nv:
                        tab[i][j] = nv
                    else:
                        tab[i].pop(j, None)
                rhss[i] = rhss[i] - rhss[leaving].scale(a)
        zc = z.get(entering, Q(0))
        if zc:
            for j, v in tab[leaving].items():
                nv = z.get(j, Q(0)) - zc * v
                if nv:
                    z[j] = nv
                else:
                    z.pop(j, None)
        basis[leaving] = entering

    opt = EPS_ZERO
    for i in range(m):
        if basis[i] >= ncols:
            opt = opt + rhss[i]
    sol = {}
    for i in range(m):
        if basis[i] < ncols:
            sol[basis[i]] = rhss[i]
    return opt, sol


def feasible(constraints, nonneg=(), model_hint_vars=()):
    """Decide feasibility of a rational linear system.

    constraints: iterable of LinCons.  Variables listed in `nonneg` are
    constrained to be >= 0; all others range over all of Q.  Returns a model
    as dict var -> Fraction, or None when infeasible.  Strict constraints are
    honored exactly (the returned model satisfies them strictly).
    """
    constraints = list(constraints)
    nonneg = set(nonneg)
    names = []
    seen = set()
    for c in constraints:
        for v in c.coeffs:
            if v not in seen:
                seen.add(v)
                names.append(v)
    for v in model_hint_vars:
        if v not in seen:
            seen.add(v)
            names.append(v)

    # Column layout: nonneg var -> one column; free var -> pos and neg parts.
    col_of = {}
    ncols = 0
    for v in names:
        if v in nonneg:
            col_of[v] = (ncols, None)
            ncols += 1
        else:
            col_of[v] = (ncols, ncols + 1)
            ncols += 2

    rows = []
    rhss = []

    def add_row(coeffs, rhs: EpsNum, slack_sign):
        row = {}
        for v, q in coeffs.items():
            if not q:
                continue
            p, n = col_of[v]
            row[p] = row.get(p, Q(0)) + q
            if n is not None:
                row[n] = row.get(n, Q(0)) - q
        nonlocal ncols
        if slack_sign:
            row[ncols] = Q(slack_sign)
            ncols += 1
        if rhs < EPS_ZERO:
            row = {j: -q for j, q in row.items()}
            rhs = -rhs
        rows.append(row)
        rhss.append(rhs)

    for c in constraints:
        if c.op == "le":
            add_row(c.coeffs, EpsNum(c.rhs), +1)
        elif c.op == "lt":
            add_row(c.coeffs, EpsNum(c.rhs, Q(-1)), +1)
        else:
            add_row(c.coeffs, EpsNum(c.rhs), 0)

    opt, sol = _solve_phase1(rows, rhss, ncols)
    if not opt.is_zero():
        return None

    # Concretize eps: try successively smaller positive rationals until the
    # original system checks out (guaranteed for small enough eps).
    vals_eps = {}
    for v in names:
        p, n = col_of[v]
        x = sol.get(p, EPS_ZERO)
        if n is not None:
            x = x - sol.get(n, EPS_ZERO)
        vals_eps[v] = x

    eps = Q(1)
    while True:
        model = {v: x.r + x.k * eps for v, x in vals_eps.items()}
        if _check_model(constraints, nonneg, model):
            return model
        eps /= 2
        if eps < Q(1, 2**200):  # cannot happen if phase 1 was exact
            raise RuntimeError("failed to concretize epsilon")


def _check_model(constraints, nonneg, model):
    for v in nonneg:
        if v in model and model[v] < 0:
            return False
    for c in constraints:
        lhs = sum((q * model.get(v, Q(0)) for v, q in c.coeffs.items()), Q(0))
        if c.op == "le" and not lhs <= c.rhs:
            return False
        if c.op == "lt" and not lhs < c.rhs:
            return False
        if c.op == "eq" and lhs != c.rhs:
            return False
    return True
