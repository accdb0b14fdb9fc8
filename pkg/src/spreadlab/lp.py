"""Linear programs ``min c.x  s.t.  A_ub x <= b_ub, A_eq x = b_eq, x >= 0``.

``mode="exact"`` runs a two-phase tableau simplex over ``Fraction``. The
entering column is the most negative reduced cost, switching to Bland's
lowest-index rule during runs of degenerate pivots; ties in the ratio test go
to the lowest basic index. The returned basis is a deterministic function of
the input.
``mode="float"`` delegates to HiGHS through ``scipy.optimize.linprog`` and
reports the primal/dual objective gap.

Dual values follow the sensitivity convention ``d fun / d b``: for a
minimisation, multipliers of ``<=`` rows are nonpositive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

Number = Fraction | float
EXACT_VAR_CAP = 2000
BLAND_AFTER = 8


class LPError(RuntimeError):
    pass


@dataclass
class LPResult:
    status: str  # optimal | infeasible | unbounded
    mode: str
    x: list[Number] | None = None
    fun: Number | None = None
    duals_ub: list[Number] = field(default_factory=list)
    duals_eq: list[Number] = field(default_factory=list)
    farkas_ub: list[Number] | None = None
    farkas_eq: list[Number] | None = None
    ray: list[Number] | None = None
    gap: float = 0.0
    basis: tuple[int, ...] = ()

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _rows(A, width: int) -> list[list]:
    if A is None:
        return []
    rows = [list(r) for r in A]
    for r in rows:
        if len(r) != width:
            raise ValueError(f"constraint row has {len(r)} entries, expected {width}")
    return rows


def lp_solve(c: Sequence, A_ub=None, b_ub=None, A_eq=None, b_eq=None,
             mode: str = "exact") -> LPResult:
    nx = len(c)
    Aub = _rows(A_ub, nx)
    Aeq = _rows(A_eq, nx)
    bub = list(b_ub) if b_ub is not None else []
    beq = list(b_eq) if b_eq is not None else []
    if len(Aub) != len(bub) or len(Aeq) != len(beq):
        raise ValueError("row count and right-hand side length differ")
    if mode == "exact":
        if nx > EXACT_VAR_CAP:
            raise LPError(f"exact mode is capped at {EXACT_VAR_CAP} variables (got {nx})")
        return _simplex_exact(c, Aub, bub, Aeq, beq)
    if mode == "float":
        return _solve_float(c, Aub, bub, Aeq, beq)
    raise ValueError(f"unknown mode {mode!r}")


def _F(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def _lcm_den(vals) -> int:
    out = 1
    for v in vals:
        out = math.lcm(out, v.denominator)
    return out


def _simplex_exact(c, Aub, bub, Aeq, beq) -> LPResult:
    """Fraction-free tableau: ``M / D`` is the current tableau, all entries integers.

    Row ``i`` of the input is scaled by ``L_i`` (clearing denominators) and by
    the sign ``sigma_i`` of its right-hand side; slack and artificial columns
    keep coefficient 1, so the artificial block holds ``D B^{-1}`` of the
    scaled system and multipliers are unscaled by ``sigma_i L_i`` at the end.
    """
    nx = len(c)
    mu, me = len(Aub), len(Aeq)
    m = mu + me
    # columns: x (nx) | slacks (mu) | artificials (m)
    ncol = nx + mu + m
    art0 = nx + mu
    zero, one = Fraction(0), Fraction(1)
    M: list[list[int]] = []
    rhs: list[int] = []
    scale: list[int] = []
    for i in range(m):
        if i < mu:
            coeffs, b = [_F(v) for v in Aub[i]], _F(bub[i])
        else:
            coeffs, b = [_F(v) for v in Aeq[i - mu]], _F(beq[i - mu])
        L = _lcm_den(coeffs + [b]) * (-1 if b < 0 else 1)
        row = [int(v * L) for v in coeffs] + [0] * (mu + m)
        if i < mu:
            row[nx + i] = 1 if L > 0 else -1
        row[art0 + i] = 1
        M.append(row)
        rhs.append(int(b * L))
        scale.append(L)
    basis = [art0 + i for i in range(m)]
    D = 1
    obj: list[int] = []  # D * K * reduced costs, kept current by pivot()

    def pivot(r: int, col: int) -> None:
        nonlocal D
        prow = M[r]
        pv = prow[col]
        pr = rhs[r]
        for i in range(m):
            if i == r:
                continue
            Mi = M[i]
            f = Mi[col]
            if f:
                for j in range(ncol):
                    Mi[j] = (pv * Mi[j] - f * prow[j]) // D
                rhs[i] = (pv * rhs[i] - f * pr) // D
            elif pv != D:
                for j in range(ncol):
                    if Mi[j]:
                        Mi[j] = pv * Mi[j] // D
                rhs[i] = pv * rhs[i] // D
        if obj:
            f = obj[col]
            if f:
                for j in range(ncol):
                    obj[j] = (pv * obj[j] - f * prow[j]) // D
            elif pv != D:
                for j in range(ncol):
                    obj[j] = pv * obj[j] // D
        D = pv
        if D < 0:
            for Mi in M:
                for j in range(ncol):
                    Mi[j] = -Mi[j]
            for i in range(m):
                rhs[i] = -rhs[i]
            for j in range(len(obj)):
                obj[j] = -obj[j]
            D = -D
        basis[r] = col

    def run(cost: list[Fraction], allowed: int) -> tuple[str, int | None]:
        # Dantzig pricing; Bland's rule while pivots are degenerate, which rules out cycling
        K = _lcm_den(cost)
        ck = [int(v * K) for v in cost]
        obj[:] = [D * v for v in ck]
        for i, bv in enumerate(basis):
            if ck[bv]:
                Mi = M[i]
                for j in range(ncol):
                    if Mi[j]:
                        obj[j] -= ck[bv] * Mi[j]
        stall = 0
        while True:
            enter = None
            best_red = 0
            for j in range(allowed):
                red = obj[j]
                if red < best_red:
                    enter, best_red = j, red
                    if stall >= BLAND_AFTER:
                        break
            if enter is None:
                return "optimal", None
            leave = None
            for i in range(m):
                a = M[i][enter]
                if a > 0:
                    if leave is None:
                        leave = i
                        continue
                    lhs_, rhs_ = rhs[i] * M[leave][enter], rhs[leave] * a
                    if lhs_ < rhs_ or (lhs_ == rhs_ and basis[i] < basis[leave]):
                        leave = i
            if leave is None:
                return "unbounded", enter
            stall = stall + 1 if rhs[leave] == 0 else 0
            pivot(leave, enter)

    def duals(cost: list[Fraction]) -> list[Fraction]:
        # multipliers of the scaled rows: c_B B^{-1}, with D B^{-1} in the artificial block
        y = [zero] * m
        for i, bv in enumerate(basis):
            cb = cost[bv]
            if cb:
                Mi = M[i]
                for k in range(m):
                    if Mi[art0 + k]:
                        y[k] += cb * Mi[art0 + k]
        return [y[k] * scale[k] / D for k in range(m)]

    # phase 1
    cost1 = [zero] * art0 + [one] * m
    run(cost1, ncol)
    infeas = sum(rhs[i] for i, bv in enumerate(basis) if bv >= art0)
    if infeas > 0:
        w = duals(cost1)
        far = [-v for v in w]
        res = LPResult("infeasible", "exact", farkas_ub=far[:mu], farkas_eq=far[mu:],
                       basis=tuple(basis))
        if not _check_farkas(Aub, bub, Aeq, beq, res.farkas_ub, res.farkas_eq):
            raise LPError("internal error: Farkas certificate failed verification")
        return res
    # drive zero-level artificials out of the basis where possible
    obj.clear()
    for i in range(m):
        if basis[i] >= art0:
            col = next((j for j in range(art0) if M[i][j] != 0), None)
            if col is not None:
                pivot(i, col)
    # phase 2: artificials may stay basic (redundant rows) but never enter
    cost2 = [_F(v) for v in c] + [zero] * (mu + m)
    status, enter = run(cost2, art0)
    if status == "unbounded":
        ray = [zero] * nx
        if enter < nx:
            ray[enter] = one
        for i, bv in enumerate(basis):
            if bv < nx:
                ray[bv] = Fraction(-M[i][enter], D)
        return LPResult("unbounded", "exact", ray=ray, basis=tuple(basis))
    x = [zero] * nx
    for i, bv in enumerate(basis):
        if bv < nx:
            x[bv] = Fraction(rhs[i], D)
    fun = sum((cost2[j] * x[j] for j in range(nx)), zero)
    y = duals(cost2)
    return LPResult("optimal", "exact", x=x, fun=fun, duals_ub=y[:mu], duals_eq=y[mu:],
                    basis=tuple(basis))


def _check_farkas(Aub, bub, Aeq, beq, u_ub, u_eq) -> bool:
    """``u_ub >= 0``, ``A^T u >= 0`` and ``b.u < 0`` prove infeasibility."""
    if any(u < 0 for u in u_ub):
        return False
    nx = len(Aub[0]) if Aub else (len(Aeq[0]) if Aeq else 0)
    for j in range(nx):
        s = sum(u * r[j] for u, r in zip(u_ub, Aub)) + sum(u * r[j] for u, r in zip(u_eq, Aeq))
        if s < 0:
            return False
    bu = sum(u * b for u, b in zip(u_ub, bub)) + sum(u * b for u, b in zip(u_eq, beq))
    return bu < 0


def _solve_float(c, Aub, bub, Aeq, beq) -> LPResult:
    from scipy.optimize import linprog

    nx = len(c)
    kw = {}
    if Aub:
        kw["A_ub"] = np.array(Aub, dtype=float)
        kw["b_ub"] = np.array(bub, dtype=float)
    if Aeq:
        kw["A_eq"] = np.array(Aeq, dtype=float)
        kw["b_eq"] = np.array(beq, dtype=float)
    res = linprog(np.array(c, dtype=float), bounds=[(0, None)] * nx, method="highs", **kw)
    if res.status == 2:
        return _float_farkas(Aub, bub, Aeq, beq)
    if res.status == 3:
        return LPResult("unbounded", "float")
    if res.status != 0:
        raise LPError(f"HiGHS failed: {res.message}")
    y_ub = list(res.ineqlin.marginals) if Aub else []
    y_eq = list(res.eqlin.marginals) if Aeq else []
    dual_obj = float(np.dot(y_ub, bub) if Aub else 0.0) + float(np.dot(y_eq, beq) if Aeq else 0.0)
    return LPResult("optimal", "float", x=list(res.x), fun=float(res.fun), duals_ub=y_ub,
                    duals_eq=y_eq, gap=abs(float(res.fun) - dual_obj))


def _float_farkas(Aub, bub, Aeq, beq) -> LPResult:
    # min b.u  s.t.  A^T u >= 0,  b.u >= -1,  u_ub >= 0,  u_eq free
    from scipy.optimize import linprog

    mu, me = len(Aub), len(Aeq)
    A = np.array(Aub + Aeq, dtype=float)
    b = np.array(list(bub) + list(beq), dtype=float)
    A_ub = np.vstack([-A.T, -b[None, :]])
    b_ub = np.concatenate([np.zeros(A.shape[1]), [1.0]])
    bounds = [(0, None)] * mu + [(None, None)] * me
    aux = linprog(b, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    u = list(aux.x) if aux.status == 0 else None
    return LPResult("infeasible", "float", farkas_ub=u[:mu] if u else None,
                    farkas_eq=u[mu:] if u else None)
