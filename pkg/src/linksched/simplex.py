"""Dense two-phase revised simplex method.

Solves ``min c @ x  s.t.  A_ub @ x <= b_ub,  A_eq @ x == b_eq,  x >= 0``.

The basis matrix is refactorized (dense LU) at every pivot, so round-off
never accumulates across iterations.  Pricing is Dantzig's most-negative
reduced cost with a Harris two-pass ratio test; after ``bland_after``
consecutive degenerate pivots the method switches to Bland's smallest-index
rule (entering and leaving) until the objective moves again, which rules
out cycling.  Sized for problems with a few hundred rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import SimplexIterationError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded-guard"

PIVOT_TOL = 1e-10
COST_TOL = 1e-10
FEAS_TOL = 1e-9
# basic values below this are round-off; snapping them keeps degenerate
# steps exactly degenerate
ZERO_TOL = 1e-12
HARRIS_TOL = 1e-9


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray | None
    fun: float | None
    basis: np.ndarray | None
    iterations: int


class _Solver:
    def __init__(self, A: np.ndarray, b: np.ndarray, basis: np.ndarray, max_iter: int, bland_after: int):
        self.A = A
        self.b = b
        self.basis = basis
        self.max_iter = max_iter
        self.bland_after = bland_after
        self.it = 0

    def factor(self):
        self.lu = sla.lu_factor(self.A[:, self.basis])
        xb = sla.lu_solve(self.lu, self.b)
        xb[np.abs(xb) < ZERO_TOL] = 0.0
        self.xb = xb

    def run(self, cost: np.ndarray, n_enter: int) -> str:
        """Iterate to optimality for ``cost``; only columns < n_enter may enter."""
        degenerate = 0
        while True:
            self.factor()
            duals = sla.lu_solve(self.lu, cost[self.basis], trans=1)
            red = cost[:n_enter] - duals @ self.A[:, :n_enter]
            red[self.basis[self.basis < n_enter]] = 0.0
            candidates = np.flatnonzero(red < -COST_TOL)
            if candidates.size == 0:
                return OPTIMAL
            if self.it >= self.max_iter:
                raise SimplexIterationError(f"simplex exceeded {self.max_iter} iterations")
            if degenerate >= self.bland_after:
                col = int(candidates[0])
            else:
                col = int(candidates[np.argmin(red[candidates])])
            d = sla.lu_solve(self.lu, self.A[:, col])
            pos = np.flatnonzero(d > PIVOT_TOL)
            if pos.size == 0:
                return UNBOUNDED
            xb = np.clip(self.xb[pos], 0.0, None)
            dp = d[pos]
            if degenerate >= self.bland_after:
                ratios = xb / dp
                ties = np.flatnonzero(ratios <= ratios.min() + ZERO_TOL)
                k = ties[np.argmin(self.basis[pos[ties]])]
            else:
                # Harris two-pass test: largest pivot among rows whose ratio
                # is within the feasibility tolerance of the minimum
                bound = ((xb + HARRIS_TOL) / dp).min()
                ok = np.flatnonzero(xb / dp <= bound)
                k = ok[np.argmax(dp[ok])]
            row = int(pos[k])
            step = xb[k] / dp[k]
            self.basis[row] = col
            self.it += 1
            degenerate = degenerate + 1 if step <= ZERO_TOL else 0


def simplex(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, *,
            max_iter: int = 50_000, bland_after: int = 1000) -> SimplexResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    n_ub = A_ub.shape[0]
    m = n_ub + A_eq.shape[0]

    # standard form [A_ub I; A_eq 0] [x; s] = b with b >= 0
    n_std = n + n_ub
    A = np.zeros((m, n_std))
    A[:n_ub, :n] = A_ub
    A[:n_ub, n:] = np.eye(n_ub)
    A[n_ub:, :n] = A_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1.0
    b = np.abs(b)

    # a slack starts basic when its row kept its sign; other rows get artificials
    art_rows = np.array([i for i in range(m) if i >= n_ub or neg[i]], dtype=int)
    n_art = art_rows.size
    A_full = np.hstack([A, np.zeros((m, n_art))])
    A_full[art_rows, n_std + np.arange(n_art)] = 1.0
    basis = np.empty(m, dtype=int)
    basis[:n_ub] = n + np.arange(n_ub)
    basis[art_rows] = n_std + np.arange(n_art)

    s = _Solver(A_full, b, basis, max_iter, bland_after)
    if n_art:
        cost1 = np.zeros(n_std + n_art)
        cost1[n_std:] = 1.0
        s.run(cost1, n_std + n_art)
        s.factor()
        infeas = float(cost1[s.basis] @ s.xb)
        if infeas > FEAS_TOL * max(1.0, b.max()):
            return SimplexResult(INFEASIBLE, None, None, None, s.it)
        _purge_artificials(s, n_std)

    cost2 = np.zeros(s.A.shape[1])
    cost2[:n] = c
    status = s.run(cost2, n_std)
    if status != OPTIMAL:
        return SimplexResult(status, None, None, s.basis.copy(), s.it)
    s.factor()
    xs = np.zeros(s.A.shape[1])
    xs[s.basis] = np.clip(s.xb, 0.0, None)
    x = xs[:n]
    return SimplexResult(OPTIMAL, x, float(c @ x), s.basis.copy(), s.it)


def _purge_artificials(s: _Solver, n_std: int) -> None:
    """Pivot zero-level artificials out of the basis, dropping redundant rows,
    then delete the artificial columns."""
    row = 0
    while row < s.basis.size:
        if s.basis[row] < n_std:
            row += 1
            continue
        s.factor()
        e = np.zeros(s.basis.size)
        e[row] = 1.0
        # row `row` of B^-1 A over the structural columns
        tab_row = sla.lu_solve(s.lu, e, trans=1) @ s.A[:, :n_std]
        tab_row[s.basis[s.basis < n_std]] = 0.0
        nz = np.flatnonzero(np.abs(tab_row) > PIVOT_TOL)
        if nz.size:
            s.basis[row] = int(nz[np.argmax(np.abs(tab_row[nz]))])
            row += 1
        else:
            # linear combination of other rows: drop it with its artificial
            keep = np.ones(s.basis.size, dtype=bool)
            keep[row] = False
            s.A = s.A[keep]
            s.b = s.b[keep]
            s.basis = s.basis[keep]
    s.A = s.A[:, :n_std]
