"""Linear program over the scaled occupation variables ``y[i, m]`` and the
recovery of a steady state and a policy from its solution.

For a policy ``(g, f)`` with stationary law ``pi``,

    y[i, m] = pi_i * g[i, m] + xi * pi_{i+1} * f[i+1, m]

turns delay and power into linear functions of ``y``.  Minimizing delay
under a power budget becomes

    min   (1/alpha) sum_{i,m} i * eta_m * y[i, m]
    s.t.  alpha * sum_{i,m} eta_m * P_m * y[i, m] <= p_max
          sum_{i,m} eta_m * y[i, m] = 1
          0 <= y[i, m] <= sum_n eta_n y[i, n] + xi * sum_n eta_n y[i+1, n]

with the ``i + 1`` term absent on the last row.  Variables are ordered
i-major, m-minor (``k = i * M + m``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import simplex as _sx
from .errors import InconsistentSolutionError, StructureViolationError
from .model import (
    ChannelModel,
    Policy,
    SteadyState,
    SystemInstance,
    TrafficModel,
)

OPTIMAL = _sx.OPTIMAL
INFEASIBLE = _sx.INFEASIBLE
UNBOUNDED = _sx.UNBOUNDED

NORM_TOL = 1e-8
SNAP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class LpProblem:
    c: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    Q: int
    M: int
    # row of A_ub holding the power budget; structural rows are 0..n-1
    power_row: int

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def bounds(self) -> list[tuple[float, None]]:
        return [(0.0, None)] * self.n_vars


@dataclass(frozen=True, eq=False)
class LpSolution:
    y: np.ndarray | None
    objective_value: float | None
    status: str
    power_slack: float | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def power_tight(self) -> bool:
        return self.power_slack is not None and abs(self.power_slack) <= 1e-8


def _structural_rows(inst: SystemInstance) -> np.ndarray:
    Q, M = inst.Q, inst.M
    eta = inst.channel.eta_arr
    n = (Q + 1) * M
    A = np.zeros((n, n))
    for i in range(Q + 1):
        for m in range(M):
            r = i * M + m
            A[r, i * M : (i + 1) * M] -= eta
            if i < Q:
                A[r, (i + 1) * M : (i + 2) * M] -= inst.xi * eta
            A[r, r] += 1.0
    return A


def build_lp(inst: SystemInstance) -> LpProblem:
    Q, M, a = inst.Q, inst.M, inst.alpha
    eta = inst.channel.eta_arr
    P = inst.channel.power_arr
    levels = np.repeat(np.arange(Q + 1), M)
    eta_t = np.tile(eta, Q + 1)
    c = levels * eta_t / a
    power = a * np.tile(eta * P, Q + 1)
    A_ub = np.vstack([_structural_rows(inst), power])
    b_ub = np.zeros(A_ub.shape[0])
    b_ub[-1] = inst.p_max
    return LpProblem(
        c=c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=eta_t[None, :],
        b_eq=np.ones(1),
        Q=Q,
        M=M,
        power_row=A_ub.shape[0] - 1,
    )


def solve_lp(lp: LpProblem, *, max_iter: int = 50_000) -> LpSolution:
    res = _sx.simplex(lp.c, lp.A_ub, lp.b_ub, lp.A_eq, lp.b_eq, max_iter=max_iter)
    if res.status != OPTIMAL:
        return LpSolution(None, None, res.status, iterations=res.iterations)
    y = res.x.reshape(lp.Q + 1, lp.M)
    slack = float(lp.b_ub[lp.power_row] - lp.A_ub[lp.power_row] @ res.x)
    return LpSolution(y, float(lp.c @ res.x), OPTIMAL, slack, res.iterations)


def solve_instance(inst: SystemInstance, **kw) -> LpSolution:
    return solve_lp(build_lp(inst), **kw)


def min_feasible_power(inst: SystemInstance, *, max_iter: int = 50_000) -> float:
    """Smallest average power of any feasible ``y`` (power row dropped)."""
    lp = build_lp(inst)
    structural = np.arange(lp.A_ub.shape[0]) != lp.power_row
    res = _sx.simplex(
        lp.A_ub[lp.power_row],
        lp.A_ub[structural],
        lp.b_ub[structural],
        lp.A_eq,
        lp.b_eq,
        max_iter=max_iter,
    )
    if res.status != OPTIMAL:  # pragma: no cover - the constraint set is never empty
        raise RuntimeError(f"power-minimization LP ended with status {res.status}")
    return res.fun


def recover_pi(y: np.ndarray, channel: ChannelModel) -> SteadyState:
    pi = np.asarray(y, dtype=float) @ channel.eta_arr
    total = pi.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise InconsistentSolutionError(f"sum_i pi_i = {total:.12g}, expected 1")
    pi = np.clip(pi, 0.0, None)
    return SteadyState(pi / pi.sum())


def split_cell(y: float, pi_i: float, pi_next: float, xi: float, tol: float = 1e-9) -> tuple[float, float]:
    """Canonical ``(g, f)`` with ``pi_i * g + xi * pi_next * f == y``.

    Backlog service (``f``) is filled first, ``g`` absorbs the remainder.
    """
    if y <= 0.0:
        if y < -tol:
            raise StructureViolationError(f"negative cell value {y:.3g}")
        return 0.0, 0.0
    backlog = xi * pi_next
    f = min(1.0, y / backlog) if backlog > 0 else 0.0
    rest = y - backlog * f
    if rest <= tol * max(1.0, y) and pi_i <= 0.0:
        return 0.0, f
    if pi_i <= 0.0:
        raise StructureViolationError(
            f"cell value {y:.6g} exceeds backlog capacity {backlog:.6g} with pi_i = 0"
        )
    g = rest / pi_i
    if g > 1.0 + 1e-6 and rest - pi_i > tol:
        raise StructureViolationError(
            f"cell value {y:.6g} exceeds its bound {pi_i + backlog:.6g}"
        )
    return _snap(g), _snap(f)


def _snap(p: float) -> float:
    # round-off next to a deterministic decision
    if p >= 1.0 - SNAP_TOL:
        return 1.0
    if p <= SNAP_TOL:
        return 0.0
    return p


def recover_policy(y: np.ndarray, pi: SteadyState, traffic: TrafficModel) -> Policy:
    y = np.asarray(y, dtype=float)
    Q = y.shape[0] - 1
    p = pi.pi
    xi = traffic.xi
    g = np.zeros_like(y)
    f = np.zeros_like(y)
    for i in range(Q + 1):
        nxt = p[i + 1] if i < Q else 0.0
        for m in range(y.shape[1]):
            gi, fi = split_cell(y[i, m], p[i], nxt, xi)
            g[i, m] = gi
            if i < Q:
                f[i + 1, m] = fi
    # rows above the support carry no information; serving every channel
    # there keeps round-off leakage from piling up in them
    top = int(np.flatnonzero(p > 0.0).max())
    g[top + 1:] = 1.0
    f[top + 1:] = 1.0
    return Policy(g, f)
