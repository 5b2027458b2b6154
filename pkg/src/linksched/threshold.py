"""Closed-form solution of the delay-optimal scheduling problem.

An optimal policy is described by a threshold per channel state plus at most
one fractional cell.  Channel ``m`` serves the queue whenever at least
``i_star[m] + 1`` packets are available (after the arrival of the slot);
``i_star`` is non-decreasing with ``i_star[0] = 0``.  The fractional channel
``m_tilde`` additionally transmits with partial probability at queue length
``i_star[m_tilde] - 1``, which is what lets the policy meet the power budget
with equality.

Everything here follows from the birth-death structure.  With ``k`` channels
active at queue length ``i`` the chain moves up with ``alpha (1 - S_k)`` and
down with ``(1 - alpha) S_k`` (``S_k`` = probability of the ``k`` best
states), so ``pi_{i+1} = chi(k) pi_i`` with ``chi(k) = (1 - S_k) / (xi S_k)``.
At the fractional row ``r = i_star[m_tilde] - 1`` the balance equation reads

    pi_{r+1} = chi(k) pi_r - eta[m_tilde] y / (xi S_k),    k = Gamma(r)

where ``y`` is the fractional cell of the LP variables.  Hence every
stationary probability is linear in ``(pi_0, y)``:
``pi_i = phi1[i] pi_0 + phi2[i] y``, and so are the average power and the
normalization, which pins both unknowns down.

Channel indices are 0-based throughout (channel 0 is the best state).
"""

from __future__ import annotations

import bisect
import functools
import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Iterator, Literal

import numpy as np

from .errors import (
    InfeasibleBudgetError,
    InvalidInstanceError,
    ProfileInfeasibleError,
    StructureViolationError,
    WrongArityError,
)
from .lp import split_cell
from .model import (
    ChannelModel,
    Policy,
    SteadyState,
    SystemInstance,
    TrafficModel,
    average_delay,
    power_threshold,
)

# slack allowed on pi_0, y and pi when testing a candidate for feasibility
FEAS_TOL = 1e-12
# relative delay gap below which two candidates count as tied
TIE_TOL = 1e-12
# exhaustive enumeration is used up to this many candidates in "auto" mode
EXHAUSTIVE_LIMIT = 10_000

SearchMode = Literal["auto", "exhaustive", "frontier"]


@dataclass(frozen=True)
class ThresholdProfile:
    """Thresholds ``i_star`` and the optional fractional channel ``m_tilde``."""

    i_star: tuple[int, ...]
    m_tilde: int | None = None

    def __post_init__(self):
        t = tuple(int(x) for x in self.i_star)
        object.__setattr__(self, "i_star", t)
        if not t or t[0] != 0:
            raise InvalidInstanceError(f"the best channel must have threshold 0, got {t}")
        if any(a > b for a, b in zip(t, t[1:])):
            raise InvalidInstanceError(f"thresholds must be non-decreasing, got {t}")
        if self.m_tilde is not None:
            mt = int(self.m_tilde)
            object.__setattr__(self, "m_tilde", mt)
            if not 1 <= mt < len(t):
                raise InvalidInstanceError(
                    f"fractional channel must be one of 1..{len(t) - 1}, got {mt}"
                )
            if t[mt] < 1:
                raise InvalidInstanceError(
                    f"fractional channel {mt} has threshold 0 and no row below it"
                )

    @property
    def M(self) -> int:
        return len(self.i_star)

    @property
    def top(self) -> int:
        """Largest threshold; the queue never exceeds this length."""
        return self.i_star[-1]

    @property
    def fractional_row(self) -> int | None:
        return None if self.m_tilde is None else self.i_star[self.m_tilde] - 1


@dataclass(frozen=True, eq=False)
class ClosedFormTables:
    """Coefficients of ``pi_i = phi1[i] pi_0 + phi2[i] y`` and of the power
    and normalization sums built from them."""

    phi1: np.ndarray
    phi2: np.ndarray
    theta1: float
    theta2: float
    nu1: float
    nu2: float
    # gamma[i] = Gamma(i) for i = 0..Q; chi[k - 1] = chi(k) for k = 1..M
    gamma: np.ndarray
    chi: np.ndarray

    def gamma_of_i(self, i: int) -> int:
        return int(self.gamma[i])

    def chi_of_k(self, k: int) -> float:
        return float(self.chi[k - 1])

    def pi(self, pi0: float, y: float = 0.0) -> np.ndarray:
        return self.phi1 * pi0 + self.phi2 * y


@dataclass(frozen=True, eq=False)
class ThresholdSolution:
    profile: ThresholdProfile
    pi_star: SteadyState
    y_star: np.ndarray
    policy: Policy
    delay: float
    power: float

    @property
    def thresholds(self) -> tuple[int, ...]:
        return self.profile.i_star


def _check_profile(profile: ThresholdProfile, inst: SystemInstance) -> None:
    if profile.M != inst.M:
        raise InvalidInstanceError(
            f"profile has {profile.M} thresholds but the channel has {inst.M} states"
        )
    if profile.top > inst.Q:
        raise InvalidInstanceError(f"threshold {profile.top} exceeds the buffer size {inst.Q}")


def eval_gamma(profile: ThresholdProfile, i: int) -> int:
    """Number of channel states whose threshold is at most ``i``."""
    return bisect.bisect_right(profile.i_star, i)


def eval_chi(channel: ChannelModel, traffic: TrafficModel, k: int) -> float:
    """Up/down ratio of the chain when exactly the ``k`` best states transmit."""
    if not 1 <= k <= channel.M:
        raise InvalidInstanceError(f"k must lie in 1..{channel.M}, got {k}")
    if k == channel.M:
        return 0.0
    s = math.fsum(channel.eta[:k])
    return max(1.0 - s, 0.0) / (traffic.xi * s)


def _chi_table(channel: ChannelModel, traffic: TrafficModel) -> np.ndarray:
    return np.array([eval_chi(channel, traffic, k) for k in range(1, channel.M + 1)])


def _theta(phi: np.ndarray, thr: tuple[int, ...], weights: np.ndarray, xi: float) -> float:
    # each active cell contributes pi_i + xi * pi_{i+1}; summed over i >= thr[m]
    # that is pi_{thr[m]} + (1 + xi) * sum_{i > thr[m]} pi_i
    top = thr[-1]
    tail = np.concatenate([np.cumsum(phi[: top + 1][::-1])[::-1], [0.0]])
    return float(sum(w * (phi[t] + (1.0 + xi) * tail[t + 1]) for w, t in zip(weights, thr)))


def eval_tables(inst: SystemInstance, profile: ThresholdProfile) -> ClosedFormTables:
    _check_profile(profile, inst)
    Q, xi = inst.Q, inst.xi
    eta = inst.channel.eta_arr
    weights = eta * inst.channel.power_arr
    thr = profile.i_star
    top = profile.top
    chi = _chi_table(inst.channel, inst.traffic)
    gamma = np.searchsorted(np.asarray(thr), np.arange(Q + 1), side="right")

    phi1 = np.zeros(Q + 1)
    phi1[0] = 1.0
    for i in range(top):
        phi1[i + 1] = phi1[i] * chi[gamma[i] - 1]

    phi2 = np.zeros(Q + 1)
    if profile.m_tilde is not None:
        mt = profile.m_tilde
        t = thr[mt]
        k = gamma[t - 1]
        phi2[t] = -eta[mt] / (xi * math.fsum(eta[:k]))
        for i in range(t, top):
            phi2[i + 1] = phi2[i] * chi[gamma[i] - 1]

    theta1 = _theta(phi1, thr, weights, xi)
    theta2 = _theta(phi2, thr, weights, xi)
    if profile.m_tilde is not None:
        theta2 += weights[profile.m_tilde]
    return ClosedFormTables(
        phi1=phi1,
        phi2=phi2,
        theta1=theta1,
        theta2=theta2,
        nu1=float(phi1[: top + 1].sum()),
        nu2=float(phi2[: top + 1].sum()),
        gamma=gamma,
        chi=chi,
    )


def solve_pi0(inst: SystemInstance, tables: ClosedFormTables) -> float:
    """Probability of the empty queue for a profile meeting ``p_max`` exactly.

    Without a fractional cell (``nu2 == 0``) the budget cannot be tuned, so
    ``pi_0`` follows from normalization alone.
    """
    if tables.nu2 == 0.0:
        pi0 = 1.0 / tables.nu1
    else:
        ratio = tables.theta2 / tables.nu2
        denom = tables.theta1 - tables.nu1 * ratio
        pi0 = (inst.p_max / inst.alpha - ratio) / denom if denom != 0.0 else math.nan
    if not 0.0 < pi0 <= 1.0 + FEAS_TOL:
        raise ProfileInfeasibleError(f"pi_0 = {pi0:.6g} lies outside (0, 1]")
    return min(pi0, 1.0)


def fractional_value(tables: ClosedFormTables, pi0: float) -> float:
    """Fractional cell ``y`` implied by normalization for a given ``pi_0``."""
    if tables.nu2 == 0.0:
        return 0.0
    return (1.0 - tables.nu1 * pi0) / tables.nu2


def steady_state_from_tables(tables: ClosedFormTables, pi0: float) -> SteadyState:
    pi = tables.pi(pi0, fractional_value(tables, pi0))
    if pi.min() < -FEAS_TOL:
        raise ProfileInfeasibleError(f"negative stationary probability {pi.min():.3g}")
    pi = np.clip(pi, 0.0, None)
    return SteadyState(pi / pi.sum())


def assemble_y(inst: SystemInstance, profile: ThresholdProfile, pi_star: SteadyState) -> np.ndarray:
    _check_profile(profile, inst)
    Q, M, xi = inst.Q, inst.M, inst.xi
    eta = inst.channel.eta_arr
    pi = np.asarray(pi_star.pi)
    full = pi + xi * np.append(pi[1:], 0.0)
    y = np.zeros((Q + 1, M))
    for m, t in enumerate(profile.i_star):
        y[t:, m] = full[t:]
    if profile.m_tilde is not None:
        mt = profile.m_tilde
        r = profile.fractional_row
        s = math.fsum(eta[: eval_gamma(profile, r)])
        # balance at r: alpha pi_r (1 - S) - (1 - alpha) pi_{r+1} S = alpha eta y
        cell = ((1.0 - s) * pi[r] - s * xi * pi[r + 1]) / eta[mt]
        tol = 1e-10 * max(1.0, full[r])
        if cell < -tol or cell > full[r] + tol:
            raise StructureViolationError(
                f"fractional cell {cell:.6g} outside [0, {full[r]:.6g}]"
            )
        y[r, mt] = min(max(cell, 0.0), full[r])
    return y


def derive_policy(inst: SystemInstance, profile: ThresholdProfile, pi_star: SteadyState,
                  y_star: np.ndarray) -> Policy:
    _check_profile(profile, inst)
    Q, M = inst.Q, inst.M
    pi = np.asarray(pi_star.pi)
    g = np.zeros((Q + 1, M))
    f = np.zeros((Q + 1, M))
    for m, t in enumerate(profile.i_star):
        g[t:, m] = 1.0
        f[t + 1 :, m] = 1.0
    if profile.m_tilde is not None:
        mt, r = profile.m_tilde, profile.fractional_row
        g[r, mt], f[r + 1, mt] = split_cell(float(y_star[r, mt]), pi[r], pi[r + 1], inst.xi)
    return Policy(g, f)


def two_state_threshold(inst: SystemInstance, pi0: float) -> int:
    """Threshold of the worse state of a two-state channel from ``pi_0``."""
    if inst.M != 2:
        raise WrongArityError(f"two-state formula needs M = 2, got M = {inst.M}")
    if not 0.0 < pi0 <= 1.0:
        raise InvalidInstanceError(f"pi0 must lie in (0, 1], got {pi0}")
    if inst.p_max >= power_threshold(inst.traffic, inst.channel):
        return 0
    eta1 = inst.channel.eta[0]
    r = (1.0 - eta1) / (eta1 * inst.xi)
    if math.isclose(r, 1.0, rel_tol=1e-12, abs_tol=0.0):
        return math.floor(1.0 / pi0)
    return math.floor(math.log(1.0 - (1.0 - r) / pi0) / math.log(r))


def _monotone_profiles(M: int, Q: int) -> Iterator[tuple[int, ...]]:
    for rest in combinations_with_replacement(range(Q + 1), M - 1):
        yield (0,) + rest


def _fractional_channels(thr: tuple[int, ...]) -> list[int]:
    # the fractional channel is the best one of its tie group, so the set of
    # transmitting states stays a prefix of the channel order
    return [m for m in range(1, len(thr)) if thr[m] >= 1 and thr[m - 1] < thr[m]]


def candidate_count(M: int, Q: int) -> int:
    return sum(1 + len(_fractional_channels(t)) for t in _monotone_profiles(M, Q))


@dataclass(frozen=True)
class _Point:
    profile: ThresholdProfile
    pi0: float
    y: float
    delay: float


def _evaluate(inst: SystemInstance, profile: ThresholdProfile) -> _Point | None:
    """Delay of ``profile`` at budget ``inst.p_max``, or None if it cannot
    be run within the budget (integer profile) or hit it exactly
    (fractional profile)."""
    t = eval_tables(inst, profile)
    a = inst.alpha
    levels = np.arange(inst.Q + 1)
    if profile.m_tilde is None:
        if a * t.theta1 / t.nu1 > inst.p_max * (1 + FEAS_TOL):
            return None
        return _Point(profile, 1.0 / t.nu1, 0.0, float(t.phi1 @ levels) / (t.nu1 * a))
    try:
        pi0 = solve_pi0(inst, t)
    except ProfileInfeasibleError:
        return None
    y = fractional_value(t, pi0)
    pi = t.pi(pi0, y)
    r = profile.fractional_row
    if pi.min() < -FEAS_TOL or not -FEAS_TOL <= y <= pi[r] + inst.xi * pi[r + 1] + FEAS_TOL:
        return None
    return _Point(profile, pi0, y, float(pi @ levels) / a)


class ThresholdSearch:
    """Optimal profile search for one ``(channel, traffic, Q)``; reusable
    across budgets since the tables do not depend on ``p_max``."""

    def __init__(self, channel: ChannelModel, traffic: TrafficModel, Q: int,
                 mode: SearchMode = "auto"):
        if mode not in ("auto", "exhaustive", "frontier"):
            raise InvalidInstanceError(f"unknown search mode {mode!r}")
        self.channel = channel
        self.traffic = traffic
        self.Q = int(Q)
        self.p_th = power_threshold(traffic, channel)
        # placeholder budget; every budget-dependent step goes through _inst(p)
        self._base = SystemInstance(channel, traffic, self.Q, self.p_th)
        if mode == "auto":
            mode = "exhaustive" if candidate_count(channel.M, self.Q) <= EXHAUSTIVE_LIMIT else "frontier"
        self.mode = mode
        if mode == "exhaustive":
            self._build_exhaustive()
        else:
            self._build_frontier()

    def _inst(self, p_max: float) -> SystemInstance:
        return self._base.with_budget(p_max)

    # exhaustive enumeration

    def _build_exhaustive(self) -> None:
        profiles, tabs = [], []
        for thr in _monotone_profiles(self.channel.M, self.Q):
            for mt in [None] + _fractional_channels(thr):
                p = ThresholdProfile(thr, mt)
                profiles.append(p)
                tabs.append(eval_tables(self._base, p))
        self._profiles = profiles
        self._tables = tabs
        self._phi1 = np.array([t.phi1 for t in tabs])
        self._phi2 = np.array([t.phi2 for t in tabs])
        self._theta1 = np.array([t.theta1 for t in tabs])
        self._theta2 = np.array([t.theta2 for t in tabs])
        self._nu1 = np.array([t.nu1 for t in tabs])
        self._nu2 = np.array([t.nu2 for t in tabs])
        self._frac = np.array([p.m_tilde is not None for p in profiles])
        self._row = np.array([p.fractional_row if p.m_tilde is not None else 0 for p in profiles])
        integer = ~self._frac
        self._min_power = float((self.traffic.alpha * self._theta1[integer] / self._nu1[integer]).min())

    def _exhaustive_point(self, p_max: float) -> _Point:
        a, xi = self.traffic.alpha, self.traffic.xi
        frac = self._frac
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(frac, self._theta2 / self._nu2, 0.0)
            pi0 = np.where(
                frac,
                (p_max / a - ratio) / (self._theta1 - self._nu1 * ratio),
                1.0 / self._nu1,
            )
            y = np.where(frac, (1.0 - self._nu1 * pi0) / self._nu2, 0.0)
            pi = self._phi1 * pi0[:, None] + self._phi2 * y[:, None]
            idx = np.arange(len(frac))
            r = self._row
            upper = pi[idx, r] + xi * pi[idx, np.minimum(r + 1, self.Q)]
            power_ok = np.where(frac, True, a * self._theta1 / self._nu1 <= p_max * (1 + FEAS_TOL))
            # nan comparisons are False, so degenerate candidates drop out here
            ok = (
                (pi0 > 0.0)
                & (pi0 <= 1.0 + FEAS_TOL)
                & (pi.min(axis=1) >= -FEAS_TOL)
                & (~frac | ((y >= -FEAS_TOL) & (y <= upper + FEAS_TOL)))
                & power_ok
            )
        if not ok.any():
            raise InfeasibleBudgetError(p_max, self._min_power)
        with np.errstate(invalid="ignore"):
            delay = np.where(ok, pi @ np.arange(self.Q + 1) / a, np.inf)
        best = delay.min()
        tied = np.flatnonzero(delay <= best + TIE_TOL * max(1.0, best))
        j = min(tied, key=lambda c: (self._profiles[c].i_star, self._profiles[c].m_tilde or 0))
        return _Point(self._profiles[j], float(pi0[j]), float(y[j]), float(delay[j]))

    # frontier walk

    def _integer_stats(self, thr: tuple[int, ...]) -> tuple[float, float]:
        t = eval_tables(self._base, ThresholdProfile(thr))
        pi = t.phi1 / t.nu1
        power = self.traffic.alpha * t.theta1 / t.nu1
        return power, float(pi @ np.arange(self.Q + 1)) / self.traffic.alpha

    def _weights(self, thr: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
        """Unnormalized stationary weights (max 1) and Gamma over 0..Q."""
        Q = self.Q
        gamma = np.searchsorted(np.asarray(thr), np.arange(Q + 1), side="right")
        top = thr[-1]
        with np.errstate(divide="ignore"):
            steps = np.log(self._chi[gamma[:top] - 1])
        logw = np.concatenate([[0.0], np.cumsum(steps)])
        w = np.zeros(Q + 2)
        w[: top + 1] = np.exp(logw - logw.max())
        return w, gamma

    def _step_slopes(self, thr: tuple[int, ...]) -> list[tuple[float, float, tuple[int, ...]]]:
        """``(dP, dD, next_profile)`` for every single-threshold increment.

        Raising ``thr[m]`` from ``t`` to ``t + 1`` only changes the chain ratio
        on the edge ``t -> t + 1``, so the new weights equal the old ones up to
        ``t`` and a rescaled copy of the same tail shape above.  Writing both
        differences through that tail keeps them accurate when the tail mass
        is many orders of magnitude below the head.
        """
        M, Q, xi, a = self.channel.M, self.Q, self.traffic.xi, self.traffic.alpha
        chi = self._chi
        wp = self._wp
        w, gamma = self._weights(thr)
        idx = np.arange(Q + 2)
        Z = w.sum()
        # per-row cell coefficient: sum of eta_m P_m over active channels
        active = np.concatenate([np.cumsum(wp)[gamma - 1], [0.0]])
        cells = active[: Q + 1] * (w[: Q + 1] + xi * w[1:])
        mean_power = float(cells.sum()) / Z
        mean_level = float(idx @ w) / Z
        out = []
        for m in range(1, M):
            t = thr[m]
            cap = thr[m + 1] if m + 1 < M else Q
            if t >= cap:
                continue
            # tail shape s with s[t + 1] = 1; Gamma above t is the same before and after
            s = np.zeros(Q + 2)
            s[t + 1] = 1.0
            if t + 1 < Q:
                s[t + 2 : Q + 1] = np.cumprod(chi[gamma[t + 1 : Q] - 1])
            s0 = s.sum()
            s1 = float(idx @ s)
            tail_cells = float(active[t + 1 : Q + 1] @ (s[t + 1 : Q + 1] + xi * s[t + 2 : Q + 2]))
            amp_old = w[t] * chi[m]
            d_amp = w[t] * chi[m - 1] - amp_old
            e_prev = float(wp[:m].sum())
            # both differences share the positive factor 1 / Z_new, dropped here
            dp = a * (-wp[m] * (w[t] + xi * amp_old) + d_amp * (xi * e_prev + tail_cells - mean_power * s0))
            dd = d_amp * (s1 - mean_level * s0) / a
            out.append((dp, dd, thr[:m] + (t + 1,) + thr[m + 1 :]))
        return out

    def _build_frontier(self) -> None:
        self._chi = _chi_table(self.channel, self.traffic)
        self._wp = self.channel.eta_arr * self.channel.power_arr
        thr = (0,) * self.channel.M
        power, delay = self._integer_stats(thr)
        walk = [(thr, power, delay)]
        while True:
            best = None
            for dp, dd, nxt in self._step_slopes(thr):
                if not dp < 0.0:
                    continue
                key = (dd / -dp, nxt)
                if best is None or key < best:
                    best = key
            if best is None:
                break
            thr = best[1]
            power, delay = self._integer_stats(thr)
            walk.append((thr, power, delay))
        self._walk = walk
        # powers decrease along the walk; the running minimum guards the
        # last-bit noise of nearly coincident breakpoints
        self._neg_powers = list(-np.minimum.accumulate([w[1] for w in walk]))
        self._min_power = float(min(w[1] for w in walk))

    def _frontier_point(self, p_max: float) -> _Point:
        inst = self._inst(p_max)
        last_thr, last_power, _ = self._walk[-1]
        if p_max <= last_power:
            if p_max < last_power * (1 - FEAS_TOL):
                raise InfeasibleBudgetError(p_max, self._min_power)
            j = len(self._walk) - 1
        else:
            # first breakpoint whose power does not exceed p_max
            j = bisect.bisect_left(self._neg_powers, -p_max)
        thr_b, power_b, delay_b = self._walk[j]
        if power_b >= p_max * (1 - FEAS_TOL) or j == 0:
            t = eval_tables(inst, ThresholdProfile(thr_b))
            return _Point(ThresholdProfile(thr_b), 1.0 / t.nu1, 0.0, delay_b)
        thr_a = self._walk[j - 1][0]
        mt = next(m for m in range(self.channel.M) if thr_a[m] != thr_b[m])
        point = _evaluate(inst, ThresholdProfile(thr_b, mt))
        if point is None:  # pragma: no cover - the segment always brackets p_max
            raise ProfileInfeasibleError(f"segment {thr_a} -> {thr_b} does not reach {p_max}")
        return self._canonical(inst, point)

    def _canonical(self, inst: SystemInstance, point: _Point) -> _Point:
        """Lower thresholds while the delay stays tied, matching the
        lexicographic tie-break of the exhaustive search."""
        best = point
        band = point.delay + TIE_TOL * max(1.0, point.delay)
        for m in range(self.channel.M - 1, 0, -1):
            while True:
                thr = list(best.profile.i_star)
                mt = best.profile.m_tilde
                thr[m] -= 1
                if thr[m] < thr[m - 1]:
                    break
                if mt is not None and (thr[mt] < 1 or thr[mt - 1] >= thr[mt]):
                    break
                cand = _evaluate(inst, ThresholdProfile(tuple(thr), mt))
                if cand is None or cand.delay > band:
                    break
                best = cand
        return best

    # public

    @property
    def min_power(self) -> float:
        return self._min_power

    def solve(self, p_max: float) -> ThresholdSolution:
        inst = self._inst(p_max)
        if p_max >= self.p_th:
            point = _Point(ThresholdProfile((0,) * self.channel.M), 1.0, 0.0, 0.0)
        elif self.mode == "exhaustive":
            point = self._exhaustive_point(p_max)
        else:
            point = self._frontier_point(p_max)
        return self._finish(inst, point)

    def _finish(self, inst: SystemInstance, point: _Point) -> ThresholdSolution:
        tables = eval_tables(inst, point.profile)
        pi = np.clip(tables.pi(point.pi0, point.y), 0.0, None)
        ss = SteadyState(pi / pi.sum())
        y = assemble_y(inst, point.profile, ss)
        policy = derive_policy(inst, point.profile, ss, y)
        power = inst.alpha * float(np.sum(y @ (inst.channel.eta_arr * inst.channel.power_arr)))
        return ThresholdSolution(
            profile=point.profile,
            pi_star=ss,
            y_star=y,
            policy=policy,
            delay=average_delay(ss, inst.traffic),
            power=power,
        )


@functools.lru_cache(maxsize=32)
def _search(channel: ChannelModel, traffic: TrafficModel, Q: int, mode: str) -> ThresholdSearch:
    return ThresholdSearch(channel, traffic, Q, mode)


def solve(inst: SystemInstance, *, mode: SearchMode = "auto") -> ThresholdSolution:
    """Delay-optimal threshold policy for ``inst``.

    Raises ``InfeasibleBudgetError`` when ``p_max`` is below the smallest
    average power any policy achieves.
    """
    return _search(inst.channel, inst.traffic, inst.Q, mode).solve(inst.p_max)


def min_power(inst: SystemInstance, *, mode: SearchMode = "auto") -> float:
    """Smallest feasible average power, from the threshold structure."""
    return _search(inst.channel, inst.traffic, inst.Q, mode).min_power
