"""Queue/channel model: domain types, the birth-death chain of the buffer and
closed-form performance metrics for an arbitrary transmission policy.

Channel states are indexed from 0 in code; state 0 is the best channel
(lowest transmit power).  A policy is a pair of ``(Q+1, M)`` tables:
``g[i, m]`` is the transmit probability when a packet arrives with ``i``
packets already queued on channel ``m``, ``f[i, m]`` the same without an
arrival.  Row 0 of ``f`` is never read.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInstanceError

SUM_TOL = 1e-12
BALANCE_TOL = 1e-10
CLAMP_TOL = 1e-12


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ChannelModel:
    """I.i.d. block-fading channel with ``M`` states.

    ``eta[m]`` is the probability of state ``m`` and ``power[m]`` the power
    (W) needed to send one packet in it, sorted ascending.
    """

    eta: tuple[float, ...]
    power: tuple[float, ...]

    def __post_init__(self):
        eta = tuple(float(x) for x in self.eta)
        power = tuple(float(x) for x in self.power)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "power", power)
        if len(eta) == 0:
            raise InvalidInstanceError("channel needs at least one state")
        if len(eta) != len(power):
            raise InvalidInstanceError(
                f"eta has {len(eta)} entries but power has {len(power)}"
            )
        if any(not np.isfinite(x) or x <= 0 for x in eta):
            raise InvalidInstanceError(f"every eta must be positive, got {eta}")
        if abs(sum(eta) - 1.0) > SUM_TOL:
            raise InvalidInstanceError(f"eta must sum to 1, sums to {sum(eta):.15g}")
        if any(not np.isfinite(x) or x <= 0 for x in power):
            raise InvalidInstanceError(f"every power level must be positive, got {power}")
        if any(a > b for a, b in zip(power, power[1:])):
            raise InvalidInstanceError(
                f"power levels must be non-decreasing (best channel first), got {power}"
            )

    @property
    def M(self) -> int:
        return len(self.eta)

    @property
    def eta_arr(self) -> np.ndarray:
        return np.asarray(self.eta)

    @property
    def power_arr(self) -> np.ndarray:
        return np.asarray(self.power)


@dataclass(frozen=True)
class TrafficModel:
    """Bernoulli arrivals with rate ``alpha`` packets per slot."""

    alpha: float
    xi: float = field(init=False)

    def __post_init__(self):
        alpha = float(self.alpha)
        if not 0.0 < alpha < 1.0:
            raise InvalidInstanceError(f"alpha must lie in (0, 1), got {alpha}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "xi", (1.0 - alpha) / alpha)


@dataclass(frozen=True)
class SystemInstance:
    channel: ChannelModel
    traffic: TrafficModel
    Q: int
    p_max: float

    def __post_init__(self):
        if int(self.Q) != self.Q or self.Q < 1:
            raise InvalidInstanceError(f"buffer size Q must be an integer >= 1, got {self.Q}")
        object.__setattr__(self, "Q", int(self.Q))
        p = float(self.p_max)
        if not np.isfinite(p) or p <= 0:
            raise InvalidInstanceError(f"p_max must be positive, got {self.p_max}")
        object.__setattr__(self, "p_max", p)

    @property
    def M(self) -> int:
        return self.channel.M

    @property
    def alpha(self) -> float:
        return self.traffic.alpha

    @property
    def xi(self) -> float:
        return self.traffic.xi

    def with_budget(self, p_max: float) -> "SystemInstance":
        return SystemInstance(self.channel, self.traffic, self.Q, p_max)


@dataclass(frozen=True, eq=False)
class Policy:
    g: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        g = _frozen(self.g)
        f = _frozen(self.f)
        if g.ndim != 2 or g.shape != f.shape:
            raise InvalidInstanceError(
                f"g and f must be 2-D tables of equal shape, got {g.shape} and {f.shape}"
            )
        if g.shape[0] < 2:
            raise InvalidInstanceError("policy tables need at least two rows (Q >= 1)")
        for name, t in (("g", g), ("f", f)):
            if not np.all((t >= 0.0) & (t <= 1.0)):
                raise InvalidInstanceError(f"{name} entries must lie in [0, 1]")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "f", f)

    @property
    def Q(self) -> int:
        return self.g.shape[0] - 1

    @property
    def M(self) -> int:
        return self.g.shape[1]

    @classmethod
    def constant(cls, Q: int, M: int, value: float) -> "Policy":
        t = np.full((Q + 1, M), float(value))
        return cls(t, t)


@dataclass(frozen=True, eq=False)
class BirthDeathRates:
    """``lam[i]`` is the up-probability from ``i`` (i = 0..Q-1) and ``mu[i]`` the
    down-probability from ``i + 1`` (i.e. mu_1..mu_Q)."""

    lam: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        lam = _frozen(self.lam)
        mu = _frozen(self.mu)
        if lam.ndim != 1 or lam.shape != mu.shape or lam.size < 1:
            raise InvalidInstanceError("lam and mu must be 1-D arrays of equal length Q >= 1")
        if np.any(lam < 0) or np.any(mu < 0):
            raise InvalidInstanceError("transition probabilities must be non-negative")
        # stay probability at interior states must be non-negative
        if np.any(lam[1:] + mu[:-1] > 1.0 + 1e-12) or lam[0] > 1 + 1e-12 or mu[-1] > 1 + 1e-12:
            raise InvalidInstanceError("transition probabilities out of a state exceed 1")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)

    @property
    def Q(self) -> int:
        return self.lam.size

    def transition_matrix(self) -> np.ndarray:
        """Full ``(Q+1) x (Q+1)`` one-step transition matrix of the buffer chain."""
        Q = self.Q
        P = np.zeros((Q + 1, Q + 1))
        idx = np.arange(Q)
        P[idx, idx + 1] = self.lam
        P[idx + 1, idx] = self.mu
        P[np.arange(Q + 1), np.arange(Q + 1)] = 1.0 - P.sum(axis=1)
        return P


@dataclass(frozen=True, eq=False)
class SteadyState:
    pi: np.ndarray

    def __post_init__(self):
        pi = np.array(self.pi, dtype=float)
        if pi.ndim != 1 or pi.size < 2:
            raise InvalidInstanceError("pi must be a 1-D vector over 0..Q with Q >= 1")
        if np.any(pi < -CLAMP_TOL):
            raise InvalidInstanceError(f"pi has a negative entry {pi.min():.3g}")
        if abs(pi.sum() - 1.0) > BALANCE_TOL:
            raise InvalidInstanceError(f"pi must sum to 1, sums to {pi.sum():.15g}")
        if np.any(pi < 0):
            pi = np.clip(pi, 0.0, None)
            pi /= pi.sum()
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)

    @property
    def Q(self) -> int:
        return self.pi.size - 1

    def __getitem__(self, i):
        return self.pi[i]

    def __len__(self):
        return self.pi.size


@dataclass(frozen=True)
class Metrics:
    avg_delay: float
    avg_power: float
    loss_prob: float


def _check_dims(policy: Policy, channel: ChannelModel) -> None:
    if policy.M != channel.M:
        raise InvalidInstanceError(
            f"policy has {policy.M} channel columns but the channel has {channel.M} states"
        )


def derive_rates(policy: Policy, traffic: TrafficModel, channel: ChannelModel) -> BirthDeathRates:
    _check_dims(policy, channel)
    eta = channel.eta_arr
    a = traffic.alpha
    lam = a * ((1.0 - policy.g[:-1]) @ eta)
    mu = (1.0 - a) * (policy.f[1:] @ eta)
    return BirthDeathRates(lam, mu)


def _closed_class(lam: np.ndarray, mu: np.ndarray) -> tuple[int, int]:
    """Bounds ``[s, r]`` of the closed class the chain settles in from state 0."""
    Q = lam.size
    zero_up = np.flatnonzero(lam == 0)
    r = int(zero_up[0]) if zero_up.size else Q
    # mu[j - 1] is the down-probability from state j
    blocked = [j for j in range(1, r + 1) if mu[j - 1] == 0]
    s = blocked[-1] if blocked else 0
    return s, r


def steady_state(rates: BirthDeathRates) -> SteadyState:
    """Stationary distribution of the buffer chain.

    Uses the product form ``pi_{i+1} = pi_i * lam_i / mu_{i+1}``, evaluated in
    log space.  When the chain is reducible (some ``mu`` vanishes while the
    matching ``lam`` does not, or some ``lam`` vanishes) the result is the
    stationary law of the closed class reached from the empty buffer, which
    is what a run started at ``q = 0`` converges to.  This coincides with the
    unique solution of ``pi P = pi`` whenever that solution is unique.
    """
    lam, mu = rates.lam, rates.mu
    Q = rates.Q
    s, r = _closed_class(lam, mu)
    logw = np.full(Q + 1, -np.inf)
    logw[s] = 0.0
    if r > s:
        logw[s + 1 : r + 1] = np.cumsum(np.log(lam[s:r]) - np.log(mu[s:r]))
    w = np.exp(logw - logw[s : r + 1].max())
    pi = w / w.sum()
    return SteadyState(pi)


def average_delay(ss: SteadyState, traffic: TrafficModel) -> float:
    """Mean queueing delay in slots via Little's law."""
    return float(np.arange(ss.pi.size) @ ss.pi) / traffic.alpha


def transmit_probability(policy: Policy, traffic: TrafficModel) -> np.ndarray:
    """``(Q+1, M)`` table of Pr{transmit | q[t-1] = i, h(t) = m}."""
    a = traffic.alpha
    omega = a * policy.g + (1.0 - a) * policy.f
    omega[0] = a * policy.g[0]
    return omega


def average_power(policy: Policy, ss: SteadyState, traffic: TrafficModel,
                  channel: ChannelModel) -> float:
    _check_dims(policy, channel)
    if ss.pi.size != policy.Q + 1:
        raise InvalidInstanceError("steady state and policy disagree on Q")
    omega = transmit_probability(policy, traffic)
    return float(ss.pi @ omega @ (channel.eta_arr * channel.power_arr))


def packet_loss(ss: SteadyState, traffic: TrafficModel) -> float:
    return traffic.alpha * float(ss.pi[-1])


def power_threshold(traffic: TrafficModel, channel: ChannelModel) -> float:
    """Smallest budget at which transmitting every packet on arrival is affordable."""
    return traffic.alpha * float(channel.eta_arr @ channel.power_arr)


def evaluate_policy(policy: Policy, traffic: TrafficModel, channel: ChannelModel) -> tuple[SteadyState, Metrics]:
    ss = steady_state(derive_rates(policy, traffic, channel))
    m = Metrics(
        avg_delay=average_delay(ss, traffic),
        avg_power=average_power(policy, ss, traffic, channel),
        loss_prob=packet_loss(ss, traffic),
    )
    return ss, m
