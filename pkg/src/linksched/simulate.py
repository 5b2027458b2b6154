"""Slot-level Monte Carlo of the buffer under a given transmission policy.

Each slot: read ``q = q[t-1]``, draw the arrival ``a`` (probability
``alpha``) and the channel state ``h`` (law ``eta``), clamp
``min(q + a, Q)`` (an arrival into a full buffer is dropped), then, if a
packet is present, transmit with probability ``g[q, h]`` when a packet
arrived and ``f[q, h]`` otherwise.

Randomness comes from three PCG64 streams spawned from one
``numpy.random.SeedSequence``: arrivals, channel states and transmit
decisions.  All counters are integers and power is formed from per-state
transmit counts at the end, so a fixed seed reproduces a report bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInstanceError
from .model import Policy, SteadyState, SystemInstance

DEFAULT_WARMUP = 10_000
CHUNK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    n_slots: int
    seed: int = 0
    warmup_slots: int = DEFAULT_WARMUP

    def __post_init__(self):
        if int(self.n_slots) != self.n_slots or self.n_slots < 1:
            raise InvalidInstanceError(f"n_slots must be a positive integer, got {self.n_slots}")
        if int(self.warmup_slots) != self.warmup_slots or self.warmup_slots < 0:
            raise InvalidInstanceError(f"warmup_slots must be >= 0, got {self.warmup_slots}")
        if self.warmup_slots >= self.n_slots:
            raise InvalidInstanceError(
                f"warmup_slots ({self.warmup_slots}) must be below n_slots ({self.n_slots})"
            )
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidInstanceError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def measured_slots(self) -> int:
        return self.n_slots - self.warmup_slots


@dataclass(frozen=True, eq=False)
class SimReport:
    """Statistics over the measured window plus whole-run counters.

    ``drop_count``, ``transmit_count``, ``per_state_occupancy`` and the
    empirical means cover the slots after warmup.  The ``total_*`` fields
    and ``final_queue`` cover the whole run, warmup included.
    """

    mean_queue: float
    empirical_delay: float
    empirical_power: float
    drop_count: int
    transmit_count: int
    per_state_occupancy: np.ndarray
    transmits_per_state: np.ndarray
    total_arrivals: int
    total_drops: int
    total_departures: int
    final_queue: int

    @property
    def measured_slots(self) -> int:
        return int(self.per_state_occupancy.sum())

    @property
    def drop_rate(self) -> float:
        return self.drop_count / self.measured_slots

    @property
    def accepted_arrivals(self) -> int:
        return self.total_arrivals - self.total_drops


def _streams(seed: int) -> tuple[np.random.Generator, ...]:
    children = np.random.SeedSequence(int(seed)).spawn(3)
    return tuple(np.random.Generator(np.random.PCG64(s)) for s in children)


def simulate(policy: Policy, inst: SystemInstance, cfg: SimConfig) -> SimReport:
    if policy.M != inst.M or policy.Q != inst.Q:
        raise InvalidInstanceError(
            f"policy is {policy.Q + 1}x{policy.M} but the instance needs {inst.Q + 1}x{inst.M}"
        )
    Q, M, alpha = inst.Q, inst.M, inst.alpha
    cdf = np.cumsum(inst.channel.eta_arr)
    # tables[a][q][h]: transmit probability after the arrival draw
    tables = (policy.f.tolist(), policy.g.tolist())
    rng_a, rng_h, rng_d = _streams(cfg.seed)

    occ = [0] * (Q + 1)
    tx = [0] * M
    q = 0
    arrivals = drops = departures = 0
    win_drops = 0
    t0 = 0
    while t0 < cfg.n_slots:
        n = min(CHUNK, cfg.n_slots - t0)
        arr = (rng_a.random(n) < alpha).tolist()
        chan = np.minimum(np.searchsorted(cdf, rng_h.random(n), side="right"), M - 1).tolist()
        dec = rng_d.random(n).tolist()
        # first index of this chunk inside the measured window
        start = min(max(cfg.warmup_slots - t0, 0), n)
        for k in range(n):
            a = arr[k]
            h = chan[k]
            if a:
                arrivals += 1
                prob = tables[1][q][h]
                if q == Q:
                    drops += 1
                    if k >= start:
                        win_drops += 1
                else:
                    q += 1
            elif q:
                prob = tables[0][q][h]
            else:
                prob = 0.0
            if dec[k] < prob:
                # transmit probabilities are only used with q >= 1 here
                q -= 1
                departures += 1
                if k >= start:
                    tx[h] += 1
            if k >= start:
                occ[q] += 1
        t0 += n

    occ_arr = np.array(occ, dtype=np.int64)
    tx_arr = np.array(tx, dtype=np.int64)
    n_meas = cfg.measured_slots
    mean_queue = float(np.arange(Q + 1) @ occ_arr) / n_meas
    power = float(tx_arr @ inst.channel.power_arr) / n_meas
    return SimReport(
        mean_queue=mean_queue,
        empirical_delay=mean_queue / alpha,
        empirical_power=power,
        drop_count=win_drops,
        transmit_count=int(tx_arr.sum()),
        per_state_occupancy=occ_arr,
        transmits_per_state=tx_arr,
        total_arrivals=arrivals,
        total_drops=drops,
        total_departures=departures,
        final_queue=q,
    )


def empirical_distribution(report: SimReport) -> SteadyState:
    occ = np.asarray(report.per_state_occupancy, dtype=float)
    if occ.sum() <= 0:
        raise InvalidInstanceError("occupancy histogram is empty")
    return SteadyState(occ / occ.sum())


def total_variation(p: SteadyState, q: SteadyState) -> float:
    return 0.5 * float(np.abs(np.asarray(p.pi) - np.asarray(q.pi)).sum())


def derive_seed(base: int, index: int) -> int:
    """Independent 64-bit seed for the ``index``-th run of a batch."""
    ss = np.random.SeedSequence(int(base), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])
