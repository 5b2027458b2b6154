"""Command-line front end: ``linksched {solve,sweep,simulate,verify}``.

Exit codes: 0 success, 2 configuration error, 3 infeasible budget (solve and
simulate), 4 verification failure or a sweep that breaks the monotone
tradeoff, 5 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import threshold
from .config import ConfigError, RunSpec, load_config, parse_grid
from .errors import InfeasibleBudgetError
from .lp import INFEASIBLE, solve_instance
from .model import evaluate_policy, power_threshold
from .simulate import SimConfig, SimReport, simulate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_VERIFY = 4
EXIT_IO = 5

DEFAULT_SLOTS = 1_000_000
# analytic vs LP delay, relative to max(1, delay)
LP_TOL = 1e-6
# analytic vs simulation, relative; delays also pass within SIM_DELAY_ABS slots
SIM_REL_TOL = 0.02
SIM_DELAY_ABS = 0.01
MONO_TOL = 1e-9


@dataclass(frozen=True)
class TradeoffRow:
    p_max: float
    delay: float
    thresholds: tuple[int, ...]
    power_used: float
    feasible: bool


class SweepInvariantError(Exception):
    """A sweep produced a delay or threshold that increases with the budget."""


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.12g}"


def solve_row(search: threshold.ThresholdSearch, p_max: float) -> TradeoffRow:
    try:
        sol = search.solve(p_max)
    except InfeasibleBudgetError:
        return TradeoffRow(p_max, math.nan, (), math.nan, False)
    return TradeoffRow(p_max, sol.delay, sol.thresholds, sol.power, True)


def check_monotone(rows: Sequence[TradeoffRow]) -> None:
    feasible = [r for r in rows if r.feasible]
    for a, b in zip(feasible, feasible[1:]):
        if b.delay > a.delay + MONO_TOL * max(1.0, a.delay):
            raise SweepInvariantError(
                f"delay rises from {a.delay:.12g} at p_max={a.p_max:.12g} "
                f"to {b.delay:.12g} at p_max={b.p_max:.12g}"
            )
        for m, (ta, tb) in enumerate(zip(a.thresholds, b.thresholds)):
            if tb > ta:
                raise SweepInvariantError(
                    f"threshold {m + 1} rises from {ta} at p_max={a.p_max:.12g} "
                    f"to {tb} at p_max={b.p_max:.12g}"
                )


def run_sweep(spec: RunSpec) -> list[TradeoffRow]:
    if not spec.sweep_grid:
        raise ValueError("run_sweep needs a budget grid")
    inst = spec.instance
    search = threshold.ThresholdSearch(inst.channel, inst.traffic, inst.Q)
    rows = [solve_row(search, p) for p in spec.sweep_grid]
    check_monotone(rows)
    return rows


def format_table(rows: Sequence[TradeoffRow], M: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p_max", "delay", "power_used", "feasible"] + [f"i_star_{m + 1}" for m in range(M)])
    for r in rows:
        th = [str(t) for t in r.thresholds] if r.feasible else [""] * M
        w.writerow([_fmt(r.p_max), _fmt(r.delay), _fmt(r.power_used),
                    "true" if r.feasible else "false"] + th)
    return buf.getvalue()


def emit_table(rows: Sequence[TradeoffRow], path: str | Path | None, M: int | None = None) -> None:
    """Write rows as CSV to ``path`` (stdout when ``path`` is None)."""
    if not rows:
        raise ValueError("no rows to emit")
    if M is None:
        M = max(len(r.thresholds) for r in rows)
    text = format_table(rows, M)
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


@dataclass(frozen=True)
class Check:
    pair: str
    discrepancy: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.discrepancy <= self.bound


@dataclass(frozen=True)
class VerifyReport:
    p_max: float
    feasible: bool
    lp_delay: float
    analytic_delay: float
    analytic_power: float
    sim: SimReport | None
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def lines(self) -> list[str]:
        out = [f"p_max={_fmt(self.p_max)} feasible={'true' if self.feasible else 'false'}"]
        if self.feasible:
            out.append(f"lp_delay={_fmt(self.lp_delay)}")
            out.append(f"analytic_delay={_fmt(self.analytic_delay)} analytic_power={_fmt(self.analytic_power)}")
        if self.sim is not None:
            out.append(f"sim_delay={_fmt(self.sim.empirical_delay)} sim_power={_fmt(self.sim.empirical_power)} "
                       f"sim_drops={self.sim.drop_count}")
        elif not self.feasible:
            out.append("simulation skipped")
        for c in self.checks:
            out.append(f"{'PASS' if c.ok else 'FAIL'} {c.pair}: {c.discrepancy:.3g} (bound {c.bound:.3g})")
        return out


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b != 0 else abs(a)


def run_verify(spec: RunSpec) -> VerifyReport:
    """Solve by LP and by thresholds, simulate the result, compare all three."""
    inst = spec.instance
    sim_cfg = spec.sim or SimConfig(DEFAULT_SLOTS)
    lp = solve_instance(inst)
    try:
        sol = threshold.solve(inst)
    except InfeasibleBudgetError:
        sol = None
    if sol is None or not lp.optimal:
        agree = (sol is None) == (lp.status == INFEASIBLE)
        checks = (Check("lp vs analytic feasibility", 0.0 if agree else 1.0, 0.0),)
        return VerifyReport(inst.p_max, False, math.nan, math.nan, math.nan, None, checks)

    checks = [Check("analytic vs lp delay",
                    abs(sol.delay - lp.objective_value) / max(1.0, abs(lp.objective_value)), LP_TOL)]
    _, metrics = evaluate_policy(sol.policy, inst.traffic, inst.channel)
    checks.append(Check("analytic vs model power", abs(metrics.avg_power - sol.power), 1e-8))
    rep = simulate(sol.policy, inst, sim_cfg)
    delay_gap = abs(rep.empirical_delay - sol.delay)
    delay_bound = max(SIM_REL_TOL * sol.delay, SIM_DELAY_ABS)
    checks.append(Check("analytic vs simulation delay", delay_gap, delay_bound))
    checks.append(Check("analytic vs simulation power", _rel(rep.empirical_power, sol.power), SIM_REL_TOL))
    return VerifyReport(inst.p_max, True, lp.objective_value, sol.delay, sol.power, rep, tuple(checks))


def _solve(spec: RunSpec, out) -> int:
    inst = spec.instance
    try:
        sol = threshold.solve(inst)
    except InfeasibleBudgetError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    row = TradeoffRow(inst.p_max, sol.delay, sol.thresholds, sol.power, True)
    emit_table([row], out, inst.M)
    if out is not None:
        print(f"delay={_fmt(sol.delay)} power={_fmt(sol.power)} thresholds={list(sol.thresholds)}")
    return EXIT_OK


def _simulate(spec: RunSpec, out) -> int:
    inst = spec.instance
    try:
        sol = threshold.solve(inst)
    except InfeasibleBudgetError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    rep = simulate(sol.policy, inst, spec.sim or SimConfig(DEFAULT_SLOTS))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p_max", "analytic_delay", "empirical_delay", "analytic_power",
                "empirical_power", "mean_queue", "drop_count", "transmit_count"])
    w.writerow([_fmt(inst.p_max), _fmt(sol.delay), _fmt(rep.empirical_delay), _fmt(sol.power),
                _fmt(rep.empirical_power), _fmt(rep.mean_queue), rep.drop_count, rep.transmit_count])
    if out is None:
        sys.stdout.write(buf.getvalue())
    else:
        Path(out).write_text(buf.getvalue())
    return EXIT_OK


def _sweep(spec: RunSpec, out) -> int:
    try:
        rows = run_sweep(spec)
    except SweepInvariantError as e:
        print(f"sweep invariant violated: {e}", file=sys.stderr)
        return EXIT_VERIFY
    emit_table(rows, out, spec.instance.M)
    p_th = power_threshold(spec.instance.traffic, spec.instance.channel)
    if out is not None:
        n_ok = sum(r.feasible for r in rows)
        print(f"{len(rows)} budgets, {n_ok} feasible, P_th={_fmt(p_th)} W -> {out}")
    return EXIT_OK


def _verify(spec: RunSpec, out) -> int:
    rep = run_verify(spec)
    text = "\n".join(rep.lines()) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
    for c in rep.checks:
        if not c.ok:
            print(f"verification failed: {c.pair} off by {c.discrepancy:.3g} (bound {c.bound:.3g})",
                  file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_VERIFY


_HANDLERS = {"solve": _solve, "sweep": _sweep, "simulate": _simulate, "verify": _verify}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linksched",
        description="Delay-optimal transmission scheduling under an average power budget.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("solve", "optimal threshold policy for the configured budget"),
        ("sweep", "delay/threshold table over a grid of budgets"),
        ("simulate", "simulate the optimal policy and compare with the analysis"),
        ("verify", "cross-check LP, closed form and simulation"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", help="output file (default: stdout or the config's output)")
        p.add_argument("--seed", type=int, help="simulation seed (unsigned 64-bit)")
        p.add_argument("--slots", type=int, help="number of simulated slots")
        p.add_argument("--grid", help="budget grid as start:stop:steps")
    return parser


def _apply_flags(spec: RunSpec, args) -> RunSpec:
    grid = parse_grid(args.grid) if args.grid else None
    sim = spec.sim
    if args.seed is not None or args.slots is not None:
        base = sim or SimConfig(DEFAULT_SLOTS)
        n = args.slots if args.slots is not None else base.n_slots
        warm = base.warmup_slots if base.warmup_slots < n else 0
        sim = SimConfig(n, args.seed if args.seed is not None else base.seed, warm)
    spec = spec.with_overrides(sweep_grid=grid, sim=sim)
    if args.command == "sweep" and spec.sweep_grid is None:
        raise ValueError("sweep needs a grid (config 'sweep' section or --grid)")
    return RunSpec(spec.instance, args.command, spec.sweep_grid, spec.sim, spec.output_path)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_config(args.config)
    except ConfigError as e:
        print(str(e), file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"cannot read config: {e}", file=sys.stderr)
        return EXIT_IO
    try:
        spec = _apply_flags(spec, args)
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or spec.output_path
    try:
        return _HANDLERS[args.command](spec, out)
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
