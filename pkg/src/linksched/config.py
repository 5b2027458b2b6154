"""YAML run configuration.

Schema (keys not listed are rejected)::

    command: solve | sweep | simulate | verify     # optional
    instance:
      alpha: 0.5            # arrival probability per slot, in (0, 1)
      Q: 100                # buffer size, integer >= 1
      p_max: 0.8            # power budget in W (required unless sweeping)
      channel:
        eta: [0.25, 0.5, 0.25]
        power: [1, 2, 3]    # W, non-decreasing
    sweep:                  # either an explicit list or a linspace
      grid: [0.8, 0.9, 1.0]
      # start: 0.76
      # stop: 1.2
      # steps: 45
    sim:
      n_slots: 1000000
      seed: 42
      warmup_slots: 10000
    output: results/sweep.csv

Errors carry the line of the offending entry.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .errors import LinkSchedError
from .model import ChannelModel, SystemInstance, TrafficModel
from .simulate import SimConfig

COMMANDS = ("solve", "sweep", "simulate", "verify")

_SCHEMA = {
    "": {"command", "instance", "sweep", "sim", "output"},
    "instance": {"alpha", "Q", "p_max", "channel"},
    "instance.channel": {"eta", "power"},
    "sweep": {"grid", "start", "stop", "steps"},
    "sim": {"n_slots", "seed", "warmup_slots"},
}


class ConfigError(LinkSchedError):
    """Base class for problems with a run configuration."""

    kind = "config error"

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.message = message
        self.path = path
        self.line = line
        where = path or "<config>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {self.kind}: {message}")


class ConfigParseError(ConfigError):
    kind = "parse error"


class ConfigSchemaError(ConfigError):
    kind = "schema violation"


class ConfigInvariantError(ConfigError):
    kind = "invariant violation"


@dataclass(frozen=True)
class RunSpec:
    instance: SystemInstance
    command: str | None = None
    sweep_grid: tuple[float, ...] | None = None
    sim: SimConfig | None = None
    output_path: Path | None = None

    def __post_init__(self):
        if self.command is not None and self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.sweep_grid is not None:
            g = self.sweep_grid
            if len(g) == 0 or any(b <= a for a, b in zip(g, g[1:])):
                raise ValueError("sweep grid must be non-empty and strictly increasing")
        if self.command == "sweep" and self.sweep_grid is None:
            raise ValueError("the sweep command needs a grid")

    def with_overrides(self, **changes) -> "RunSpec":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def parse_grid(text: str) -> tuple[float, ...]:
    """``start:stop:steps`` to an evenly spaced budget grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must look like start:stop:steps, got {text!r}")
    start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
    return _linspace(start, stop, steps)


def _linspace(start: float, stop: float, steps: int) -> tuple[float, ...]:
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if steps > 1 and stop <= start:
        raise ValueError(f"grid stop {stop} must exceed start {start}")
    return tuple(float(x) for x in np.linspace(start, stop, steps))


class _Doc:
    """Parsed YAML plus a map from key paths to source lines."""

    def __init__(self, text: str, path: str | None):
        self.path = path
        try:
            root = yaml.compose(text, Loader=yaml.SafeLoader)
            self.data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise ConfigParseError(
                str(getattr(e, "problem", None) or e), path, mark.line + 1 if mark else None
            ) from None
        self.lines: dict[str, int] = {}
        if root is not None:
            self.lines[""] = root.start_mark.line + 1
            self._index(root, "")

    def _index(self, node, prefix: str) -> None:
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = f"{prefix}.{k.value}" if prefix else str(k.value)
                self.lines[key] = k.start_mark.line + 1
                self._index(v, key)

    def line(self, key: str) -> int | None:
        while key:
            if key in self.lines:
                return self.lines[key]
            key = key.rpartition(".")[0]
        return self.lines.get("")

    def schema(self, key: str, msg: str) -> ConfigSchemaError:
        return ConfigSchemaError(msg, self.path, self.line(key))

    def invariant(self, key: str, msg: str) -> ConfigInvariantError:
        return ConfigInvariantError(msg, self.path, self.line(key))


def _section(doc: _Doc, data: Any, key: str, required: bool) -> dict | None:
    if data is None:
        if required:
            raise doc.schema(key, f"missing required section '{key}'")
        return None
    if not isinstance(data, dict):
        raise doc.schema(key, f"'{key or 'document'}' must be a mapping")
    unknown = set(map(str, data)) - _SCHEMA[key]
    if unknown:
        bad = sorted(unknown)[0]
        full = f"{key}.{bad}" if key else bad
        raise doc.schema(full, f"unknown key '{full}'")
    return data


def _number(doc: _Doc, data: dict, section: str, name: str, *, required: bool = True,
            integer: bool = False):
    key = f"{section}.{name}" if section else name
    if name not in data or data[name] is None:
        if required:
            raise doc.schema(section, f"missing required key '{key}'")
        return None
    v = data[name]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise doc.schema(key, f"'{key}' must be a number, got {v!r}")
    if integer and (not isinstance(v, int)):
        raise doc.schema(key, f"'{key}' must be an integer, got {v!r}")
    return v


def _number_list(doc: _Doc, data: dict, section: str, name: str) -> list[float]:
    key = f"{section}.{name}"
    v = data.get(name)
    if v is None:
        raise doc.schema(section, f"missing required key '{key}'")
    if not isinstance(v, list) or not v:
        raise doc.schema(key, f"'{key}' must be a non-empty list of numbers")
    for x in v:
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise doc.schema(key, f"'{key}' must contain only numbers, got {x!r}")
    return [float(x) for x in v]


def parse_config(text: str, path: str | None = None) -> RunSpec:
    doc = _Doc(text, path)
    top = _section(doc, doc.data, "", required=True)

    command = top.get("command")
    if command is not None and command not in COMMANDS:
        raise doc.schema("command", f"command must be one of {', '.join(COMMANDS)}, got {command!r}")

    inst_d = _section(doc, top.get("instance"), "instance", required=True)
    chan_d = _section(doc, inst_d.get("channel"), "instance.channel", required=True)
    eta = _number_list(doc, chan_d, "instance.channel", "eta")
    power = _number_list(doc, chan_d, "instance.channel", "power")
    if len(eta) != len(power):
        raise doc.schema("instance.channel.power",
                         f"eta has {len(eta)} entries but power has {len(power)}")
    try:
        channel = ChannelModel(tuple(eta), tuple(power))
    except ValueError as e:
        key = "instance.channel.eta" if "eta" in str(e) else "instance.channel.power"
        raise doc.invariant(key, str(e)) from None

    alpha = _number(doc, inst_d, "instance", "alpha")
    try:
        traffic = TrafficModel(alpha)
    except ValueError as e:
        raise doc.invariant("instance.alpha", str(e)) from None
    Q = _number(doc, inst_d, "instance", "Q", integer=True)

    grid = None
    sweep_d = _section(doc, top.get("sweep"), "sweep", required=False)
    if sweep_d is not None:
        if "grid" in sweep_d:
            if {"start", "stop", "steps"} & set(sweep_d):
                raise doc.schema("sweep", "give either 'sweep.grid' or start/stop/steps, not both")
            grid = tuple(_number_list(doc, sweep_d, "sweep", "grid"))
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise doc.invariant("sweep.grid", "sweep grid must be strictly increasing")
        else:
            start = _number(doc, sweep_d, "sweep", "start")
            stop = _number(doc, sweep_d, "sweep", "stop")
            steps = _number(doc, sweep_d, "sweep", "steps", integer=True)
            try:
                grid = _linspace(float(start), float(stop), int(steps))
            except ValueError as e:
                raise doc.invariant("sweep", str(e)) from None
        if grid[0] <= 0:
            raise doc.invariant("sweep", f"budgets must be positive, got {grid[0]}")

    p_max = _number(doc, inst_d, "instance", "p_max", required=grid is None)
    if p_max is None:
        p_max = grid[0]
    try:
        inst = SystemInstance(channel, traffic, Q, p_max)
    except ValueError as e:
        key = "instance.Q" if "Q" in str(e) else "instance.p_max"
        raise doc.invariant(key, str(e)) from None

    sim = None
    sim_d = _section(doc, top.get("sim"), "sim", required=False)
    if sim_d is not None:
        n = _number(doc, sim_d, "sim", "n_slots", integer=True)
        seed = _number(doc, sim_d, "sim", "seed", required=False, integer=True)
        warm = _number(doc, sim_d, "sim", "warmup_slots", required=False, integer=True)
        try:
            sim = SimConfig(n, 0 if seed is None else seed, 10_000 if warm is None else warm)
        except ValueError as e:
            raise doc.invariant("sim", str(e)) from None

    output = top.get("output")
    if output is not None and not isinstance(output, str):
        raise doc.schema("output", "'output' must be a path string")
    if command == "sweep" and grid is None:
        raise doc.schema("command", "the sweep command needs a 'sweep' section")

    return RunSpec(
        instance=inst,
        command=command,
        sweep_grid=grid,
        sim=sim,
        output_path=Path(output) if output else None,
    )


def load_config(path: str | Path) -> RunSpec:
    """Read and validate a YAML run configuration.

    ``OSError`` from reading the file propagates unchanged; everything else
    surfaces as a ``ConfigError`` subclass.
    """
    text = Path(path).read_text()
    return parse_config(text, str(path))
