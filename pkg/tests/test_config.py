from pathlib import Path

import pytest

from linksched.config import (
    ConfigInvariantError,
    ConfigParseError,
    ConfigSchemaError,
    RunSpec,
    load_config,
    parse_config,
    parse_grid,
)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

BASE = """\
instance:
  alpha: 0.5
  Q: 100
  p_max: 0.8
  channel:
    eta: {eta}
    power: {power}
"""


def _cfg(eta="[0.25, 0.5, 0.25]", power="[1, 2, 3]", extra=""):
    return BASE.format(eta=eta, power=power) + extra


def test_reference_config_loads():
    spec = load_config(CONFIGS / "reference.yaml")
    inst = spec.instance
    assert inst.alpha == 0.5 and inst.Q == 100 and inst.p_max == 0.8
    assert inst.channel.eta == (0.25, 0.5, 0.25)
    assert inst.channel.power == (1.0, 2.0, 3.0)
    assert spec.sim.seed == 42 and spec.sim.n_slots == 1_000_000


@pytest.mark.parametrize("name,alpha", [("alpha03", 0.3), ("alpha04", 0.4), ("alpha05", 0.5)])
def test_sweep_configs_load(name, alpha):
    spec = load_config(CONFIGS / f"{name}.yaml")
    assert spec.command == "sweep"
    assert spec.instance.alpha == alpha
    assert len(spec.sweep_grid) == 91
    assert spec.sweep_grid[0] == 0.3 and spec.sweep_grid[-1] == 1.2


def test_eta_not_summing_to_one_is_reported_with_line():
    with pytest.raises(ConfigInvariantError) as exc:
        parse_config(_cfg(eta="[0.5, 0.6]", power="[1, 2]"), "bad.yaml")
    assert exc.value.line == 6
    assert "bad.yaml:6" in str(exc.value)
    assert "sum to 1" in str(exc.value)


def test_unordered_power_is_an_ordering_violation():
    with pytest.raises(ConfigInvariantError) as exc:
        parse_config(_cfg(eta="[0.5, 0.5]", power="[3, 1]"))
    assert exc.value.line == 7
    assert "non-decreasing" in str(exc.value)


def test_parse_error_has_line():
    with pytest.raises(ConfigParseError) as exc:
        parse_config("instance:\n  alpha: [0.5\n  Q: 3\n")
    assert exc.value.line is not None


@pytest.mark.parametrize(
    "text,fragment",
    [
        (_cfg(extra="colour: blue\n"), "colour"),
        (_cfg(eta="[0.5, 0.5]", power="[1, 2, 3]"), "entries"),
        (_cfg(eta="0.5"), "list"),
        (_cfg(extra="command: plot\n"), "command"),
        ("- just\n- a list\n", "mapping"),
        (_cfg().replace("  Q: 100\n", "  Q: 2.5\n"), "integer"),
        (_cfg().replace("  Q: 100\n", ""), "Q"),
    ],
)
def test_schema_violations(text, fragment):
    with pytest.raises(ConfigSchemaError, match=fragment):
        parse_config(text)


def test_invariant_violations():
    with pytest.raises(ConfigInvariantError, match="alpha"):
        parse_config(_cfg().replace("alpha: 0.5", "alpha: 1.5"))
    with pytest.raises(ConfigInvariantError):
        parse_config(_cfg(extra="sweep:\n  grid: [0.9, 0.8]\n"))
    with pytest.raises(ConfigInvariantError):
        parse_config(_cfg(extra="sim:\n  n_slots: 10\n  warmup_slots: 20\n"))


def test_sweep_without_p_max_uses_grid():
    text = _cfg().replace("  p_max: 0.8\n", "") + "command: sweep\nsweep:\n  start: 0.5\n  stop: 1.0\n  steps: 6\n"
    spec = parse_config(text)
    assert spec.sweep_grid == pytest.approx((0.5, 0.6, 0.7, 0.8, 0.9, 1.0))
    assert spec.instance.p_max == 0.5


def test_sweep_command_needs_grid():
    with pytest.raises(ConfigSchemaError):
        parse_config(_cfg(extra="command: sweep\n"))


def test_parse_grid():
    assert parse_grid("0:1:3") == (0.0, 0.5, 1.0)
    for bad in ("0:1", "1:0:3", "0:1:0"):
        with pytest.raises(ValueError):
            parse_grid(bad)


def test_missing_file_is_os_error(tmp_path):
    with pytest.raises(OSError):
        load_config(tmp_path / "nope.yaml")


def test_runspec_invariants(ref_instance):
    with pytest.raises(ValueError):
        RunSpec(ref_instance, "sweep")
    with pytest.raises(ValueError):
        RunSpec(ref_instance, "sweep", (1.0, 1.0))
    spec = RunSpec(ref_instance, "solve")
    assert spec.with_overrides(sweep_grid=None, command="verify").command == "verify"
