import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from linksched.model import ChannelModel, SystemInstance, TrafficModel

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], print_blob=True
)
settings.load_profile("default")

# criterion number -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE


@pytest.fixture(scope="session")
def ref_channel():
    return ChannelModel((0.25, 0.5, 0.25), (1.0, 2.0, 3.0))


@pytest.fixture(scope="session")
def ref_instance(ref_channel):
    """Three-state reference link, alpha = 0.5, 100-packet buffer."""
    return SystemInstance(ref_channel, TrafficModel(0.5), 100, 0.8)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
