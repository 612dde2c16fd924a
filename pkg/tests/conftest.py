from __future__ import annotations

import pytest

from leo_cho.geometry import GeodeticPosition, StaticConstellation
from leo_cho.sweep import UE_LOCATION, RunSpec, SweepGrid, exhaustive_search


@pytest.fixture(scope="session")
def default_sweep():
    """The full default grid on the default scenario (264 cells)."""
    return exhaustive_search(SweepGrid(), RunSpec())


@pytest.fixture
def overhead_fixture():
    """One stationary satellite straight above the UE."""
    sat = GeodeticPosition(UE_LOCATION.latitude, UE_LOCATION.longitude, 550_000.0)
    return RunSpec(constellation=StaticConstellation((sat,)), T=60)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
