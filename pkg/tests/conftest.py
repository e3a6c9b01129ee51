import math
import time
import warnings

import pytest
from hypothesis import HealthCheck, settings

from geocontact.geodesic import ContractionWarning
from geocontact.scenario import load_scenario, run
from geocontact.surface import cylinder_chart, ellipsoid_chart, sphere_chart

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

FINGER_R = 0.04
OBJECT_R = 0.1
ELLIPSOID_RADII = (0.3, 0.2, 0.1)

_RUNS = {}
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def finger():
    return sphere_chart(FINGER_R)


@pytest.fixture(scope="session")
def ball():
    return sphere_chart(OBJECT_R)


@pytest.fixture(scope="session")
def egg():
    return ellipsoid_chart(*ELLIPSOID_RADII)


@pytest.fixture(scope="session")
def tube():
    return cylinder_chart(OBJECT_R)


def run_builtin(name):
    """Run a bundled scenario once per session; returns (result, seconds)."""
    if name not in _RUNS:
        scenario = load_scenario(name)
        start = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ContractionWarning)
            result = run(scenario)
        _RUNS[name] = (result, time.perf_counter() - start)
    return _RUNS[name]


@pytest.fixture(scope="session")
def builtin_run():
    return run_builtin


@pytest.fixture
def report():
    """Record one PASS/FAIL line; printed now and again in the terminal summary."""

    def _report(criterion, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def fmt(x):
    return "None" if x is None else f"{x:.3g}"


HALF_PI = math.pi / 2
