"""Shared fixtures: long simulation runs computed once per session, and the
acceptance report printed at the end of the run."""
import time

import pytest

from vsbwec import validation
from vsbwec.config import from_preset
from vsbwec.dynamics_engine import integrate, with_mode
from vsbwec.presets import PRESETS

REPORT = []
RUNS = []  # every trajectory produced by the shared fixtures (passivity check)


def report(criterion, name, value, limit, passed):
    """Record one acceptance line; returns ``passed`` for the assertion."""
    line = f"{'PASS' if passed else 'FAIL'}  [{criterion}] {name}: {value} (limit {limit})"
    REPORT.append(line)
    print(line)
    return passed


@pytest.fixture
def acceptance():
    return report


def pytest_terminal_summary(terminalreporter):
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rigid_limit_run():
    """Near-rigid flexible shell vs the Cummins oracle, 300 s regular wave."""
    t0 = time.perf_counter()
    cmp_, flex, ref = validation.rigid_limit(t_end=300.0)
    elapsed = time.perf_counter() - t0
    RUNS.extend([flex, ref])
    return cmp_, flex, ref, elapsed


@pytest.fixture(scope="session")
def interval_sweep():
    return validation.interval_study()


@pytest.fixture(scope="session")
def preset_pairs():
    """One-way and two-way regular-wave runs of every preset at full duration."""
    out = {}
    for pid in PRESETS:
        two = from_preset(pid, mode="two_way")
        a, b = integrate(with_mode(two, "one_way")), integrate(two)
        RUNS.extend([a, b])
        out[pid] = (a, b, two)
    return out
