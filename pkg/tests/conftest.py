import sys

import numpy as np
import pytest

from willmore_lab.ambient import MetricParams
from willmore_lab.surface import RadialGraph


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def schwarzschild():
    return MetricParams(mass=1.0)


def random_graph(rng, R, L, amp=0.05, lmax=4, offset=0.2):
    """Near-round graph with random low modes and a random centre."""
    modes = [(l, m, amp * rng.uniform(-1, 1) / (2 * l + 1))
             for l in range(1, lmax + 1) for m in range(-l, l + 1)]
    center = rng.uniform(-offset, offset, 3) * R
    return RadialGraph.perturbed(R, modes, L, center=center)


def pytest_terminal_summary(terminalreporter):
    lines = getattr(sys.modules.get("test_acceptance"), "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
