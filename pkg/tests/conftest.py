import sys

import numpy as np
import pytest

SHAPES = (0.5, 1.0, 1.5, 2.0, 5.0, 10.0)


def mean_grid(a, b, n, top=0.999):
    """``n`` thresholds from the Beta mean up to ``top``."""
    return np.linspace(a / (a + b), top, n)


def shape_grid(a_min=0.0):
    return [(a, b) for a in SHAPES if a > a_min for b in SHAPES]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
        terminalreporter.write_line(line)
