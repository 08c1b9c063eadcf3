import numpy as np
import pytest

from uslice import DiscreteMeasure, Measure1D


def random_measure(rng, n, d, mass=None, low=0.1):
    w = rng.random(n) + low
    if mass is not None:
        w *= mass / w.sum()
    return DiscreteMeasure(rng.random((n, d)), w)


def random_1d(rng, n, mass=None, low=0.1):
    w = rng.random(n) + low
    if mass is not None:
        w *= mass / w.sum()
    return Measure1D(rng.random(n), w)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# lines recorded by the acceptance suite, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
