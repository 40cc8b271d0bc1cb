import numpy as np
import pytest

from rdc_reid.spd import SpdMatrix


def random_spd(rng, d, cond_shift=None):
    """Wishart-like SPD matrix with a ridge so it is comfortably conditioned."""
    g = rng.standard_normal((d, d))
    shift = d if cond_shift is None else cond_shift
    return SpdMatrix(g @ g.T + shift * np.eye(d))


def random_invertible(rng, d):
    while True:
        x = rng.standard_normal((d, d))
        if abs(np.linalg.det(x)) > 1e-3 and np.linalg.cond(x) < 1e3:
            return x


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
