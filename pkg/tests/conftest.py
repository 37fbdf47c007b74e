import numpy as np
import pytest
from hypothesis import settings

from qmext.space import QuasiMetricSpace

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def line(xs, weights=None, power=1.0):
    x = np.asarray(xs, dtype=float)
    w = np.ones(x.size) if weights is None else weights
    return QuasiMetricSpace(np.abs(x[:, None] - x[None, :]) ** power, w)


def random_space(rng, n, symmetric=False):
    """Random quasi-metric: positive off-diagonal entries, optionally asymmetric."""
    d = rng.uniform(0.2, 1.0, (n, n))
    if symmetric:
        d = np.maximum(d, d.T)
    np.fill_diagonal(d, 0.0)
    return QuasiMetricSpace(d, rng.uniform(0.5, 2.0, n))


def random_metric(rng, n, dim=2):
    pts = rng.random((n, dim))
    d = np.sqrt(((pts[:, None] - pts[None, :]) ** 2).sum(-1))
    return QuasiMetricSpace(d, rng.uniform(0.5, 2.0, n))


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


def four_point(seed):
    """Seeded 4-point instance with distances in [0.26, 0.99): two dyadic levels at most."""
    rng = np.random.Generator(np.random.PCG64(seed))
    d = rng.uniform(0.26, 0.99, (4, 4))
    d = np.maximum(d, d.T)
    np.fill_diagonal(d, 0.0)
    return QuasiMetricSpace(d, rng.uniform(0.5, 2.0, 4)), rng.normal(size=4)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
