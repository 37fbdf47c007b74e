import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.sparse.csgraph import shortest_path

from conftest import line, random_space
from qmext.metrization import chain_closure, default_alpha_grid, estimate_index, regularize
from qmext.space import QuasiMetricSpace, SpaceError, compute_constants
from qmext.workbench.generators import grid, snowflake_grid, ultrametric_tree

seeds = st.integers(0, 2**32 - 1)


def triangle_excess(m):
    lhs = m[:, None, :]
    rhs = m[:, :, None] + m[None, :, :]
    return float((lhs - rhs).max() / m.max())


def test_chain_closure_matches_scipy(rng):
    for _ in range(5):
        w = rng.uniform(0.1, 3.0, (12, 12))
        w = np.maximum(w, w.T)
        np.fill_diagonal(w, 0)
        assert np.allclose(chain_closure(w), shortest_path(w, method="FW", directed=False), rtol=1e-14)


def test_equilateral_unchanged():
    d = np.ones((3, 3)) - np.eye(3)
    reg = regularize(QuasiMetricSpace(d, np.ones(3)), 0.7)
    assert np.array_equal(reg.matrix, d) and reg.distortion == 1.0


def test_collinear_alpha_one():
    sp = line([0, 1, 2])
    reg = regularize(sp, 1.0)
    assert np.array_equal(reg.matrix, sp.dist) and reg.distortion == 1.0


def test_squared_line_half_power():
    sp = line([0, 1, 2], power=2)
    reg = regularize(sp, 0.5)
    assert reg.matrix[0, 2] == 4.0
    assert np.allclose(reg.matrix ** 0.5, line([0, 1, 2]).dist)


def test_rejects_bad_alpha():
    with pytest.raises(SpaceError):
        regularize(line([0, 1]), 0.0)


@given(seeds)
def test_regularized_properties(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    sp = random_space(rng, 10)
    c = compute_constants(sp).c_rho
    alpha = 1 / math.log2(c) if c > 1 else 4.0
    reg = regularize(sp, alpha)
    R = np.asarray(reg.matrix)
    assert np.array_equal(R, R.T)
    assert np.all(R <= sp.symmetrized())
    assert triangle_excess(R ** alpha) <= 1e-12
    assert math.isfinite(reg.distortion)
    off = ~np.eye(sp.n, dtype=bool)
    assert np.all(R[off] > 0)


@given(seeds)
def test_distortion_monotone_in_alpha(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    sp = random_space(rng, 7)
    curve = [regularize(sp, a).distortion for a in (0.5, 1.0, 2.0, 4.0)]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(curve, curve[1:]))


def test_index_estimator_contract():
    est = estimate_index(grid(16), alpha_grid=(0.5, 1.0, 2.0, 3.0))
    curve = dict(zip(est.alpha_grid, est.distortion_curve))
    assert all(curve[a] <= est.budget for a in curve if a <= est.lower_bound)
    assert not est.infinite
    assert list(est.distortion_curve) == sorted(est.distortion_curve)
    with pytest.raises(SpaceError):
        estimate_index(grid(8), alpha_grid=())
    with pytest.raises(SpaceError):
        estimate_index(grid(8), alpha_grid=(2.0, 1.0))
    with pytest.raises(SpaceError):
        estimate_index(grid(8), budget=1.0)


def test_ultrametric_index_is_infinite():
    est = estimate_index(ultrametric_tree(4))
    assert est.infinite and est.lower_bound == max(default_alpha_grid())
    assert set(est.distortion_curve) == {1.0}


def test_grid_index_bracket_closed_form():
    # on a uniform grid with spacing h the power distortion at alpha > 1 is h**(1 - alpha)
    n = 16
    h = 1 / (n - 1)
    est = estimate_index(grid(n))
    alpha_star = 1 + math.log(2) / math.log(1 / h)
    assert abs(est.lower_bound - alpha_star) < 1e-6


def test_snowflake_index_bracket_closed_form():
    n = 16
    h = 1 / (n - 1)
    est = estimate_index(snowflake_grid(n, 2.0))
    # rho = |x-y|**(1/2): power distortion h**(1 - alpha/2)
    alpha_star = 2 * (1 + math.log(2) / math.log(1 / h))
    assert abs(est.lower_bound - alpha_star) < 1e-6
