import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import line
from qmext.embeddings import (CELLS, EmbeddingError, MatrixReport, besov_epsilon_check, characterization_matrix,
                              critical_exponent, domain_constants, embedding_report, global_check, holder_check,
                              matrix_trend, poincare_check, regime, sobolev_check, test_family as family,
                              trudinger_check, v_condition)
from qmext.functions import INF
from qmext.space import QuasiMetricSpace
from qmext.workbench.generators import grid

seeds = st.integers(0, 2**32 - 1)


def pair():
    return line([0, 0.5])


def test_regime_boundaries():
    assert regime(2.0, 1.0, 0.5) == "critical"
    assert regime(math.nextafter(2.0, 0), 1.0, 0.5) == "critical"
    assert regime(1.99, 1.0, 0.5) == "subcritical"
    assert regime(2.01, 1.0, 0.5) == "supercritical"
    # Besov flavor with q > p moves the threshold to Q/eps
    assert critical_exponent(1.0, 0.5, "N", p=2.0, q=4.0, eps=0.25) == 4.0
    assert regime(3.0, 1.0, 0.5, "N", q=4.0, eps=0.25) == "subcritical"
    assert regime(3.0, 1.0, 0.5, "N", q=2.0, eps=0.25) == "supercritical"
    with pytest.raises(EmbeddingError):
        critical_exponent(1.0, 0.5, "N", p=2.0, q=4.0)


def test_poincare_two_point_closed_form():
    row = poincare_check(pair(), (0, 1.0), [0.0, 1.0], 1.0, 2.0, Q=4.0)
    # p* = 4, optimal gamma 1/2; single gradient (1, 1); b = 2 attained at r = 1
    assert row.lhs == pytest.approx(0.5, rel=1e-9)
    assert row.extra["b"] == 2.0
    assert row.rhs_core == pytest.approx(1.0, rel=1e-8)
    assert row.empirical_constant == pytest.approx(0.5, rel=1e-8)


def test_holder_two_point_closed_form():
    row = holder_check(pair(), (0, 1.0), [0.0, 1.0], 1.0, 2.0, Q=1.0)
    assert row.lhs == pytest.approx(math.sqrt(2), rel=1e-12)
    assert row.rhs_core == pytest.approx(1.0, rel=1e-8)
    assert row.empirical_constant == pytest.approx(math.sqrt(2), rel=1e-8)


def test_global_two_point_closed_form():
    row = global_check(pair(), None, [0.0, 1.0], 1.0, 2.0, Q=1.0)
    assert row.regime == "supercritical"
    assert row.empirical_constant == pytest.approx(1.0, rel=1e-8)
    assert global_check(pair(), None, [3.0, 3.0], 1.0, 2.0, Q=1.0).empirical_constant == 0.0


def test_constant_function_gives_zero():
    sp = grid(10)
    u = np.full(10, 1.5)
    assert poincare_check(sp, (4, 0.5), u, 0.5, 1.0, Q=1.0).empirical_constant == 0.0
    assert sobolev_check(sp, (4, 0.5), u, 0.5, 1.0, Q=1.0).empirical_constant == 0.0
    assert holder_check(sp, (4, 0.5), u, 0.5, 3.0, Q=1.0).empirical_constant == 0.0
    with pytest.raises(EmbeddingError):
        trudinger_check(sp, (4, 0.5), u, 0.5, Q=1.0)


def test_regime_guards():
    sp = grid(6)
    u = np.arange(6.0)
    with pytest.raises(EmbeddingError):
        poincare_check(sp, (0, 0.5), u, 0.5, 3.0, Q=1.0)
    with pytest.raises(EmbeddingError):
        sobolev_check(sp, (0, 0.5), u, 0.5, 3.0, Q=1.0)
    with pytest.raises(EmbeddingError):
        holder_check(sp, (0, 0.5), u, 0.5, 1.0, Q=1.0)
    with pytest.raises(EmbeddingError):
        besov_epsilon_check(sp, (0, 0.5), u, 0.5, 2.0, 2.0, 0.7, Q=1.0)


def test_trudinger_curve_monotone():
    sp = grid(12)
    u = sp.dist[5] / sp.dist[5].max()
    row = trudinger_check(sp, (5, 0.6), u, 0.5, Q=1.0)
    curve = np.array(row.extra["curve"])
    assert np.all(curve[1:] >= curve[:-1])
    assert 0 < row.extra["C1"] < math.inf and row.empirical_constant == pytest.approx(1 / row.extra["C1"])


def test_v_condition_exact_b():
    sp = line([0, 0.5])
    assert v_condition(sp, 0, 1.0, 1.0, 1.0) == 2.0
    assert v_condition(sp, 0, 1.0, 1.0, 4.0) == 2.0


def test_besov_routes():
    sp = grid(12)
    u = sp.dist[0]
    sub = besov_epsilon_check(sp, (6, 0.5), u, 0.6, 1.5, 4.0, 0.3, Q=1.0)
    crit = besov_epsilon_check(sp, (6, 0.5), u, 0.6, 1 / 0.3, 4.0, 0.3, Q=1.0)
    sup = besov_epsilon_check(sp, (6, 0.5), u, 0.6, 4.0, 4.0, 0.3, Q=1.0)
    assert (sub.regime, crit.regime, sup.regime) == ("subcritical", "critical", "supercritical")
    assert all(math.isfinite(r.empirical_constant) for r in (sub, crit, sup))


def _perm_space(sp, perm):
    return QuasiMetricSpace(sp.dist[np.ix_(perm, perm)], sp.weight[perm])


@given(seeds)
def test_relabel_and_scale_invariance(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    sp = grid(7)
    u = rng.normal(size=7)
    perm = rng.permutation(7)
    inv = np.argsort(perm)
    other = _perm_space(sp, perm)
    x = 3
    a = holder_check(sp, (x, 0.6), u, 0.5, 3.0, Q=1.0).empirical_constant
    b = holder_check(other, (int(inv[x]), 0.6), u[perm], 0.5, 3.0, Q=1.0).empirical_constant
    c = holder_check(sp, (x, 0.6), -2.5 * u, 0.5, 3.0, Q=1.0).empirical_constant
    assert b == pytest.approx(a, rel=1e-7) and c == pytest.approx(a, rel=1e-7)
    a = sobolev_check(sp, (x, 0.6), u, 0.5, 1.5, Q=1.0).empirical_constant
    b = sobolev_check(other, (int(inv[x]), 0.6), u[perm], 0.5, 1.5, Q=1.0).empirical_constant
    c = sobolev_check(sp, (x, 0.6), 4 * u, 0.5, 1.5, Q=1.0).empirical_constant
    assert b == pytest.approx(a, rel=1e-6) and c == pytest.approx(a, rel=1e-6)


def test_domain_statement_matches_ball_statement_on_whole_space():
    sp = grid(9)
    u = np.sin(3 * np.arange(9.0))
    params = {"s": 0.5, "p_sub": 1.2, "p_sup": 3.0, "radii": (2.0,), "max_centers": 1, "omega_exp": 1.0,
              "C2_cap": 10.0}
    from qmext.functions import minimal_norm

    idx = np.arange(9)
    n_sub = minimal_norm(sp, u, 0.5, 1.2, INF).value
    vals, _ = domain_constants(sp, idx, u, n_sub, 1.0, 0.0, params, 1.0)
    row = sobolev_check(sp, (0, 2.0), u, 0.5, 1.2, Q=1.0, sigma=1.0)
    assert vals["d"] == pytest.approx(row.extra["sobolev_constant"], rel=1e-7)
    assert vals["e"] == pytest.approx(row.empirical_constant, rel=1e-7)


def test_family_is_deterministic():
    sp = grid(16)
    a, la = family(sp, 5, size=20)
    b, lb = family(sp, 5, size=20)
    assert np.array_equal(a, b) and la == lb and a.shape == (20, 16)
    assert la[:2] == ["constant", "coordinate"] and "random" in la


def test_embedding_report_aggregates():
    sp = grid(10)
    fam, _ = family(sp, 1, size=6, bumps=False)
    rep = embedding_report(sp, [(2, 0.5), (7, 0.3)], fam, 0.5, 3.0, Q=1.0, seed=1)
    assert rep.regime == "supercritical" and len(rep.rows) == 12
    assert rep.max_constant == max(r.empirical_constant for r in rep.rows)
    crit = embedding_report(sp, [(2, 0.5)], fam, 0.5, 2.0, Q=1.0)
    # the constant member has zero seminorm and is skipped at the critical exponent
    assert crit.regime == "critical" and len(crit.rows) == 5


def test_matrix_on_whole_space():
    sp = grid(10)
    rep = characterization_matrix(sp, range(10), {"Q": 1.0, "family_size": 8, "max_centers": 4})
    assert rep.cells["a"] == 1.0 and rep.cells["b"] == 1.0 and rep.cells["c"] == 1.0
    assert all(math.isfinite(rep.cells[k]) for k in CELLS)
    assert rep.params["full"]


def test_matrix_rejects_wrong_regimes():
    with pytest.raises(EmbeddingError):
        characterization_matrix(grid(6), range(6), {"Q": 1.0, "p_sub": 3.0})


def test_matrix_trend_logic():
    def rep(**cells):
        return MatrixReport(cells=cells, witnesses={}, params={}, tags=[])

    tr = matrix_trend([rep(a=1.0, b=2.0), rep(a=1.5, b=5.0), rep(a=2.0, b=5.0)])
    assert tr["a"]["stable"] and not tr["a"]["blowup"]
    assert tr["b"]["blowup"] and not tr["b"]["stable"]
    assert tr["b"]["growth"] == [2.5, 1.0]
