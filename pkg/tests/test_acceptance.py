"""End-to-end acceptance criteria.  Each test prints one ``CRITERION k: PASS|FAIL`` line.

The lines are also collected in ``RESULTS`` and repeated in the terminal
summary, so they show up in plain ``pytest -v`` output.  Run this file as a
script to print them without pytest.
"""

import math
import time
from fractions import Fraction

import mpmath
import numpy as np

from conftest import four_point, line, random_space
from test_functions import max_characterization
from test_measure import _accepted_sequences
from test_whitney import build, verify_cover, verify_partition
from qmext.embeddings import characterization_matrix, matrix_trend
from qmext.extension import ExtensionConfig, extend, verify_extension
from qmext.functions import (INF, check_gradient, geometric_sum_check, median, median_bound_check, minimal_norm,
                             rescale_gradient)
from qmext.measure import iteration_bound
from qmext.metrization import estimate_index, regularize
from qmext.space import QuasiMetricSpace, compute_constants
from qmext.workbench.generators import (cantor_in_grid, cusp, grid, random_quasimetric, snowflake_grid,
                                        ultrametric_tree)
from qmext.workbench.oracle import oracle_bounds

RESULTS = {}


def report(k, ok, detail):
    line_ = f"CRITERION {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[k] = line_
    print(line_)
    assert ok, line_


def seeded(seed):
    return np.random.Generator(np.random.PCG64(seed))


# ------------------------------------------------------------------ 1

def enumerate_constants(d):
    """Every triple (x, y, z) visited; z is looped, (x, y) vectorized."""
    n = len(d)
    c = 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        for z in range(n):
            den = np.maximum(d[:, z][:, None], d[z, :][None, :])
            r = np.where(den > 0, d / den, 0.0)
            c = max(c, float(r.max()))
        off = ~np.eye(n, dtype=bool)
        ct = max(1.0, float((d.T[off] / d[off]).max()))
    return c, ct


def test_criterion_1_constants():
    spaces = [random_quasimetric(40, seed, power=1.0 + (seed % 3) * 0.5) for seed in range(50)]
    t0 = time.perf_counter()
    got = [compute_constants(sp) for sp in spaces]
    snow = compute_constants(snowflake_grid(64, 0.5)).c_rho
    elapsed = time.perf_counter() - t0
    mismatches = sum((g.c_rho, g.c_tilde) != enumerate_constants(sp.dist) for g, sp in zip(got, spaces))
    ok = mismatches == 0 and 3.8 <= snow <= 4.0 and elapsed < 5
    report(1, ok, f"mismatches={mismatches}/50 snowflake c_rho={snow:.6f} time={elapsed:.2f}s")


# ------------------------------------------------------------------ 2

def test_criterion_2_metrization():
    worst, above, bad_alpha = 0.0, 0, 0
    for seed in range(50):
        sp = random_quasimetric(30, seed, power=1.0 + (seed % 4) * 0.5)
        c = compute_constants(sp).c_rho
        if not c > 1:
            bad_alpha += 1
            continue
        alpha = 1 / math.log2(c)
        R = np.asarray(regularize(sp, alpha).matrix)
        M = R ** alpha
        excess = (M[:, None, :] - M[:, :, None] - M[None, :, :]).max() / M.max()
        worst = max(worst, float(excess))
        above += int(np.count_nonzero(R > sp.symmetrized()))
    ok = worst <= 1e-12 and above == 0 and bad_alpha == 0
    report(2, ok, f"max relative triangle excess={worst:.2e} entries above rho_sym={above}")


# ------------------------------------------------------------------ 3

def test_criterion_3_index():
    t0 = time.perf_counter()
    tree = estimate_index(ultrametric_tree(4), budget=2.0)
    g = {n: estimate_index(grid(n), budget=2.0).lower_bound for n in (16, 64, 256)}
    f = {n: estimate_index(snowflake_grid(n, 2.0), budget=2.0).lower_bound for n in (64, 256)}
    elapsed = time.perf_counter() - t0
    ok = (tree.infinite and 1 <= g[64] <= 1.5 and g[16] > g[64] > g[256]
          and 2 <= f[64] <= 2.5 and 2 <= f[256] < f[64] and elapsed < 30)
    report(3, ok, f"tree infinite={tree.infinite} grid={[round(v, 4) for v in g.values()]} "
                  f"snowflake={[round(v, 4) for v in f.values()]} time={elapsed:.1f}s")


# ------------------------------------------------------------------ 4

def test_criterion_4_norm_engine():
    # two points 0.3 apart (level 1), |u(x) - u(y)| = 1, s = 1: g(x) + g(y) >= 10/3 on level 1
    b = 10 / 3
    sp = line([0, 0.3])
    u = np.array([0.0, 1.0])
    closed = {(INF, INF): b / 2, (1, INF): b, (1, 1): b, (2, 2): b / math.sqrt(2), (2, INF): b / math.sqrt(2)}
    err = max(abs(minimal_norm(sp, u, 1.0, p, q).value - v) / v for (p, q), v in closed.items())
    # unequal weights (1, 3): L^1 puts all mass on the light point, L^2 splits 3:1
    sp3 = line([0, 0.3], weights=np.array([1.0, 3.0]))
    err = max(err, abs(minimal_norm(sp3, u, 1.0, 1, 1).value - b) / b,
              abs(minimal_norm(sp3, u, 1.0, 2, 2).value - b * math.sqrt(3) / 2) / (b * math.sqrt(3) / 2))

    worst_oracle = 0.0
    below = 0
    for p, q in ((1, 1), (2, 2), (1, INF), (INF, INF)):
        for seed in range(20):
            sp4, u4 = four_point(seed)
            val = minimal_norm(sp4, u4, 0.6, p, q).value
            ref = oracle_bounds(sp4, u4, 0.6, p, q)
            worst_oracle = max(worst_oracle, abs(val - ref.upper) / ref.upper)
            below += int(val < ref.lower * (1 - 1e-9))

    rng = seeded(44)
    zero_ok, homog = True, 0.0
    for _ in range(20):
        spr = random_space(rng, 6)
        for p, q in ((1, 1), (2, 2), (1, INF), (INF, INF)):
            zero_ok &= minimal_norm(spr, np.full(6, rng.normal()), 0.6, p, q).value == 0.0
            ur = rng.normal(size=6)
            v = minimal_norm(spr, ur, 0.6, p, q).value
            zero_ok &= v > 0
            lam = float(rng.uniform(0.1, 10))
            homog = max(homog, abs(minimal_norm(spr, lam * ur, 0.6, p, q).value - lam * v) / (lam * v))
    ok = err <= 1e-9 and worst_oracle <= 1e-3 and below == 0 and zero_ok and homog <= 1e-8
    report(4, ok, f"closed-form rel err={err:.1e} oracle rel diff={worst_oracle:.1e} (below lower={below}) "
                  f"zero<=>constant={zero_ok} homogeneity={homog:.1e}")


# ------------------------------------------------------------------ 5

def exact_median_bound(m, gamma, u, w, eta):
    if float(eta).is_integer():
        e, g = int(eta), Fraction(gamma)
        return (abs(Fraction(m) - g) ** e * sum(map(Fraction, w))
                <= 2 * sum(Fraction(a) * abs(Fraction(b) - g) ** e for a, b in zip(w, u)))
    with mpmath.workdps(60):
        g, e = mpmath.mpf(gamma), mpmath.mpf(eta)
        return bool(abs(mpmath.mpf(m) - g) ** e * mpmath.fsum(map(mpmath.mpf, w))
                    <= 2 * mpmath.fsum(mpmath.mpf(a) * abs(mpmath.mpf(b) - g) ** e for a, b in zip(w, u)))


def test_criterion_5_median():
    rng = seeded(55)
    med_bad = 0
    for _ in range(100):
        n = int(rng.integers(2, 15))
        u = rng.integers(0, 5, n).astype(float)
        w = rng.integers(1, 6, n).astype(float)
        sp = QuasiMetricSpace(np.ones((n, n)) - np.eye(n), w)
        med_bad += int(median(sp, u, range(n)) != max_characterization(u, w))
    bound_bad = 0
    for _ in range(200):
        n = int(rng.integers(2, 10))
        sp = random_space(rng, n)
        u = rng.normal(size=n)
        members = sorted(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False).tolist())
        gamma = float(rng.normal())
        eta = float(rng.choice([0.5, 1.0, 2.0, 3.0]))
        res = median_bound_check(sp, u, members, gamma, eta)
        m = median(sp, u, members)
        truth = exact_median_bound(m, gamma, u[members], sp.weight[members], eta)
        bound_bad += int(not (res.holds and truth))
    ok = med_bad == 0 and bound_bad == 0
    report(5, ok, f"median mismatches={med_bad}/100 bound failures={bound_bad}/200")


# ------------------------------------------------------------------ 6

def test_criterion_6_rescaling():
    rng = seeded(66)
    bad = 0
    for _ in range(20):
        sp = random_space(rng, 7)
        u = rng.normal(size=7)
        s = float(rng.uniform(0.3, 0.9))
        g = minimal_norm(sp, u, s, 2, 2).witness
        assert check_gradient(sp, u, s, g).ok
        h = rescale_gradient(g, 1, s)
        bad += sum(not check_gradient(sp, u, s, h, dist=sp.dist * f).ok for f in (2.0, 0.5))
    report(6, bad == 0, f"failed checks={bad}/40")


# ------------------------------------------------------------------ 7

def test_criterion_7_whitney():
    rng = seeded(77)
    n = 200
    sp = grid(n)
    failures, worst = 0, 0.0
    for _ in range(20):
        O = set()
        for _ in range(int(rng.integers(1, 4))):
            lo = int(rng.integers(0, n - 5))
            O |= set(range(lo, int(rng.integers(lo + 1, min(n, lo + 120)))))
        O -= set(rng.choice(n, size=int(rng.integers(0, 6)), replace=False).tolist())
        O = sorted(O) or [0]
        if len(O) == n:
            O = O[1:]
        reg, cover, pou = build(sp, O)
        try:
            verify_cover(sp, reg, cover, O)
            verify_partition(sp, reg, cover, pou)
        except AssertionError:
            failures += 1
        worst = max(worst, float(np.abs(pou.psi.sum(axis=0)[O] - 1).max()))
    ok = failures == 0 and worst <= 1e-12
    report(7, ok, f"invariant failures={failures}/20 max |sum psi - 1|={worst:.1e}")


# ------------------------------------------------------------------ 8

def test_criterion_8_extension():
    sp, om = cantor_in_grid(3)
    rng = seeded(88)
    exact = True
    for mode in ("median", "average"):
        cfg = ExtensionConfig(s=0.6, p=2, q=2, mode=mode)
        u = rng.normal(size=len(om))
        exact &= bool(np.array_equal(extend(sp, om, u, cfg).u_ext[om], u))
        res = extend(sp, om, np.full(len(om), -1.25), cfg)
        exact &= bool((res.u_ext[om] == -1.25).all())
        exact &= bool(np.array_equal(res.u_ext[res.V], -1.25 * res.cutoff[res.V]))
    cfg = ExtensionConfig(s=0.6, p=2, q=2, mode="average")
    a, b = rng.normal(size=len(om)), rng.normal(size=len(om))
    combo = 2 * extend(sp, om, a, cfg).u_ext - 3 * extend(sp, om, b, cfg).u_ext
    lin = extend(sp, om, 2 * a - 3 * b, cfg).u_ext - combo
    lin_err = float(np.abs(lin).max())

    stats, times = {}, []
    for level in (3, 4, 5):
        sp, om = cantor_in_grid(level)
        t0 = time.perf_counter()
        for p, q in ((2, 2), (0.8, 0.9)):
            vs, nr = [], []
            for seed in range(20):
                u = seeded(seed).normal(size=len(om))
                rep = verify_extension(sp, om, u, ExtensionConfig(s=0.6, p=p, q=q, mode="median"))
                vs.append(rep.validity_scale)
                nr.append(rep.norm_ratio)
            stats.setdefault((p, q), []).append((max(vs), max(nr)))
        times.append(time.perf_counter() - t0)
    finite = all(math.isfinite(x) for rows in stats.values() for row in rows for x in row)
    growth = max(b_ / a_ for rows in stats.values() for r0, r1 in zip(rows, rows[1:]) for a_, b_ in zip(r0, r1))
    ok = exact and lin_err <= 1e-12 and finite and growth <= 2 and max(times) < 60
    report(8, ok, f"exact identities={exact} linearity err={lin_err:.1e} finite={finite} "
                  f"max growth={growth:.3f} level times={[round(t, 1) for t in times]}s")


# ------------------------------------------------------------------ 9

def test_criterion_9_matrix():
    t0 = time.perf_counter()
    params = {"Q": 1.0}
    pos = matrix_trend([characterization_matrix(*cantor_in_grid(L), params) for L in (3, 4, 5)])
    neg = matrix_trend([characterization_matrix(*cusp(n), params) for n in (16, 64, 256)])
    elapsed = time.perf_counter() - t0
    pos_ok = all(row["stable"] and all(math.isfinite(v) for v in row["values"]) for row in pos.values())
    a_growth = neg["a"]["growth"]
    other = {k: max(row["growth"]) for k, row in neg.items() if k != "a"}
    neg_ok = min(a_growth) >= 4 and max(other.values()) >= 2
    ok = pos_ok and neg_ok and elapsed < 120
    report(9, ok, f"cantor stable={pos_ok} cusp C_mu growth={[round(g, 2) for g in a_growth]} "
                  f"largest other growth={max(other.values()):.2f} time={elapsed:.0f}s")


# ------------------------------------------------------------------ 10

def test_criterion_10_summation_and_iteration():
    rng = seeded(1010)
    worst = 0.0
    for _ in range(100):
        c = rng.random(int(rng.integers(1, 30))) * 10.0 ** rng.integers(-3, 4)
        c[rng.random(c.size) < 0.3] = 0.0
        if not c.any():
            c[0] = 1.0
        worst = max(worst, geometric_sum_check(2.0, 1.0, c)[1])
    iteration_bad = sum(not Fraction(seq[0]) >= Fraction(iteration_bound(theta, p, t))
                        for seq, theta, p, t in _accepted_sequences(rng, 50))
    ok = worst <= 3 + 1e-9 and iteration_bad == 0
    report(10, ok, f"max summation ratio={worst:.12f} iteration failures={iteration_bad}/50")


if __name__ == "__main__":
    import sys

    failed = 0
    for k in range(1, 11):
        fn = next(f for name, f in globals().items() if name.startswith(f"test_criterion_{k}_"))
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
