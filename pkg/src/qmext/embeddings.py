"""Empirical constants for Sobolev-Poincare, Trudinger and Hoelder embeddings.

Every check returns the ratio of the left-hand side to the constant-free
right-hand side of the corresponding inequality, so the reported number is
the smallest constant that makes the inequality true on the given instance.
The characterization matrix runs the domain versions of these inequalities
on a subset Omega together with the measure density constant and the
extension ratios, on a shared family of test functions.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .extension import ExtensionConfig, verify_extension
from .functions import INF, inf_deviation, lp_norm, minimal_norm
from .measure import ahlfors_bounds, measure_density, regularity, uniform_perfectness
from .metrization import regularize
from .space import SpaceError, compute_constants
from .whitney import holder_bumps

REGIMES = ("subcritical", "critical", "supercritical")


class EmbeddingError(ValueError):
    pass


def critical_exponent(Q, s, flavor="M", p=None, q=None, eps=None):
    """Q/s, or Q/eps for the Besov flavor when q > p."""
    if flavor == "N" and q is not None and p is not None and q > p:
        if eps is None or not 0 < eps < s:
            raise EmbeddingError("Besov flavor with q > p needs eps in (0, s)")
        return Q / eps
    return Q / s


def regime(p, Q, s, flavor="M", q=None, eps=None):
    crit = critical_exponent(Q, s, flavor, p, q, eps)
    if math.isclose(p, crit, rel_tol=1e-12):
        return "critical"
    return "subcritical" if p < crit else "supercritical"


@dataclass(frozen=True)
class EmbeddingRow:
    center: int
    radius: float
    lhs: float
    rhs_core: float
    empirical_constant: float
    regime: str
    extra: dict = field(default_factory=dict)


@dataclass
class EmbeddingReport:
    regime: str
    rows: list
    max_constant: float
    median_constant: float
    family: str
    seed: int = None


def _ratio(a, b):
    if b == 0:
        return 0.0 if a == 0 else INF
    return float(a / b)


def _members(space, center, radius):
    return np.flatnonzero(space.dist[center] < radius)


def v_condition(space, center, radius, sigma, Q):
    """Exact b = inf mu(B(x,r)) / r**Q over balls B(x,r) inside sigma*B0 with r <= sigma*R0."""
    d, w = space.dist, space.weight
    big = d[center] < sigma * radius
    inside = np.flatnonzero(big)
    outside = np.flatnonzero(~big)
    best = INF
    for x in inside:
        cap = sigma * radius
        if outside.size:
            cap = min(cap, float(d[x, outside].min()))
        row = d[x]
        cand = np.unique(np.append(row[(row > 0) & (row < cap)], cap))
        mass = np.array([w[row < r].sum() for r in cand])
        best = min(best, float((mass / cand ** Q).min()))
    return best


def _local(space, center, radius, sigma):
    """Index arrays of B0 and sigma*B0 and the subspace on sigma*B0."""
    B = _members(space, center, radius)
    S = _members(space, center, sigma * radius)
    if S.size < 2:
        return B, S, None
    return B, S, space.restrict(S)


def _local_norm(sub, u, S, s, p, q, flavor):
    if sub is None:
        return 0.0, None
    res = minimal_norm(sub, u[S], s, p, q, flavor)
    return res.value, res


def _lp(u, w, r):
    return lp_norm(np.abs(u), w, r)


def _dev(u, w, r):
    """inf over gamma of the (non-averaged) L^r norm of u - gamma."""
    if u.size == 0:
        return 0.0
    val, _ = inf_deviation(u, w, r)
    return val * float(w.sum()) ** (1.0 / r) if r != INF else val


def poincare_check(space, ball, u, s, p, q=INF, flavor="M", Q=None, sigma=None):
    """Averaged Poincare inequality on B0 with the single-gradient right-hand side."""
    u = np.asarray(u, dtype=float)
    Q = _Q(space, Q)
    if regime(p, Q, s) != "subcritical":
        raise EmbeddingError("poincare_check needs p < Q/s; use trudinger_check or holder_check")
    center, radius = ball
    sigma = compute_constants(space).c_rho if sigma is None else sigma
    B, S, sub = _local(space, center, radius, sigma)
    w = space.weight
    pstar = Q * p / (Q - s * p)
    lhs, _ = inf_deviation(u[B], w[B], pstar)
    if sub is None or lhs == 0:
        return EmbeddingRow(center, radius, lhs, 0.0, 0.0, "subcritical")
    res = minimal_norm(sub, u[S], s, p, INF, "M")
    g = res.witness.values.max(axis=0) if res.witness.levels else np.zeros(S.size)
    b = v_condition(space, center, radius, sigma, Q)
    mS = float(w[S].sum())
    avg_g = (float(np.sum(w[S] * g ** p)) / mS) ** (1.0 / p)
    rhs = (mS / (b * radius ** Q)) ** (1.0 / p) * radius ** s * avg_g
    return EmbeddingRow(center, radius, lhs, rhs, _ratio(lhs, rhs), "subcritical",
                        {"p_star": pstar, "b": b, "sigma": sigma, "status": res.status})


def sobolev_check(space, ball, u, s, p, q=INF, flavor="M", Q=None, sigma=None, eps=None):
    """Unaveraged Sobolev inequality and its inf-over-gamma form on B0.

    ``empirical_constant`` is the inf-over-gamma constant; the plain form is in
    ``extra["sobolev_constant"]``.  The Besov flavor uses eps in place of s in
    the exponents when q > p.
    """
    u = np.asarray(u, dtype=float)
    Q = _Q(space, Q)
    e = critical_exponent(Q, s, flavor, p, q, eps)
    e = Q / e  # the exponent playing the role of s in p*
    if p >= Q / e:
        raise EmbeddingError("sobolev_check needs the subcritical regime")
    center, radius = ball
    sigma = compute_constants(space).c_rho if sigma is None else sigma
    B, S, sub = _local(space, center, radius, sigma)
    w = space.weight
    pstar = Q * p / (Q - e * p)
    norm, _ = _local_norm(sub, u, S, s, p, q, flavor)
    mS = float(w[S].sum())
    lhs = _dev(u[B], w[B], pstar)
    rhs = mS ** (-e / Q) * radius ** s * norm
    plain = _lp(u[B], w[B], pstar)
    plain_rhs = mS ** (-e / Q) * (radius ** s * norm + _lp(u[S], w[S], p))
    return EmbeddingRow(center, radius, lhs, rhs, _ratio(lhs, rhs), "subcritical",
                        {"p_star": pstar, "sobolev_constant": _ratio(plain, plain_rhs), "norm": norm})


def trudinger_check(space, ball, u, s, q=INF, C1_grid=None, Q=None, flavor="M", sigma=None,
                    C2_cap=10.0, omega_exp=1.0, eps=None):
    """Exponential integrability at the critical exponent; reports the largest admissible C1 on the grid."""
    u = np.asarray(u, dtype=float)
    Q = _Q(space, Q)
    e = eps if (flavor == "N" and eps is not None) else s
    p = Q / e
    center, radius = ball
    sigma = compute_constants(space).c_rho if sigma is None else sigma
    B, S, sub = _local(space, center, radius, sigma)
    norm, _ = _local_norm(sub, u, S, s, p, q, flavor)
    if not norm > 0:
        raise EmbeddingError("trudinger_check needs a function with positive seminorm")
    w = space.weight
    mS = float(w[S].sum())
    grid = np.geomspace(1e-3, 1e3, 61) if C1_grid is None else np.asarray(C1_grid, dtype=float)
    curve = _exp_curve(u[B], w[B], mS ** (e / Q) / (radius ** s * norm), grid, omega_exp)
    ok = grid[curve <= C2_cap]
    best = float(ok.max()) if ok.size else 0.0
    return EmbeddingRow(center, radius, best, C2_cap, _ratio(1.0, best), "critical",
                        {"C1": best, "curve": tuple(float(c) for c in curve), "grid": tuple(float(g) for g in grid),
                         "norm": norm})


def _exp_curve(vals, w, scale, grid, omega_exp=1.0):
    """mu-average of exp((C1 * scale * |u - u_avg|)**omega) for each C1 in the grid."""
    dev = np.abs(vals - float(np.sum(w * vals) / w.sum())) * scale
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.exp((grid[:, None] * dev[None, :]) ** omega_exp)
        return (vals @ w) / float(w.sum())


def holder_check(space, ball, u, s, p, q=INF, flavor="M", Q=None, sigma=None, eps=None):
    """Hoelder modulus of order s - Q/p on B0 against the seminorm on sigma*B0."""
    u = np.asarray(u, dtype=float)
    Q = _Q(space, Q)
    crit = Q / eps if (flavor == "N" and eps is not None) else Q / s
    if not p > crit:
        raise EmbeddingError("holder_check needs the supercritical regime")
    center, radius = ball
    sigma = compute_constants(space).c_rho if sigma is None else sigma
    B, S, sub = _local(space, center, radius, sigma)
    norm, _ = _local_norm(sub, u, S, s, p, q, flavor)
    w = space.weight
    mS = float(w[S].sum())
    lhs = _holder_quotient(space.dist[np.ix_(B, B)], u[B], s - Q / p)
    rhs = radius ** (Q / p) * mS ** (-1.0 / p) * norm
    return EmbeddingRow(center, radius, lhs, rhs, _ratio(lhs, rhs), "supercritical", {"norm": norm})


def _holder_quotient(d, u, beta):
    if u.size < 2:
        return 0.0
    diff = np.abs(u[:, None] - u[None, :])
    den = np.where(d > 0, d, 1.0) ** beta
    q = np.where(d > 0, diff / den, 0.0)
    return float(q.max())


def besov_epsilon_check(space, ball, u, s, p, q, eps, Q=None, sigma=None, C1_grid=None):
    """Besov-flavor embedding at critical exponent Q/eps, routed by regime."""
    Q = _Q(space, Q)
    if not 0 < eps < s:
        raise EmbeddingError("eps must lie in (0, s)")
    crit = Q / eps
    if math.isclose(p, crit, rel_tol=1e-12):
        return trudinger_check(space, ball, u, s, q, C1_grid, Q, "N", sigma, eps=eps)
    if p < crit:
        return _besov_sobolev(space, ball, u, s, p, q, eps, Q, sigma)
    return holder_check(space, ball, u, s, p, q, "N", Q, sigma, eps)


def _besov_sobolev(space, ball, u, s, p, q, eps, Q, sigma):
    u = np.asarray(u, dtype=float)
    center, radius = ball
    sigma = compute_constants(space).c_rho if sigma is None else sigma
    B, S, sub = _local(space, center, radius, sigma)
    w = space.weight
    pstar = Q * p / (Q - eps * p)
    norm, _ = _local_norm(sub, u, S, s, p, q, "N")
    mS = float(w[S].sum())
    lhs = _dev(u[B], w[B], pstar)
    rhs = mS ** (-eps / Q) * radius ** s * norm
    plain = _lp(u[B], w[B], pstar)
    plain_rhs = mS ** (-eps / Q) * (radius ** s * norm + _lp(u[S], w[S], p))
    return EmbeddingRow(center, radius, lhs, rhs, _ratio(lhs, rhs), "subcritical",
                        {"p_star": pstar, "sobolev_constant": _ratio(plain, plain_rhs), "norm": norm})


def global_check(space, omega, u, s, p, q=INF, flavor="M", Q=None, radii=None, C1_grid=None, C2_cap=10.0):
    """Global embeddings on Omega (or X when omega is None) under Ahlfors regularity."""
    Q = _Q(space, Q)
    idx = np.arange(space.n) if omega is None else np.asarray(sorted(omega), dtype=int)
    sub = space if omega is None else space.restrict(idx)
    u = np.asarray(u, dtype=float)
    u = u if u.size == sub.n else u[idx]
    d = sub.dist
    pos = d[d > 0]
    _, lo, hi = ahlfors_bounds(space, Q, (float(space.dist[space.dist > 0].min()), space.diameter()))
    tags = [] if (lo > 0 and hi / lo <= 1e3) else ["non-ahlfors"]
    w = sub.weight
    reg = regime(p, Q, s, flavor, q)
    norm = minimal_norm(sub, u, s, p, q, flavor).value
    diam = float(pos.max())
    extra = {"tags": tags, "norm": norm, "ahlfors": (lo, hi)}
    if reg == "subcritical":
        pstar = Q * p / (Q - s * p)
        lhs = _dev(u, w, pstar)
        extra["sobolev_constant"] = _ratio(_lp(u, w, pstar), norm + diam ** (-s) * _lp(u, w, p))
        return EmbeddingRow(-1, diam, lhs, norm, _ratio(lhs, norm), reg, extra)
    if reg == "supercritical":
        lhs = _holder_quotient(d, u, s - Q / p)
        return EmbeddingRow(-1, diam, lhs, norm, _ratio(lhs, norm), reg, extra)
    if not norm > 0:
        raise EmbeddingError("critical global check needs positive seminorm")
    grid = np.geomspace(1e-3, 1e3, 61) if C1_grid is None else np.asarray(C1_grid, dtype=float)
    radii = [diam] if radii is None else radii
    worst = np.zeros(grid.size)
    for x in range(sub.n):
        for r in radii:
            m = d[x] < r
            curve = _exp_curve(u[m], w[m], 1.0 / norm, grid) * float(w[m].sum()) / r ** Q
            worst = np.maximum(worst, curve)
    ok = grid[worst <= C2_cap]
    best = float(ok.max()) if ok.size else 0.0
    extra["C1"] = best
    return EmbeddingRow(-1, diam, best, C2_cap, _ratio(1.0, best), reg, extra)


def _Q(space, Q):
    if Q is not None:
        return float(Q)
    return regularity(space, kappa=False).q_doubling[0]


# ---------------------------------------------------------------- test functions

def test_family(space, seed, size=20, s=0.5, p=2.0, q=2.0, bumps=True):
    """Seeded family: constant, coordinate, distance, trigonometric, Hoelder bump and random vectors.

    The coordinate of a point is its normalized distance to point 0, so the
    smooth members are restrictions of fixed functions and stay comparable
    when the space is refined.  Returns (matrix of shape (size, n), labels).
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    n = space.n
    t = space.dist[0] / space.dist[0].max()
    funcs, labels = [np.ones(n), t.copy()], ["constant", "coordinate"]
    for _ in range(4):
        c = rng.random()
        funcs.append(np.abs(t - c))
        labels.append(f"distance({c:.3f})")
    for _ in range(4):
        k, ph = int(rng.integers(1, 4)), rng.random() * 2 * math.pi
        funcs.append(np.sin(math.pi * k * t + ph))
        labels.append(f"trig({k},{ph:.3f})")
    if bumps:
        reg = regularize(space, 1.0 / max(math.log2(compute_constants(space).c_rho), 1 / 8))
        for _ in range(2):
            x = int(rng.integers(n))
            fam = holder_bumps(space, reg, x, 0.5, min(s, reg.alpha), p, q, count=1)
            funcs.append(fam.functions[0])
            labels.append(f"bump({x})")
    while len(funcs) < size:
        funcs.append(rng.random(n))
        labels.append("random")
    return np.array(funcs[:size]), labels[:size]


# ---------------------------------------------------------------- family runs

def embedding_report(space, balls, family, s, p, q=INF, flavor="M", Q=None, eps=None, seed=None,
                     family_name="custom"):
    """Route every (ball, u) pair through the check matching the regime and aggregate."""
    Q = _Q(space, Q)
    reg = regime(p, Q, s, flavor, q, eps)
    rows = []
    for u in family:
        for ball in balls:
            if flavor == "N" and eps is not None:
                rows.append(besov_epsilon_check(space, ball, u, s, p, q, eps, Q))
            elif reg == "subcritical":
                rows.append(sobolev_check(space, ball, u, s, p, q, flavor, Q))
            elif reg == "supercritical":
                rows.append(holder_check(space, ball, u, s, p, q, flavor, Q))
            else:
                try:
                    rows.append(trudinger_check(space, ball, u, s, q, Q=Q, flavor=flavor))
                except EmbeddingError:
                    continue
    consts = np.array([r.empirical_constant for r in rows]) if rows else np.zeros(1)
    return EmbeddingReport(reg, rows, float(consts.max()), float(np.median(consts)), family_name, seed)


# ---------------------------------------------------------------- characterization matrix

DEFAULT_PARAMS = {
    "s": 0.6, "Q": None, "p_sub": 1.2, "p_sup": 2.0, "q": INF, "flavor": "M", "seed": 0,
    "family_size": 20, "radii": (1.0, 0.5, 0.25, 0.125), "max_centers": 12, "C2_cap": 10.0,
    "omega_exp": 1.0, "ext_p": 2.0, "ext_q": 2.0, "bumps": False, "perfect_r_min": None,
}

CELLS = ("a", "b", "c", "d", "e", "f", "g")


@dataclass
class MatrixReport:
    cells: dict
    witnesses: dict
    params: dict
    tags: list
    runtime_parts: dict = field(default_factory=dict)


def _centers(omega_idx, k):
    if omega_idx.size <= k:
        return omega_idx
    pick = np.unique(np.round(np.linspace(0, omega_idx.size - 1, k)).astype(int))
    return omega_idx[pick]


def domain_constants(space, omega_idx, u, norm_sub, norm_sup, norm_crit, params, Q):
    """Largest (d), (e), (f), (g) constants for one function over the ball grid.

    ``u`` lives on Omega; balls are centred in Omega with radii in (0, 1]
    and measured in X; the seminorms are global on Omega.
    """
    s = params["s"]
    d, w = space.dist, space.weight
    p, ps = params["p_sub"], params["p_sup"]
    pstar = Q * p / (Q - s * p)
    uf = np.zeros(space.n)
    uf[omega_idx] = u
    inO = np.zeros(space.n, dtype=bool)
    inO[omega_idx] = True
    lp_sub = _lp(u, w[omega_idx], p)
    out = {"d": 0.0, "e": 0.0, "f": 0.0, "g": 0.0}
    wit = {}
    grid = np.geomspace(1e-3, 1e3, 61)
    worst_curve = np.zeros(grid.size)
    for x in _centers(omega_idx, params["max_centers"]):
        for R in params["radii"]:
            ball = d[x] < R
            mB = float(w[ball].sum())
            sel = ball & inO
            vals, ws = uf[sel], w[sel]
            dd = _ratio(_lp(vals, ws, pstar) * mB ** (s / Q), R ** s * norm_sub + lp_sub)
            ee = _ratio(_dev(vals, ws, pstar) * mB ** (s / Q), R ** s * norm_sub)
            idx = np.flatnonzero(sel)
            gg = _ratio(_holder_quotient(d[np.ix_(idx, idx)], vals, s - Q / ps) * mB ** (1.0 / ps),
                        R ** (Q / ps) * norm_sup)
            for key, val in (("d", dd), ("e", ee), ("g", gg)):
                if val > out[key]:
                    out[key], wit[key] = val, (int(x), float(R))
            if norm_crit > 0:
                curve = _exp_curve(vals, ws, mB ** (s / Q) / (R ** s * norm_crit), grid, params["omega_exp"])
                curve = curve * float(ws.sum()) / mB
                worst_curve = np.maximum(worst_curve, curve)
    if norm_crit > 0:
        ok = grid[worst_curve <= params["C2_cap"]]
        out["f"] = _ratio(1.0, float(ok.max()) if ok.size else 0.0)
    return out, wit


def characterization_matrix(space, omega, params=None):
    """Run statements (a)-(g) on a shared seeded family; every cell is the max constant over the family.

    Cell (f) reports 1/C1 for the largest admissible C1, so that for every
    cell larger means worse.  Cell (c) is None when the linear operator's
    exponent range p, q > Q/(Q+s) is not met.
    """
    import time

    P = dict(DEFAULT_PARAMS)
    P.update(params or {})
    omega_idx = np.asarray(sorted(omega), dtype=int)
    if omega_idx.size == 0:
        raise SpaceError("omega must be nonempty")
    Q = _Q(space, P["Q"])
    s = P["s"]
    for key, p in (("p_sub", P["p_sub"]), ("p_sup", P["p_sup"])):
        want = "subcritical" if key == "p_sub" else "supercritical"
        if regime(p, Q, s) != want:
            raise EmbeddingError(f"{key} = {p} is not {want} for Q/s = {Q / s}")
    tags = []
    times = {}
    t0 = time.perf_counter()
    r_min = P["perfect_r_min"]
    if r_min is None:
        # skip lattice scales: a finite set is never perfect below twice its spacing
        r_min = 2 * float(space.dist[space.dist > 0].min())
    perf = uniform_perfectness(space, omega_idx, r_min=r_min)
    if perf.absent:
        tags.append("not-uniformly-perfect")
    dens = measure_density(space, omega_idx)
    times["a"] = time.perf_counter() - t0
    cells = {"a": dens.c_mu}
    wits = {"a": dens.witness}
    fam, labels = test_family(space, P["seed"], P["family_size"], s, P["ext_p"], P["ext_q"], P["bumps"])
    sub = space.restrict(omega_idx)
    t0 = time.perf_counter()
    full = omega_idx.size == space.n
    ext_b, ext_c = 0.0, 0.0
    linear_ok = P["ext_p"] > Q / (Q + s) and P["ext_q"] > Q / (Q + s)
    for u in fam:
        cfg = ExtensionConfig(s=s, p=P["ext_p"], q=P["ext_q"], flavor=P["flavor"])
        rep = verify_extension(space, omega_idx, u[omega_idx], cfg)
        ext_b = max(ext_b, rep.norm_ratio)
        if linear_ok:
            cfg = ExtensionConfig(s=s, p=P["ext_p"], q=P["ext_q"], flavor=P["flavor"], mode="average", Q=Q)
            ext_c = max(ext_c, verify_extension(space, omega_idx, u[omega_idx], cfg).norm_ratio)
    cells["b"] = ext_b
    cells["c"] = ext_c if linear_ok else None
    times["bc"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    for key in ("d", "e", "f", "g"):
        cells[key] = 0.0
    for i, u in enumerate(fam):
        uo = u[omega_idx]
        if np.ptp(uo) == 0:
            continue
        n_sub = minimal_norm(sub, uo, s, P["p_sub"], P["q"], P["flavor"]).value
        n_sup = minimal_norm(sub, uo, s, P["p_sup"], P["q"], P["flavor"]).value
        n_crit = minimal_norm(sub, uo, s, Q / s, P["q"], P["flavor"]).value
        vals, wit = domain_constants(space, omega_idx, uo, n_sub, n_sup, n_crit, P, Q)
        for key, val in vals.items():
            if val > cells[key]:
                cells[key] = val
                wits[key] = (i, labels[i]) + tuple(wit.get(key, ()))
    times["defg"] = time.perf_counter() - t0
    P["Q"] = Q
    P["full"] = full
    return MatrixReport(cells=cells, witnesses=wits, params=P, tags=tags, runtime_parts=times)


def matrix_trend(reports, budget=2.0):
    """Per-cell growth factors between consecutive refinement levels.

    Returns {cell: {"values": [...], "growth": [...], "stable": bool, "blowup": bool}}.
    """
    out = {}
    for key in CELLS:
        vals = [r.cells.get(key) for r in reports]
        if any(v is None for v in vals):
            continue
        growth = [_ratio(b, a) if a > 0 else (1.0 if b == 0 else INF) for a, b in zip(vals, vals[1:])]
        out[key] = {"values": vals, "growth": growth,
                    "stable": all(math.isfinite(v) for v in vals) and all(g <= budget for g in growth),
                    "blowup": any(g >= budget for g in growth)}
    return out
