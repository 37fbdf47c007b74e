"""Whitney-type extension operators from a subset Omega to the whole space.

Off Omega the extension is a partition-of-unity mix of local values of u
(medians, or averages in the linear variant) taken on balls reflected into
Omega; a Hoelder cutoff confines the result to a neighbourhood V of Omega.
The module also builds the explicit fractional gradient of the extension and
a verification report comparing all the relevant norms.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .functions import (GradientSequence, active_levels, check_gradient, inf_deviation, level_matrix,
                        lp_norm, maximal_function, median, median_values, minimal_norm, sequence_norm)
from .measure import measure_density, regularity
from .metrization import regularize
from .space import SpaceError, compute_constants
from .whitney import holder_seminorm, partition_of_unity, whitney_cover

INF = math.inf


@dataclass(frozen=True)
class ExtensionConfig:
    """Exponents and construction parameters; ``None`` fields get the documented defaults."""

    s: float
    p: float
    q: float
    alpha: float = None
    epsilon: float = None
    delta: float = None
    t: float = None
    k0: int = None
    theta: float = None
    theta_prime: float = None
    mode: str = "median"
    flavor: str = "M"
    Q: float = None

    def resolve(self, space):
        """Fill defaults and validate every range constraint."""
        s, p, q = self.s, self.p, self.q
        if not (s > 0 and p > 0 and q > 0):
            raise SpaceError("s, p, q must be positive")
        if self.mode not in ("median", "average"):
            raise SpaceError("mode must be 'median' or 'average'")
        c0 = compute_constants(space).c_rho
        alpha_max = 1.0 / math.log2(c0) if c0 > 1 else 8.0
        alpha = min(alpha_max, 8.0) if self.alpha is None else float(self.alpha)
        if alpha > alpha_max * (1 + 1e-12):
            raise SpaceError("alpha exceeds 1/log2(c_rho)")
        if s > alpha or (s == alpha and q != INF):
            raise SpaceError("need s < alpha (or s = alpha with q = inf)")
        eps = s / 2 if self.epsilon is None else float(self.epsilon)
        if not 0 < eps < s:
            raise SpaceError("epsilon must lie in (0, s)")
        if self.delta is None:
            delta = 0.0 if alpha == s else min(alpha - s, s - eps) / 2
        else:
            delta = float(self.delta)
        if alpha > s and not 0 < delta < min(alpha - s, s - eps):
            raise SpaceError("delta out of range")
        if alpha == s and delta != 0:
            raise SpaceError("delta must be 0 when alpha = s")
        m = min(p, q)
        if self.t is None:
            t = 0.9 * min(p, q, 1.0)
            t = t if t < m else m / 2
        else:
            t = float(self.t)
        if not 0 < t < m:
            raise SpaceError("t must lie in (0, min(p, q))")
        Q = self.Q
        if self.mode == "average":
            if Q is None:
                Q = regularity(space, kappa=False).q_doubling[0]
            if not (p > Q / (Q + s) and q > Q / (Q + s)):
                raise SpaceError("average mode needs p, q > Q/(Q+s)")
        return replace(self, alpha=alpha, epsilon=eps, delta=delta, t=t, Q=Q)


@dataclass
class ExtensionResult:
    u_ext: np.ndarray
    Fu: np.ndarray
    cutoff: np.ndarray
    V: np.ndarray
    omega: np.ndarray
    config: ExtensionConfig
    regmetric: object = None
    cover: object = None
    partition: object = None
    anchors: np.ndarray = None
    stars: tuple = ()
    c: float = 1.0
    k0: int = None
    grad_ext: GradientSequence = None
    validity_scale: float = None
    norm_ratio: float = None
    report: dict = field(default_factory=dict)


def _mask(n, omega):
    m = np.zeros(n, dtype=bool)
    m[np.asarray(list(omega), dtype=int)] = True
    return m


def _full_u(n, mask, u):
    u = np.asarray(u, dtype=float)
    if u.shape == (n,):
        return np.where(mask, u, 0.0)
    if u.shape == (int(mask.sum()),):
        out = np.zeros(n)
        out[mask] = u
        return out
    raise SpaceError("u must be given on omega or on the whole space")


def cutoff_function(R, mask, c, alpha):
    """Hoelder cutoff equal to 1 within distance c of Omega and 0 beyond 2c."""
    d = R[:, mask].min(axis=1)
    T1, T2 = c ** alpha, (2 * c) ** alpha
    return np.clip((T2 - d ** alpha) / (T2 - T1), 0.0, 1.0), d


def extend(space, omega, u, config):
    cfg = config.resolve(space)
    n = space.n
    mask = _mask(n, omega)
    if not mask.any():
        raise SpaceError("omega must be nonempty")
    uf = _full_u(n, mask, u)
    if mask.all():
        return ExtensionResult(u_ext=uf.copy(), Fu=uf.copy(), cutoff=np.ones(n), V=np.ones(n, bool),
                               omega=mask, config=cfg)
    reg = regularize(space, cfg.alpha)
    R = np.asarray(reg.matrix)
    c = compute_constants(space.with_dist(R)).c_rho
    theta = 2 * c * c if cfg.theta is None else cfg.theta
    cover = whitney_cover(space, reg, np.flatnonzero(~mask), theta)
    pou = partition_of_unity(space, reg, cover, cfg.alpha, cfg.theta_prime)
    om = np.flatnonzero(mask)
    anchors, stars = [], []
    for x, r in zip(cover.centers, cover.radii):
        star = int(om[np.argmin(R[x, om])])
        members = om[R[star, om] < r]
        if cfg.mode == "median":
            a = median(space, uf, members)
        else:
            a = float(np.sum(space.weight[members] * uf[members]) / space.weight[members].sum())
        anchors.append(a)
        stars.append(star)
    anchors = np.array(anchors)
    Fu = np.where(mask, uf, anchors @ pou.psi)
    Fu[mask] = uf[mask]
    Psi, dist_omega = cutoff_function(R, mask, c, cfg.alpha)
    V = dist_omega < 2 * c
    u_ext = Psi * Fu
    u_ext[mask] = uf[mask]
    big = 16 * c ** 4 * cover.Lambda ** 2
    k0 = math.frexp(big)[1] if cfg.k0 is None else int(cfg.k0)
    res = ExtensionResult(u_ext=u_ext, Fu=Fu, cutoff=Psi, V=V, omega=mask, config=cfg, regmetric=reg,
                          cover=cover, partition=pou, anchors=anchors, stars=tuple(stars), c=c, k0=k0)
    if space.diameter() > 4 * c:
        res.report["warning"] = "diameter exceeds 4c; normalize the space"
    return res


def extension_gradient(space, omega, u, grad_in, config, ext=None):
    """Explicit fractional gradient of the extension on the active levels of rho_#.

    Levels k >= k0 use the maximal function of sup_j 2**(-|k-j| delta t) g_j**t
    (g extended by zero off Omega), raised to 1/t; lower levels use
    2**((k+1)s) |Fu|.
    """
    if ext is None:
        ext = extend(space, omega, u, config)
    cfg = ext.config
    n = space.n
    mask = ext.omega
    R = np.asarray(ext.regmetric.matrix) if ext.regmetric is not None else space.dist
    g = _lift(grad_in, mask, n)
    levels = active_levels(space, R)
    t, dt = cfg.t, cfg.delta * cfg.t
    out = np.zeros((len(levels), n))
    for i, k in enumerate(levels):
        if k >= ext.k0:
            if g.levels:
                j = np.array(g.levels)
                F = (2.0 ** (-np.abs(k - j) * dt)[:, None] * g.values ** t).max(axis=0)
            else:
                F = np.zeros(n)
            out[i] = maximal_function(space, R, F) ** (1.0 / t)
        else:
            out[i] = 2.0 ** ((k + 1) * cfg.s) * np.abs(ext.Fu)
    return GradientSequence(tuple(levels), out)


def _lift(grad, mask, n):
    if grad.n == n:
        vals = np.where(mask[None, :], grad.values, 0.0)
        return GradientSequence(grad.levels, vals)
    vals = np.zeros((len(grad.levels), n))
    vals[:, mask] = grad.values
    return GradientSequence(grad.levels, vals)


def validity_scale(space, ext, grad_ext):
    """Smallest c making c * h a fractional gradient of Fu on V (w.r.t. rho_#)."""
    V = np.flatnonzero(ext.V)
    if V.size < 2:
        return 0.0
    R = np.asarray(ext.regmetric.matrix)
    sub = space.restrict(V).with_dist(R[np.ix_(V, V)])
    chk = check_gradient(sub, ext.Fu[V], ext.config.s, grad_ext.restricted(V))
    return chk.worst_ratio


def verify_extension(space, omega, u, config, norm_limit=None):
    """Run the extension and measure everything the theory says should be bounded.

    ``norm_limit`` skips the end-to-end minimal norm on X when the space has more points.
    """
    ext = extend(space, omega, u, config)
    cfg = ext.config
    mask = ext.omega
    om = np.flatnonzero(mask)
    uf = _full_u(space.n, mask, u)
    w = space.weight
    rep = {"restriction_exact": bool(np.array_equal(ext.u_ext[mask], uf[mask]))}
    if mask.all():
        ext.validity_scale, ext.norm_ratio = 0.0, 1.0
        rep.update(validity_scale=0.0, norm_ratio=1.0)
        ext.report.update(rep)
        return ext
    R = np.asarray(ext.regmetric.matrix)
    sub = space.restrict(om)
    Rsub = R[np.ix_(om, om)]
    g_res = minimal_norm(sub, uf[om], cfg.s, cfg.p, cfg.q, cfg.flavor, dist=Rsub)
    grad = extension_gradient(space, omega, u, g_res.witness, cfg, ext)
    ext.grad_ext = grad
    ext.validity_scale = validity_scale(space, ext, grad)
    V = ext.V
    up = lp_norm(uf[om], w[om], cfg.p)
    rep["lp_ratio_V"] = _ratio(lp_norm(ext.Fu[V], w[V], cfg.p), up)
    gV = GradientSequence(grad.levels, grad.values[:, V])
    for flavor, key in (("M", "gradient_ratio_M"), ("N", "gradient_ratio_N")):
        top = sequence_norm(gV, w[V], cfg.p, cfg.q, flavor)
        bottom = sequence_norm(g_res.witness, w[om], cfg.p, cfg.q, flavor) + up
        rep[key] = _ratio(top, bottom)
    rep["validity_scale"] = ext.validity_scale
    if norm_limit is None or space.n <= norm_limit:
        top = minimal_norm(space, ext.u_ext, cfg.s, cfg.p, cfg.q, cfg.flavor)
        bot = minimal_norm(sub, uf[om], cfg.s, cfg.p, cfg.q, cfg.flavor)
        lp_top = lp_norm(ext.u_ext, w, cfg.p)
        ext.norm_ratio = _ratio(lp_top + top.value, up + bot.value)
        rep["norm_ratio"] = ext.norm_ratio
        rep["seminorm_ratio"] = _ratio(top.value, bot.value)
        rep["seminorm_zero_over_zero"] = bool(top.value == 0 and bot.value == 0)
        rep["norm_status"] = (top.status, bot.status)
    rep["k0"] = ext.k0
    rep["Lambda"] = ext.cover.Lambda
    rep["overlap"] = ext.cover.overlap
    rep["c_star"] = ext.partition.c_star
    ext.report.update(rep)
    return ext


def _ratio(a, b):
    if b == 0:
        return 0.0 if a == 0 else INF
    return float(a / b)


def multiplier_gradient(space, f, grad_f, Psi, s, alpha, V, dist=None):
    """Fractional gradient of Psi * f built from a gradient of f and the Hoelder data of Psi.

    With k_Psi defined by 2**(k_Psi - 1) <= |Psi|_alpha**(1/alpha) < 2**k_Psi,
    levels k >= k_Psi get (|f| 2**(-k(alpha-s)) |Psi|_alpha + h_k |Psi|_inf) 1_V
    and lower levels get (2**(ks+s+1) |f| + h_k) |Psi|_inf 1_V.  A constant Psi
    gives |Psi|_inf * h.
    """
    d = space.dist if dist is None else dist
    f = np.asarray(f, dtype=float)
    Psi = np.asarray(Psi, dtype=float)
    Vm = np.asarray(V, dtype=bool)
    sup = float(np.abs(Psi).max())
    semi = holder_seminorm(Psi, d, alpha)
    levels = sorted(set(active_levels(space, d)) | set(grad_f.levels))
    out = np.zeros((len(levels), space.n))
    if semi == 0:
        for i, k in enumerate(levels):
            out[i] = sup * grad_f.level(k)
        return GradientSequence(tuple(levels), out)
    k_psi = math.frexp(semi ** (1.0 / alpha))[1]
    for i, k in enumerate(levels):
        h = grad_f.level(k)
        if k >= k_psi:
            out[i] = (np.abs(f) * 2.0 ** (-k * (alpha - s)) * semi + h * sup) * Vm
        else:
            out[i] = (2.0 ** (k * s + s + 1) * np.abs(f) + h) * sup * Vm
    return GradientSequence(tuple(levels), out)


def multiplier_level(semi, alpha):
    return math.frexp(semi ** (1.0 / alpha))[1]


def fracgrad_poincare_ratio(space, omega, u, grad, x, L, s, eps, eps_prime, t, Q, k0=None):
    """LHS / RHS of the domain Poincare inequality at the ball B(x, 2**-L) (constant C = 1).

    LHS: inf_gamma (avg over B & Omega of |u - gamma|**t*)**(1/t*), t* = Qt/(Q - eps' t).
    RHS: 2**(-L eps) (avg over B(x, C 2**-L) of sup_{j >= L-k0} 2**(-j(s-eps)t) g_j**t)**(1/t).
    """
    n = space.n
    mask = _mask(n, omega)
    const = compute_constants(space)
    if k0 is None:
        k0 = max(0, math.ceil(math.log2(const.c_rho ** 2 * const.c_tilde)))
    uf = _full_u(n, mask, u)
    g = _lift(grad, mask, n)
    r = 2.0 ** (-L)
    inner = mask & (space.dist[x] < r)
    tstar = Q * t / (Q - eps_prime * t)
    lhs, _ = inf_deviation(uf[inner], space.weight[inner], tstar)
    outer = space.dist[x] < const.c_rho * r
    F = np.zeros(n)
    for k in g.levels:
        if k >= L - k0:
            F = np.maximum(F, 2.0 ** (-k * (s - eps) * t) * g.level(k) ** t)
    avg = float(np.sum(space.weight[outer] * F[outer]) / space.weight[outer].sum())
    rhs = 2.0 ** (-L * eps) * avg ** (1.0 / t)
    return _ratio(lhs, rhs)


def median_scale_ratio(space, omega, u, grad, x, L, center, radius, s, eps, t, k0=None):
    """LHS / RHS of the median comparison between a sub-ball B and B(x, 2**-L), both met with Omega."""
    n = space.n
    mask = _mask(n, omega)
    const = compute_constants(space)
    if k0 is None:
        k0 = max(0, math.ceil(math.log2(const.c_rho ** 2 * const.c_tilde)))
    uf = _full_u(n, mask, u)
    g = _lift(grad, mask, n)
    r = 2.0 ** (-L)
    big = mask & (space.dist[x] < r)
    small = mask & (space.dist[center] < radius)
    if np.any(small & ~big):
        raise SpaceError("sub-ball must lie inside B(x, 2**-L)")
    lhs = abs(median_values(uf[small], space.weight[small]) - median_values(uf[big], space.weight[big]))
    outer = space.dist[x] < const.c_rho * r
    F = np.zeros(n)
    for k in g.levels:
        if k >= L - k0:
            F = np.maximum(F, 2.0 ** (-k * (s - eps) * t) * g.level(k) ** t)
    avg = float(np.sum(space.weight[outer] * F[outer]) / space.weight[outer].sum())
    return _ratio(lhs, 2.0 ** (-L * eps) * avg ** (1.0 / t))


def level_pairs(dist):
    return level_matrix(dist)
