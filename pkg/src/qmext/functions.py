"""Fractional gradients, their sequence norms, and the minimal-norm solver.

A fractional s-gradient of u is a family of nonnegative vectors g_k, one per
dyadic level k, with |u(x) - u(y)| <= rho(x,y)**s * (g_k(x) + g_k(y)) whenever
2**(-k-1) <= rho(x,y) < 2**(-k).  On a finite space only finitely many levels
carry pairs, so the minimal norm is a finite-dimensional optimization problem.
"""

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

INF = math.inf


class NormError(ValueError):
    pass


def level_of(r):
    """The integer k with 2**(-k-1) <= r < 2**(-k), computed exactly from the binary exponent."""
    _, e = math.frexp(r)
    return -e


def level_matrix(dist):
    """Dyadic level of every pair; the diagonal is filled with a sentinel."""
    _, e = np.frexp(dist)
    lev = -e.astype(np.int64)
    np.fill_diagonal(lev, np.iinfo(np.int64).min)
    return lev


def active_levels(space, dist=None):
    d = space.dist if dist is None else dist
    off = ~np.eye(d.shape[0], dtype=bool)
    return sorted(int(k) for k in np.unique(level_matrix(d)[off]))


@dataclass(frozen=True)
class GradientSequence:
    """Per-level nonnegative vectors; absent levels are identically zero."""

    levels: tuple
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(len(self.levels), -1)
        if len(self.levels) and np.any(v < 0):
            raise NormError("gradient values must be nonnegative")
        lv = tuple(int(k) for k in self.levels)
        if list(lv) != sorted(set(lv)):
            raise NormError("levels must be strictly increasing")
        v.setflags(write=False)
        object.__setattr__(self, "levels", lv)
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, levels, n):
        return cls(tuple(levels), np.zeros((len(levels), n)))

    @classmethod
    def from_dict(cls, table, n):
        levels = sorted(table)
        return cls(tuple(levels), np.array([np.asarray(table[k], float) for k in levels]).reshape(len(levels), n))

    @property
    def n(self):
        return self.values.shape[1]

    def level(self, k):
        try:
            return self.values[self.levels.index(k)]
        except ValueError:
            return np.zeros(self.n)

    def scaled(self, c):
        return GradientSequence(self.levels, self.values * c)

    def restricted(self, idx):
        return GradientSequence(self.levels, self.values[:, np.asarray(idx, dtype=int)])

    def as_dict(self):
        return {k: self.values[i] for i, k in enumerate(self.levels)}


@dataclass(frozen=True)
class GradientCheck:
    ok: bool
    worst_ratio: float
    worst_pair: tuple


def check_gradient(space, u, s, grad, dist=None, rtol=1e-12):
    """Validate the pairwise gradient inequality on every ordered pair.

    ``worst_ratio`` is max |u(x)-u(y)| / (rho**s (g_k(x)+g_k(y))); the check
    passes when it is at most 1 + rtol (the slack absorbs one rounding of
    rho**s).  A positive difference against a zero denominator gives ratio inf.
    """
    if not s > 0:
        raise NormError("s must be positive")
    d = space.dist if dist is None else dist
    u = np.asarray(u, dtype=float)
    lev = level_matrix(d)
    n = d.shape[0]
    diff = np.abs(u[:, None] - u[None, :])
    gsum = np.zeros((n, n))
    for i, k in enumerate(grad.levels):
        sel = lev == k
        if sel.any():
            g = grad.values[i]
            gsum[sel] = (g[:, None] + g[None, :])[sel]
    d_pow = d ** s
    np.fill_diagonal(d_pow, 1.0)
    den = d_pow * gsum
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(diff > 0, diff / den, 0.0)
    np.fill_diagonal(ratio, 0.0)
    flat = int(np.argmax(ratio))
    worst = float(ratio.flat[flat])
    return GradientCheck(ok=worst <= 1 + rtol, worst_ratio=worst, worst_pair=divmod(flat, n))


def lp_norm(f, weight, p):
    f = np.abs(np.asarray(f, dtype=float))
    if p == INF:
        return float(f.max()) if f.size else 0.0
    return float(np.sum(weight * f ** p) ** (1.0 / p))


def _lq(a, q, axis):
    if q == INF:
        return a.max(axis=axis)
    return np.sum(a ** q, axis=axis) ** (1.0 / q)


def sequence_norm(grad, weight, p, q, flavor="M"):
    """L^p(l^q) norm (flavor M) or l^q(L^p) norm (flavor N) of a gradient sequence."""
    g = grad.values if isinstance(grad, GradientSequence) else np.asarray(grad, dtype=float)
    if g.size == 0:
        return 0.0
    w = np.asarray(weight, dtype=float)
    if flavor == "M":
        inner = _lq(g, q, axis=0)
        return lp_norm(inner, w, p)
    if flavor == "N":
        if p == INF:
            inner = g.max(axis=1)
        else:
            inner = np.sum(w[None, :] * g ** p, axis=1) ** (1.0 / p)
        return float(_lq(inner, q, axis=0))
    raise NormError("flavor must be 'M' or 'N'")


@dataclass(frozen=True)
class NormResult:
    value: float
    witness: GradientSequence
    status: str
    solver_tolerance: float
    lower_bound: float = 0.0
    info: dict = field(default_factory=dict)


@dataclass
class _Problem:
    """Pair constraints g_k(i) + g_k(j) >= b restricted to pairs with b > 0."""

    n: int
    levels: list
    lvl: np.ndarray
    i: np.ndarray
    j: np.ndarray
    b: np.ndarray

    @classmethod
    def build(cls, dist, u, s):
        n = dist.shape[0]
        u = np.asarray(u, dtype=float)
        lev = level_matrix(dist)
        levels = sorted(int(k) for k in np.unique(lev[~np.eye(n, dtype=bool)]))
        ii, jj = np.nonzero(~np.eye(n, dtype=bool))
        diff = np.abs(u[ii] - u[jj])
        keep = diff > 0
        ii, jj = ii[keep], jj[keep]
        b = diff[keep] / dist[ii, jj] ** s
        kk = np.searchsorted(levels, lev[ii, jj])
        # (level, i, j) and (level, j, i) are the same constraint; keep the larger bound
        lo, hi = np.minimum(ii, jj), np.maximum(ii, jj)
        key = (kk * n + lo) * n + hi
        order = np.lexsort((-b, key))
        key, first = np.unique(key[order], return_index=True)
        sel = order[first]
        return cls(n, levels, kk[sel], lo[sel], hi[sel], b[sel])

    @property
    def empty(self):
        return self.b.size == 0

    def scale(self):
        return float(self.b.max()) if self.b.size else 0.0

    def variables(self):
        """Flat indices level * n + point of the entries that carry constraints."""
        return np.unique(np.concatenate([self.lvl * self.n + self.i, self.lvl * self.n + self.j]))

    def repair(self, G):
        """Scale a nearly feasible level-by-point matrix up to exact feasibility."""
        G = np.maximum(G, 0.0)
        tot = G[self.lvl, self.i] + G[self.lvl, self.j]
        dead = tot <= 0
        if dead.any():
            G[self.lvl[dead], self.i[dead]] = np.maximum(G[self.lvl[dead], self.i[dead]], self.b[dead] / 2)
            G[self.lvl[dead], self.j[dead]] = np.maximum(G[self.lvl[dead], self.j[dead]], self.b[dead] / 2)
            tot = G[self.lvl, self.i] + G[self.lvl, self.j]
        factor = float((self.b / tot).max())
        if factor > 1:
            G = G * (factor * (1 + 4e-16))
        return G

    def worst(self, G):
        return float((self.b / (G[self.lvl, self.i] + G[self.lvl, self.j])).max())


def _objective(G, w, p, q, flavor):
    return sequence_norm(G, w, p, q, flavor)


def _solve_lp(prob, w, p, q, flavor, b):
    L, n = len(prob.levels), prob.n
    var = prob.variables()
    m = var.size
    pos = {int(v): t for t, v in enumerate(var)}
    vk, vx = var // n, var % n
    rows = np.arange(prob.b.size)
    ci = np.array([pos[int(v)] for v in prob.lvl * n + prob.i])
    cj = np.array([pos[int(v)] for v in prob.lvl * n + prob.j])
    pair = sp.csr_matrix((np.full(2 * rows.size, -1.0), (np.concatenate([rows, rows]), np.concatenate([ci, cj]))),
                         shape=(rows.size, m))
    # inner groups: points (flavor M, over levels) or levels (flavor N, over points)
    if flavor == "M":
        group, n_groups = vx, n
        inner_w, inner_max = np.ones(m), q == INF
        outer_w, outer_max = w, p == INF
    else:
        group, n_groups = vk, L
        inner_w, inner_max = w[vx], p == INF
        outer_w, outer_max = np.ones(L), q == INF
    used = np.unique(group)
    gi = {int(g): t for t, g in enumerate(used)}
    ng = used.size
    blocks_ub, rhs = [sp.hstack([pair, sp.csr_matrix((rows.size, ng + 1))])], [-b]
    cost = np.zeros(m + ng + 1)
    gcol = np.array([gi[int(g)] for g in group])
    if inner_max:
        # t_g >= v for every member v
        blocks_ub.append(sp.hstack([sp.identity(m), -sp.csr_matrix((np.ones(m), (np.arange(m), gcol)), shape=(m, ng)),
                                    sp.csr_matrix((m, 1))]))
        rhs.append(np.zeros(m))
    else:
        # t_g >= sum of weighted members
        blocks_ub.append(sp.hstack([sp.csr_matrix((inner_w, (gcol, np.arange(m))), shape=(ng, m)),
                                    -sp.identity(ng), sp.csr_matrix((ng, 1))]))
        rhs.append(np.zeros(ng))
    if outer_max:
        blocks_ub.append(sp.hstack([sp.csr_matrix((ng, m)), sp.identity(ng), -np.ones((ng, 1))]))
        rhs.append(np.zeros(ng))
        cost[-1] = 1.0
    else:
        cost[m:m + ng] = outer_w[used]
    A = sp.vstack(blocks_ub).tocsr()
    res = linprog(cost, A_ub=A, b_ub=np.concatenate(rhs), bounds=(0, None), method="highs-ds")
    if res.status != 0:
        return None, res.message
    G = np.zeros((L, n))
    G[vk, vx] = res.x[:m]
    return G, "ok"


def _group_norms(cp, y, group, n_groups, r, cons):
    """Variables t with t_g >= ||y restricted to group g||_r, via power cones."""
    m = group.size
    t = cp.Variable(n_groups, nonneg=True)
    onto = sp.csr_matrix((np.ones(m), (group, np.arange(m))), shape=(n_groups, m))
    if r == 1:
        cons.append(t >= onto @ y)
    elif r == INF:
        cons.append(t[group] >= y)
    else:
        z = cp.Variable(m, nonneg=True)
        cons.append(cp.PowCone3D(z, t[group], y, 1.0 / r))
        cons.append(onto @ z <= t)
    return t


def _solve_convex(prob, w, p, q, flavor, b):
    import cvxpy as cp

    L, n = len(prob.levels), prob.n
    var = prob.variables()
    m = var.size
    pos = np.full(L * n, -1)
    pos[var] = np.arange(m)
    v = cp.Variable(m, nonneg=True)
    rows = np.arange(prob.b.size)
    A = sp.csr_matrix((np.ones(2 * rows.size),
                       (np.concatenate([rows, rows]),
                        np.concatenate([pos[prob.lvl * n + prob.i], pos[prob.lvl * n + prob.j]]))),
                      shape=(rows.size, m))
    vk, vx = var // n, var % n
    cons = [A @ v >= b]

    def outer(t, r, weights):
        if r == INF:
            return cp.max(t)
        return cp.pnorm(cp.multiply(weights ** (1.0 / r), t), r)

    if p == q:
        # both flavors reduce to one weighted p-norm of the flat vector
        obj = outer(v, p, w[vx])
    elif flavor == "M":
        t = _group_norms(cp, v, vx, n, q, cons)
        obj = outer(t, p, w)
    else:
        y = v if p == INF else cp.multiply(w[vx] ** (1.0 / p), v)
        t = _group_norms(cp, y, vk, L, p, cons)
        obj = outer(t, q, np.ones(L))
    problem = cp.Problem(cp.Minimize(obj), cons)
    try:
        with warnings.catch_warnings():
            # an inaccurate solve is reported through the status string
            warnings.simplefilter("ignore", UserWarning)
            problem.solve(solver=cp.CLARABEL, tol_gap_abs=1e-9, tol_gap_rel=1e-9, tol_feas=1e-9, max_iter=500)
    except cp.error.SolverError as exc:
        return None, str(exc)
    if v.value is None:
        return None, problem.status
    out = np.zeros(L * n)
    out[var] = v.value
    return out.reshape(L, n), problem.status


def _descend(prob, G, w, p, q, flavor, sweeps=50):
    """Monotone descent on the true (possibly nonconvex) objective from a feasible start."""
    L, n = G.shape
    B = np.zeros((L, n, n))
    B[prob.lvl, prob.i, prob.j] = prob.b
    B[prob.lvl, prob.j, prob.i] = prob.b
    used = [(k, x) for k in range(L) for x in np.flatnonzero(B[k].max(axis=1) > 0)]
    best = _objective(G, w, p, q, flavor)

    def lower(k, x):
        row = B[k, x]
        return max(0.0, float(np.max(np.where(row > 0, row - G[k], 0.0))))

    for _ in range(sweeps):
        improved = False
        for k, x in used:
            lb = lower(k, x)
            if lb < G[k, x]:
                G[k, x] = lb
        cur = _objective(G, w, p, q, flavor)
        if cur < best * (1 - 1e-13):
            best, improved = cur, True
        best = min(best, cur)
        for k, x in used:
            if G[k, x] == 0:
                continue
            old_row = G[k].copy()
            G[k] = np.maximum(G[k], B[k, x])
            G[k, x] = 0.0
            val = _objective(G, w, p, q, flavor)
            if val < best * (1 - 1e-13):
                best, improved = val, True
            else:
                G[k] = old_row
        if not improved:
            break
    return G, best


def _cover(c, ea, eb, b, p):
    """min (sum c_v v_v**p)**(1/p) over v >= 0 with v[ea] + v[eb] >= b.

    p = 1 is an LP (dual simplex); p = inf has the closed form max(b)/2 on every
    constrained variable; 1 < p < inf is a single conic program.
    """
    m = c.size
    if b.size == 0:
        return np.zeros(m), "empty"
    if p == INF:
        v = np.zeros(m)
        v[np.unique(np.concatenate([ea, eb]))] = float(b.max()) / 2
        return v, "closed form"
    rows = np.arange(b.size)
    if p == 1:
        A = sp.csr_matrix((np.full(2 * b.size, -1.0), (np.concatenate([rows, rows]), np.concatenate([ea, eb]))),
                          shape=(b.size, m))
        res = linprog(c, A_ub=A, b_ub=-b, bounds=(0, None), method="highs-ds")
        return (res.x, "ok") if res.status == 0 else (None, res.message)
    import cvxpy as cp

    A = sp.csr_matrix((np.ones(2 * b.size), (np.concatenate([rows, rows]), np.concatenate([ea, eb]))),
                      shape=(b.size, m))
    v = cp.Variable(m, nonneg=True)
    problem = cp.Problem(cp.Minimize(cp.pnorm(cp.multiply(c ** (1.0 / p), v), p)), [A @ v >= b])
    try:
        with warnings.catch_warnings():
            # an inaccurate solve is reported through the status string
            warnings.simplefilter("ignore", UserWarning)
            problem.solve(solver=cp.CLARABEL, tol_gap_abs=1e-9, tol_gap_rel=1e-9, tol_feas=1e-9, max_iter=500)
    except cp.error.SolverError as exc:
        return None, str(exc)
    return (None, problem.status) if v.value is None else (np.asarray(v.value), problem.status)


def _solve_exact(prob, w, p, q, flavor, b):
    """Route a convex instance (p, q >= 1) to the cheapest exact formulation."""
    L, n = len(prob.levels), prob.n
    G = np.zeros((L, n))
    if p == q or (flavor == "N"):
        # levels never share constraints; N and the p = q case split level by level
        if p == q:
            var = prob.variables()
            pos = np.full(L * n, -1)
            pos[var] = np.arange(var.size)
            v, msg = _cover(w[var % n], pos[prob.lvl * n + prob.i], pos[prob.lvl * n + prob.j], b, p)
            if v is None:
                return None, msg
            G.flat[var] = v
            return G, msg
        msgs = []
        for k in range(L):
            sel = prob.lvl == k
            if not sel.any():
                continue
            v, msg = _cover(w, prob.i[sel], prob.j[sel], b[sel], p)
            if v is None:
                return None, msg
            G[k] = v
            msgs.append(msg)
        return G, ",".join(sorted(set(msgs)))
    if q == INF:
        # single gradient: g_k(x) = t_x on every constrained entry
        key = prob.i * n + prob.j
        order = np.lexsort((-b, key))
        key, first = np.unique(key[order], return_index=True)
        sel = order[first]
        t, msg = _cover(w, prob.i[sel], prob.j[sel], b[sel], p)
        if t is None:
            return None, msg
        mask = np.zeros((L, n), dtype=bool)
        mask[prob.lvl, prob.i] = True
        mask[prob.lvl, prob.j] = True
        G[mask] = np.broadcast_to(t, (L, n))[mask]
        return G, msg
    if p in (1.0, INF) and q in (1.0, INF):
        return _solve_lp(prob, w, p, q, flavor, b)
    return _solve_convex(prob, w, p, q, flavor, b)


def minimal_norm(space, u, s, p, q, flavor="M", dist=None):
    """Smallest M (L^p(l^q)) or N (l^q(L^p)) norm over all fractional s-gradients of u.

    p, q >= 1: convex program, solved exactly (LPs by dual simplex, the rest by
    an interior-point conic solver).  When min(p, q) < 1 the convexified
    problem (exponents raised to 1) seeds a monotone descent on the true
    objective; the result is an upper bound and ``lower_bound`` holds a
    certified lower bound from the relaxation.
    """
    if not s > 0 or not p > 0 or not q > 0:
        raise NormError("s, p, q must be positive")
    if flavor not in ("M", "N"):
        raise NormError("flavor must be 'M' or 'N'")
    d = space.dist if dist is None else dist
    w = np.asarray(space.weight, dtype=float)
    prob = _Problem.build(d, u, s)
    L, n = len(prob.levels), prob.n
    if prob.empty:
        return NormResult(0.0, GradientSequence.zeros(prob.levels, n), "exact", 0.0, 0.0)
    # solving the normalized problem makes the result exactly homogeneous in u
    scale = prob.scale()
    b = prob.b / scale
    pc, qc = max(p, 1.0), max(q, 1.0)
    G, msg = _solve_exact(prob, w, pc, qc, flavor, b)
    status = "exact"
    if G is None:
        G = np.zeros((L, n))
        np.maximum.at(G, (prob.lvl, prob.i), b)
        status = "upper_bound"
    G = prob.repair(G * scale)
    value = _objective(G, w, pc, qc, flavor)
    info = {"message": str(msg)}
    lower = value if status == "exact" else 0.0
    if min(p, q) < 1:
        # relaxation optimum is at least value * (1 - tol); the L^p factor covers p < 1
        lower = value * (1 - 1e-6) * (float(w.min()) ** (1.0 / p - 1.0) if p < 1 else 1.0)
        G, value = _descend(prob, G, w, p, q, flavor)
        G = prob.repair(G)
        value = _objective(G, w, p, q, flavor)
        status = "upper_bound"
    return NormResult(float(value), GradientSequence(tuple(prob.levels), G), status, 1e-8, float(lower), info)


def inhomogeneous_norm(space, u, s, p, q, flavor="M", dist=None):
    """||u||_{L^p} + minimal seminorm, with the seminorm result attached."""
    res = minimal_norm(space, u, s, p, q, flavor, dist)
    return lp_norm(u, space.weight, p) + res.value, res


def median(space, u, E):
    """Largest theta with mu({x in E : u(x) < theta}) <= mu(E)/2 (sort-and-scan)."""
    idx = np.asarray(sorted(E), dtype=int)
    if idx.size == 0:
        raise NormError("median of an empty set")
    vals = np.asarray(u, dtype=float)[idx]
    w = space.weight[idx]
    half = 0.5 * float(w.sum())
    order = np.lexsort((idx, vals))
    vals, w = vals[order], w[order]
    cum = np.cumsum(w)
    # last index of each run of equal values gives mu(u <= v)
    last = np.append(vals[1:] != vals[:-1], True)
    hit = np.flatnonzero(last & (cum > half))
    return float(vals[hit[0]])


def median_values(u, w, half=None):
    """Median of a weighted sample (same rule as ``median``)."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    half = 0.5 * float(w.sum()) if half is None else half
    order = np.argsort(u, kind="stable")
    v, cum = u[order], np.cumsum(w[order])
    last = np.append(v[1:] != v[:-1], True)
    return float(v[np.flatnonzero(last & (cum > half))[0]])


@dataclass(frozen=True)
class MedianBound:
    holds: bool
    lhs: float
    rhs: float


def median_bound_check(space, u, members, gamma, eta):
    """Check |m_u(B) - gamma| <= (2 * avg_B |u - gamma|**eta)**(1/eta).

    The comparison is made exactly: in rational arithmetic when eta is a
    positive integer, otherwise with 80-digit arithmetic, on the equivalent
    form |m - gamma|**eta * mu(B) <= 2 * sum w |u - gamma|**eta.
    """
    if not eta > 0:
        raise NormError("eta must be positive")
    idx = np.asarray(sorted(members), dtype=int)
    m = median(space, u, idx)
    uu = np.asarray(u, dtype=float)[idx]
    w = space.weight[idx]
    avg = float(np.sum(w * np.abs(uu - gamma) ** eta) / w.sum())
    lhs = abs(m - gamma)
    rhs = (2 * avg) ** (1.0 / eta)
    if float(eta).is_integer():
        e = int(eta)
        g = Fraction(gamma)
        left = abs(Fraction(m) - g) ** e * sum(Fraction(x) for x in w)
        right = 2 * sum(Fraction(wi) * abs(Fraction(ui) - g) ** e for wi, ui in zip(w, uu))
        holds = left <= right
    else:
        import mpmath

        with mpmath.workdps(80):
            g = mpmath.mpf(gamma)
            e = mpmath.mpf(eta)
            left = abs(mpmath.mpf(m) - g) ** e * mpmath.fsum(mpmath.mpf(x) for x in w)
            right = 2 * mpmath.fsum(mpmath.mpf(wi) * abs(mpmath.mpf(ui) - g) ** e for wi, ui in zip(w, uu))
            holds = bool(left <= right)
    return MedianBound(bool(holds), lhs, rhs)


def rescale_gradient(grad, N, s):
    """h_k = 2**(sN) * sum_{j=-N..N} g_{k+j}; valid for any metric within factor 2**N."""
    if N < 0 or int(N) != N:
        raise NormError("N must be a nonnegative integer")
    N = int(N)
    if not grad.levels:
        return grad
    levels = list(range(grad.levels[0] - N, grad.levels[-1] + N + 1))
    table = grad.as_dict()
    out = np.zeros((len(levels), grad.n))
    for t, k in enumerate(levels):
        for j in range(-N, N + 1):
            if k + j in table:
                out[t] += table[k + j]
    return GradientSequence(tuple(levels), out * 2.0 ** (s * N))


def maximal_function(space, metric, f):
    """Uncentred-in-radius maximal average: sup over r of the mean of |f| on B(x, r).

    Balls change only at distance values, and just above a value a the ball is
    the closed ball of radius a, so the sup is a max over closed balls.
    """
    d = np.asarray(metric, dtype=float)
    w = space.weight
    f = np.abs(np.asarray(f, dtype=float))
    order = np.argsort(d, axis=1, kind="stable")
    srt = np.take_along_axis(d, order, axis=1)
    num = np.cumsum((w * f)[order], axis=1)
    den = np.cumsum(w[order], axis=1)
    last = np.concatenate([srt[:, 1:] != srt[:, :-1], np.ones((d.shape[0], 1), bool)], axis=1)
    avg = np.where(last, num / den, -np.inf)
    return avg.max(axis=1)


def geometric_sum_check(a, b, c, offset=0):
    """Both sides of sum_k (sum_j a**-|j-k| c_j)**b <= C sum_j c_j**b, with exact geometric tails.

    ``c`` lists c_offset, c_{offset+1}, ...; the returned ratio is LHS / sum c_j**b.
    """
    if not a > 1 or not b > 0:
        raise NormError("need a > 1 and b > 0")
    c = np.asarray(c, dtype=float)
    if c.size == 0 or not np.any(c > 0):
        return 0.0, 0.0
    J = c.size
    j = np.arange(J)
    k = np.arange(J)
    inner = (a ** (-np.abs(j[None, :] - k[:, None])) * c[None, :]).sum(axis=1)
    lhs = float(np.sum(inner ** b))
    right_tail = float(np.sum(a ** (-(J - 1 - j)) * c))
    left_tail = float(np.sum(a ** (-j) * c))
    geo = a ** (-b) / (1 - a ** (-b))
    lhs += (right_tail ** b + left_tail ** b) * geo
    return lhs, lhs / float(np.sum(c ** b))


def inf_deviation(u, w, r, tol=1e-12):
    """inf over gamma of (avg |u - gamma|**r)**(1/r) for weights w.

    For r >= 1 the objective is convex in gamma (golden-section search over the
    value range, then compared against the data values); for r < 1 it is
    concave between data values, so the inf is attained at one of them.
    """
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    tot = w.sum()

    def F(g):
        if r == INF:
            return float(np.abs(u - g).max())
        return float((np.sum(w * np.abs(u - g) ** r) / tot) ** (1.0 / r))

    vals = np.unique(u)
    best_g = min(vals, key=F)
    best = F(best_g)
    if r >= 1 and vals.size > 1:
        lo, hi = float(vals[0]), float(vals[-1])
        phi = (math.sqrt(5) - 1) / 2
        x1, x2 = hi - phi * (hi - lo), lo + phi * (hi - lo)
        f1, f2 = F(x1), F(x2)
        while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
            if f1 <= f2:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - phi * (hi - lo)
                f1 = F(x1)
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + phi * (hi - lo)
                f2 = F(x2)
        g = 0.5 * (lo + hi)
        if F(g) < best:
            best_g, best = g, F(g)
    return best, float(best_g)
