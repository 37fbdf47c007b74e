"""Brute-force reference for the minimal fractional-gradient norm on tiny spaces.

Shares no code with the solver.  For every level the constraint graph gets
a minimum vertex cover (by enumeration); values on the cover are searched,
the remaining vertices take the smallest feasible value.  The non-cover
vertices form an independent set and the objective is monotone in each
coordinate, so this completion is optimal for fixed cover values.

The search is a branch and bound over the box [0, largest incident
constraint] of the cover values.  Inside a box [lo, hi] cover entries are at
least lo and completions at least the completion of hi, and the objective is
monotone in every entry, so evaluating it there bounds the box from below;
a box whose upper corner is infeasible holds no feasible point because the
constraints only get easier as values grow.  Boxes are split along their
widest side until every remaining lower bound is within ``resolution``
(relative) of the best value found, or until the box budget runs out, in
which case the bracket is returned uncertified.  Monotonicity is all that is used, so
the bound is rigorous for every p, q > 0.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

MAX_POINTS = 5
MAX_LEVELS = 2


class OracleError(ValueError):
    pass


def _level(d):
    k = math.floor(-math.log2(d))
    while d >= 2.0 ** (-k):
        k -= 1
    while d < 2.0 ** (-k - 1):
        k += 1
    return k


def _constraints(dist, u, s):
    n = len(u)
    cons = {}
    levels = set()
    for x in range(n):
        for y in range(n):
            if x == y:
                continue
            k = _level(dist[x][y])
            levels.add(k)
            diff = abs(u[x] - u[y])
            if diff == 0:
                continue
            key = (min(x, y), max(x, y))
            b = diff / dist[x][y] ** s
            cons.setdefault(k, {})
            cons[k][key] = max(cons[k].get(key, 0.0), b)
    return cons, sorted(levels)


def _min_cover(edges, n):
    for size in range(n + 1):
        for C in itertools.combinations(range(n), size):
            if all(a in C or b in C for a, b in edges):
                return list(C)
    raise AssertionError("unreachable")


def _norm(G, w, p, q, flavor):
    """G has shape (m, L, n)."""
    if flavor == "M":
        inner = G.max(axis=1) if q == math.inf else (G ** q).sum(axis=1) ** (1 / q)
        return inner.max(axis=1) if p == math.inf else ((inner ** p) @ w) ** (1 / p)
    per = G.max(axis=2) if p == math.inf else ((G ** p) @ w) ** (1 / p)
    return per.max(axis=1) if q == math.inf else (per ** q).sum(axis=1) ** (1 / q)


@dataclass(frozen=True)
class OracleBounds:
    lower: float
    upper: float
    certified: bool
    boxes: int


def oracle_min_gradient(space, u, s, p, q, flavor="M", resolution=1e-4, max_boxes=2_000_000):
    """Best feasible value found; see ``oracle_bounds`` for the certified bracket."""
    return oracle_bounds(space, u, s, p, q, flavor, resolution, max_boxes).upper


def oracle_bounds(space, u, s, p, q, flavor="M", resolution=1e-4, max_boxes=2_000_000):
    """Bracket [lower, upper] on the minimal norm; ``certified`` when the gap is within ``resolution``."""
    dist = np.asarray(space.dist, dtype=float).tolist()
    w = np.asarray(space.weight, dtype=float)
    u = [float(v) for v in u]
    n = len(u)
    if n > MAX_POINTS:
        raise OracleError(f"oracle limited to {MAX_POINTS} points")
    cons, levels = _constraints(dist, u, s)
    if len(levels) > MAX_LEVELS:
        raise OracleError(f"oracle limited to {MAX_LEVELS} active levels")
    if not cons:
        return OracleBounds(0.0, 0.0, True, 0)
    lv = sorted(cons)
    if flavor == "N" or p == q:
        # the norm is an l^q combination of per-level norms and the constraints never mix levels
        parts = [_search({k: cons[k]}, [k], n, w, p, p, "M", resolution, max_boxes) for k in lv]
        lo = np.array([b.lower for b in parts])
        up = np.array([b.upper for b in parts])
        return OracleBounds(_lq(lo, q), _lq(up, q), all(b.certified for b in parts),
                            sum(b.boxes for b in parts))
    return _search(cons, lv, n, w, p, q, flavor, resolution, max_boxes)


def _lq(v, q):
    return float(v.max()) if q == math.inf else float((v ** q).sum() ** (1.0 / q))


def _search(cons, lv, n, w, p, q, flavor, resolution, max_boxes):
    covers = {k: _min_cover(list(cons[k]), n) for k in lv}
    free = [(i, k, x) for i, k in enumerate(lv) for x in covers[k]]
    box = np.array([max([b for e, b in cons[k].items() if x in e], default=0.0) for _, k, x in free])

    def evaluate(V, S=None):
        """Objective with cover values V and completion from S (default V); inf where S is infeasible.

        With V = lo and S = hi of a box this is a lower bound on the box, since
        cover entries only grow and completions only shrink inside it.
        """
        S = V if S is None else S
        m = V.shape[0]
        G = np.zeros((m, len(lv), n))
        H = np.zeros((m, len(lv), n))
        for j, (i, k, x) in enumerate(free):
            G[:, i, x] = V[:, j]
            H[:, i, x] = S[:, j]
        ok = np.ones(m, dtype=bool)
        for i, k in enumerate(lv):
            C = set(covers[k])
            for (a, b), val in cons[k].items():
                if a in C and b in C:
                    ok &= H[:, i, a] + H[:, i, b] >= val * (1 - 1e-12)
            for y in range(n):
                if y in C:
                    continue
                need = np.zeros(m)
                for (a, b), val in cons[k].items():
                    if y in (a, b):
                        other = b if a == y else a
                        need = np.maximum(need, val - H[:, i, other])
                G[:, i, y] = need
        out = _norm(G, w, p, q, flavor)
        return np.where(ok, out, np.inf)

    return _branch_and_bound(evaluate, np.zeros_like(box), box, resolution, max_boxes)


def _branch_and_bound(f, lo, hi, resolution, max_boxes, batch=8192):
    """Best-first: each round splits the ``batch`` open boxes with the smallest lower bounds."""
    lo, hi = lo[None, :], hi[None, :]
    best = float(f(hi).min())
    lower = f(lo, hi)
    evaluated = 1
    while True:
        open_ = lower < best * (1 - resolution)
        lo, hi, lower = lo[open_], hi[open_], lower[open_]
        if lo.shape[0] == 0:
            # every discarded box had a lower bound of at least best * (1 - resolution)
            return OracleBounds(best * (1 - resolution), best, True, evaluated)
        if evaluated > max_boxes:
            return OracleBounds(float(lower.min()), best, False, evaluated)
        order = np.argsort(lower, kind="stable")
        pick, rest = order[:batch], order[batch:]
        slo, shi = lo[pick], hi[pick]
        axis = np.argmax(shi - slo, axis=1)
        rows = np.arange(slo.shape[0])
        mid = 0.5 * (slo[rows, axis] + shi[rows, axis])
        lo2, hi1 = slo.copy(), shi.copy()
        lo2[rows, axis] = mid
        hi1[rows, axis] = mid
        nlo, nhi = np.concatenate([slo, lo2]), np.concatenate([hi1, shi])
        evaluated += nlo.shape[0]
        best = min(best, float(f(nhi).min()), float(f(0.5 * (nlo + nhi)).min()))
        nlower = f(nlo, nhi)
        lo, hi = np.concatenate([lo[rest], nlo]), np.concatenate([hi[rest], nhi])
        lower = np.concatenate([lower[rest], nlower])
