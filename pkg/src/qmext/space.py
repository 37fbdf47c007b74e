"""Finite quasi-metric measure spaces: validation, constants, balls."""

from dataclasses import dataclass, field

import numpy as np


class SpaceError(ValueError):
    pass


@dataclass(frozen=True)
class QuasiMetricSpace:
    """Finite point set with a (possibly asymmetric) distance matrix and point masses.

    ``dist[i, j]`` is the distance from point ``i`` to point ``j``; balls are
    centred at the first argument.  ``weight[i]`` is the mass of point ``i``.
    """

    dist: np.ndarray
    weight: np.ndarray
    labels: tuple = field(default=())

    def __post_init__(self):
        d = np.array(self.dist, dtype=float)
        w = np.array(self.weight, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise SpaceError("dist must be a square matrix")
        n = d.shape[0]
        if n < 2:
            raise SpaceError("a space needs at least two points")
        if w.shape != (n,):
            raise SpaceError("weight length does not match dist")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise SpaceError("distances must be finite and nonnegative")
        if np.any(np.diag(d) != 0):
            raise SpaceError("dist[i][i] must be 0")
        off = ~np.eye(n, dtype=bool)
        if np.any(d[off] == 0):
            raise SpaceError("distinct points must have positive distance")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise SpaceError("weights must be strictly positive")
        labels = tuple(self.labels) if len(self.labels) else tuple(range(n))
        if len(labels) != n:
            raise SpaceError("labels length does not match dist")
        d.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return self.dist.shape[0]

    def mass(self, members):
        return float(self.weight[np.asarray(members, dtype=int)].sum()) if len(members) else 0.0

    def restrict(self, indices):
        """Subspace on the given point indices (order preserved)."""
        idx = np.asarray(sorted(set(int(i) for i in indices)), dtype=int)
        return QuasiMetricSpace(self.dist[np.ix_(idx, idx)], self.weight[idx],
                                tuple(self.labels[i] for i in idx))

    def with_dist(self, matrix):
        """Same points and masses, different distance matrix."""
        return QuasiMetricSpace(matrix, self.weight, self.labels)

    def symmetrized(self):
        return np.maximum(self.dist, self.dist.T)

    def diameter(self):
        return float(self.dist.max())


@dataclass(frozen=True)
class QuasiMetricConstants:
    c_rho: float
    c_tilde: float


@dataclass(frozen=True)
class Ball:
    center: int
    radius: float
    members: frozenset
    mass: float


def compute_constants(space):
    """Exact quasi-triangle constant and asymmetry constant.

    ``c_rho`` is the largest ratio rho(x,y) / max(rho(x,z), rho(z,y)) over
    triples that are not all equal; ``c_tilde`` is the largest rho(y,x)/rho(x,y).
    The triple scan is vectorised over (x, y) for each intermediate z.
    """
    d = space.dist
    n = space.n
    c = 1.0
    for z in range(n):
        # denominator vanishes only when x = z = y
        den = np.maximum(d[:, z][:, None], d[z, :][None, :])
        den[z, z] = np.inf
        c = max(c, float((d / den).max()))
    off = ~np.eye(n, dtype=bool)
    c_tilde = max(1.0, float((d.T[off] / d[off]).max()))
    return QuasiMetricConstants(c_rho=c, c_tilde=c_tilde)


def ball(space, center, radius, dist=None):
    if not radius > 0:
        raise SpaceError("radius must be positive")
    row = (space.dist if dist is None else dist)[center]
    members = np.flatnonzero(row < radius)
    return Ball(int(center), float(radius), frozenset(int(i) for i in members),
                float(space.weight[members].sum()))


def ball_mask(dist, center, radius):
    return dist[center] < radius


def critical_radii(space, center, r_max, dist=None):
    """Right endpoints of the intervals of (0, r_max] on which B(center, r) is constant."""
    if not r_max > 0:
        raise SpaceError("r_max must be positive")
    row = (space.dist if dist is None else dist)[center]
    vals = np.unique(row[(row > 0) & (row < r_max)])
    return [float(v) for v in vals] + [float(r_max)]


def distance_to_set(dist, mask):
    """Row-wise minimum distance from every point to the points where ``mask`` holds."""
    if not mask.any():
        return np.full(dist.shape[0], np.inf)
    return dist[:, mask].min(axis=1)
