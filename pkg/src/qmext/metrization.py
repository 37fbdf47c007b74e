"""Regularized quasi-metric via chain closure, and a lower-bound estimator for the smoothness index."""

import math
from dataclasses import dataclass

import numpy as np

from .space import SpaceError


@dataclass(frozen=True)
class RegularizedMetric:
    alpha: float
    matrix: np.ndarray
    distortion: float

    @property
    def power_distortion(self):
        """Bi-Lipschitz constant between rho_sym**alpha and the metric rho_#**alpha."""
        return self.distortion ** self.alpha


@dataclass(frozen=True)
class IndexEstimate:
    lower_bound: float
    infinite: bool
    alpha_grid: tuple
    distortion_curve: tuple
    budget: float


def chain_closure(w):
    """All-pairs shortest paths on a complete graph with edge weights ``w`` (Floyd-Warshall)."""
    d = np.array(w, dtype=float)
    for k in range(d.shape[0]):
        np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :], out=d)
    return d


def regularize(space, alpha):
    if not alpha > 0:
        raise SpaceError("alpha must be positive")
    sym = space.symmetrized()
    d_alpha = chain_closure(sym ** alpha)
    d_alpha = np.minimum(d_alpha, d_alpha.T)
    # where no chain beats the direct edge, keep rho_sym itself (the root would drift by an ulp)
    rho = np.minimum(np.where(d_alpha >= sym ** alpha, sym, d_alpha ** (1.0 / alpha)), sym)
    np.fill_diagonal(rho, 0.0)
    off = ~np.eye(space.n, dtype=bool)
    if np.any(rho[off] == 0):
        distortion = math.inf
    else:
        distortion = max(1.0, float((sym[off] / rho[off]).max()))
    rho.setflags(write=False)
    return RegularizedMetric(alpha=float(alpha), matrix=rho, distortion=distortion)


def default_alpha_grid():
    return tuple(float(a) for a in np.geomspace(0.25, 8.0, 48))


def estimate_index(space, alpha_grid=None, budget=2.0, refine=30):
    """Largest tested exponent whose regularized metric stays within ``budget``.

    The acceptance test compares ``rho_sym**alpha`` against the metric
    ``rho_#**alpha``, i.e. the power distortion.  After the grid scan the
    crossing between the last passing and first failing grid points is bisected
    ``refine`` times; bisection points join the tested grid.
    """
    grid = default_alpha_grid() if alpha_grid is None else tuple(float(a) for a in alpha_grid)
    if not grid:
        raise SpaceError("alpha grid is empty")
    if list(grid) != sorted(grid):
        raise SpaceError("alpha grid must be ascending")
    if not budget > 1:
        raise SpaceError("budget must exceed 1")
    tested = {}
    for a in grid:
        tested[a] = regularize(space, a).power_distortion
    passing = [a for a in grid if tested[a] <= budget]
    if tested[grid[-1]] <= budget:
        lo, infinite = grid[-1], True
    elif not passing:
        lo, infinite = 0.0, False
    else:
        lo, infinite = max(passing), False
        hi = min(a for a in grid if a > lo and tested[a] > budget)
        for _ in range(refine):
            mid = 0.5 * (lo + hi)
            tested[mid] = regularize(space, mid).power_distortion
            if tested[mid] <= budget:
                lo = mid
            else:
                hi = mid
    alphas = tuple(sorted(tested))
    return IndexEstimate(lower_bound=lo, infinite=infinite, alpha_grid=alphas,
                         distortion_curve=tuple(tested[a] for a in alphas), budget=float(budget))
