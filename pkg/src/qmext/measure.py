"""Doubling, Ahlfors, measure-density and perfectness diagnostics on finite spaces.

Every supremum or infimum over radii is taken over the finitely many
constancy intervals of the balls involved, so the reported constants are the
exact extrema of their defining ratios.
"""

import math
from dataclasses import dataclass

import numpy as np

from .space import SpaceError, critical_radii


@dataclass(frozen=True)
class RegularityReport:
    c_doubling: float
    doubling_witness: tuple
    q_doubling: tuple
    ahlfors: tuple
    r_max: float
    band: tuple
    c_doubling_band: float


@dataclass(frozen=True)
class DensityReport:
    c_mu: float
    witness: tuple


@dataclass(frozen=True)
class PerfectnessReport:
    lam: float
    absent: bool
    witness: tuple
    checked: int
    vacuous: int


class _Masses:
    """Sorted distance rows with prefix masses for O(log n) ball-mass queries."""

    def __init__(self, dist, weight, mask=None):
        w = weight if mask is None else np.where(mask, weight, 0.0)
        order = np.argsort(dist, axis=1, kind="stable")
        self.sorted = np.take_along_axis(dist, order, axis=1)
        self.prefix = np.concatenate(
            [np.zeros((dist.shape[0], 1)), np.cumsum(w[order], axis=1)], axis=1)

    def open(self, x, r):
        """mu(B(x, r)) with strict inequality; r may be an array."""
        k = np.searchsorted(self.sorted[x], r, side="left")
        return self.prefix[x][k]

    def closed(self, x, r):
        k = np.searchsorted(self.sorted[x], r, side="right")
        return self.prefix[x][k]


def _right_endpoints(row, r_max):
    vals = np.unique(row[(row > 0) & (row < r_max)])
    return np.append(vals, r_max)


def regularity(space, r_max=1.0, Q=None, band=None, kappa=True, ahlfors=False):
    """Doubling constant, Q-doubling pair and optional Ahlfors bounds.

    ``band`` restricts the radii used for the Q fit (and the Ahlfors bounds) to
    ``[band[0], band[1]]``, which avoids lattice artifacts at tiny radii.
    """
    if not r_max > 0:
        raise SpaceError("r_max must be positive")
    d, w, n = space.dist, space.weight, space.n
    mm = _Masses(d, w)
    best, witness = 1.0, None
    best_band = 1.0
    for x in range(n):
        radii = _right_endpoints(d[x], r_max)
        ratio = mm.open(x, 2 * radii) / mm.open(x, radii)
        i = int(np.argmax(ratio))
        if ratio[i] > best:
            best, witness = float(ratio[i]), (x, float(radii[i]))
        if band is not None:
            sel = (radii >= band[0]) & (radii <= band[1])
            if sel.any():
                best_band = max(best_band, float(ratio[sel].max()))
    c_band = best_band if band is not None else best
    q = math.log2(c_band) if Q is None else float(Q)
    kap = q_doubling_kappa(space, q, r_max) if kappa else None
    ahl = ahlfors_bounds(space, q, band if band is not None else (0.0, r_max)) if ahlfors else None
    return RegularityReport(c_doubling=best, doubling_witness=witness, q_doubling=(q, kap),
                            ahlfors=ahl, r_max=float(r_max), band=band, c_doubling_band=c_band)


def q_doubling_kappa(space, Q, r_max=1.0):
    """inf of mu(B(x,r))/mu(B(y,R)) * (R/r)**Q over nested balls B(x,r) in B(y,R), r <= R <= r_max.

    For a fixed outer set S = closed ball of radius e around y, the admissible
    outer radii form (e, e_next]; the infimum takes R -> max(e, r).  An inner
    ball B(x,r) lies in S iff r <= dist(x, X minus S); within a constancy
    interval of B(x, .) the ratio is smallest at the largest admissible r.
    """
    d, w, n = space.dist, space.weight, space.n
    mm = _Masses(d, w)
    srt, prefix = mm.sorted, mm.prefix
    # first index of each value's tie group in the sorted rows
    cols = np.arange(n)
    starts = np.where(np.concatenate([np.ones((n, 1), bool), srt[:, 1:] != srt[:, :-1]], axis=1),
                      cols[None, :], 0)
    first = np.maximum.accumulate(starts, axis=1)
    open_at = np.take_along_axis(prefix, first, axis=1)
    best = math.inf
    for y in range(n):
        levels = np.unique(d[y])
        for j, e in enumerate(levels):
            if e >= r_max:
                break
            e_next = levels[j + 1] if j + 1 < len(levels) else math.inf
            inside = d[y] <= e
            mass_s = float(w[inside].sum())
            xs = np.flatnonzero(inside)
            if inside.all():
                gap = np.full(xs.size, math.inf)
            else:
                gap = d[np.ix_(xs, np.flatnonzero(~inside))].min(axis=1)
            cap = np.minimum(np.minimum(gap, e_next), r_max)
            rows = srt[xs]
            ok = (rows > 0) & (rows < cap[:, None])
            r = np.where(ok, rows, 1.0)
            vals = np.where(ok, open_at[xs] * (np.maximum(e, r) / r) ** Q, math.inf)
            cap_mass = prefix[xs, (rows < cap[:, None]).sum(axis=1)]
            cap_vals = cap_mass * (np.maximum(e, cap) / cap) ** Q
            best = min(best, float(vals.min()) / mass_s, float(cap_vals.min()) / mass_s)
    return best


def ahlfors_bounds(space, Q, band):
    """(Q, inf, sup) of mu(B(x,r)) / r**Q over centres and radii in the band."""
    lo, hi = band
    d, w, n = space.dist, space.weight, space.n
    mm = _Masses(d, w)
    inf_v, sup_v = math.inf, 0.0
    for x in range(n):
        cuts = np.unique(np.concatenate([[lo, hi], d[x][(d[x] > lo) & (d[x] < hi)]]))
        cuts = cuts[cuts > 0]
        if cuts.size == 0:
            continue
        right = cuts
        inf_v = min(inf_v, float((mm.open(x, right) / right ** Q).min()))
        # just above a left endpoint a the ball is the closed ball of radius a
        left = cuts[cuts < hi]
        if left.size:
            sup_v = max(sup_v, float((mm.closed(x, left) / left ** Q).max()))
    return (float(Q), inf_v, sup_v)


def _omega_mask(space, omega):
    mask = np.zeros(space.n, dtype=bool)
    mask[np.asarray(list(omega), dtype=int)] = True
    if not mask.any():
        raise SpaceError("omega must be nonempty")
    return mask


def measure_density(space, omega, r_max=1.0):
    """Exact sup over x in omega and r <= r_max of mu(B(x,r)) / mu(B(x,r) & omega)."""
    mask = _omega_mask(space, omega)
    d, w = space.dist, space.weight
    full = _Masses(d, w)
    part = _Masses(d, w, mask)
    best, witness = 1.0, None
    for x in np.flatnonzero(mask):
        radii = _right_endpoints(d[x], r_max)
        ratio = full.open(x, radii) / part.open(x, radii)
        i = int(np.argmax(ratio))
        if witness is None or ratio[i] > best:
            best = float(ratio[i])
            prev = float(radii[i - 1]) if i > 0 else 0.0
            witness = (int(x), prev, float(radii[i]))
    return DensityReport(c_mu=best, witness=witness)


def phi_radius(space, omega, x, r):
    """sup{s in [0, r] : mu(B(x,s) & omega) <= mu(B(x,r) & omega) / 2}."""
    mask = _omega_mask(space, omega)
    if not mask[x]:
        raise SpaceError("x must belong to omega")
    if not r > 0:
        raise SpaceError("r must be positive")
    row = space.dist[x]
    sel = mask & (row < r)
    half = 0.5 * float(space.weight[sel].sum())
    idx = np.flatnonzero(sel)
    order = idx[np.argsort(row[idx], kind="stable")]
    cum = np.cumsum(space.weight[order])
    m = int(np.argmax(cum > half))
    return float(min(row[order[m]], r))


def uniform_perfectness(space, omega, r_max=1.0, r_min=0.0, cap=0.999):
    """Largest lambda such that annuli B(x,r) minus B(x, lambda r) meet omega whenever omega leaves B(x,r).

    Radii run over (r_min, r_max]; ``r_min`` lets callers skip scales below the
    lattice resolution, where a finite set can never be perfect.  ``absent`` is
    set when some qualifying ball meets omega only at its centre.
    """
    mask = _omega_mask(space, omega)
    d = space.dist
    lam, witness, checked, vacuous, absent = math.inf, None, 0, 0, False
    for x in np.flatnonzero(mask):
        row = d[x]
        others = mask.copy()
        others[x] = False
        od = row[others]
        for r in critical_radii(space, x, r_max):
            if r <= r_min:
                continue
            if not np.any(od >= r):
                vacuous += 1
                continue
            checked += 1
            inner = od[od < r]
            if inner.size == 0:
                absent = True
                if witness is None or lam > 0:
                    witness = (int(x), float(r))
                lam = 0.0
                continue
            ratio = float(inner.max()) / r
            if ratio < lam:
                lam, witness = ratio, (int(x), float(r))
    if absent:
        return PerfectnessReport(lam=0.0, absent=True, witness=witness, checked=checked, vacuous=vacuous)
    if lam == math.inf:
        lam = cap
    return PerfectnessReport(lam=min(lam, cap), absent=False, witness=witness,
                             checked=checked, vacuous=vacuous)


def density_bootstrap_check(space, omega, lam, c_omega, r_max=1.0):
    """Instance check of the density bootstrap.

    Returns the hypothesis constant on the restricted scales and the unconditional constant.

    The hypothesis scales are the pairs (x, r) with r <= c_omega * phi(x, r) / lam**2.
    Returns (hypothesis_constant, unconditional_constant, n_hypothesis_pairs).
    """
    mask = _omega_mask(space, omega)
    d, w = space.dist, space.weight
    full = _Masses(d, w)
    part = _Masses(d, w, mask)
    hyp, count = 1.0, 0
    for x in np.flatnonzero(mask):
        for r in critical_radii(space, x, r_max):
            if r <= c_omega * phi_radius(space, omega, x, r) / lam ** 2:
                count += 1
                hyp = max(hyp, float(full.open(x, r) / part.open(x, r)))
    return hyp, measure_density(space, omega, r_max).c_mu, count


def iteration_bound(theta, p, t):
    """Lower bound theta**(-pt/(t-p)) * 2**(-p t^2/(t-p)^2) for the first mass of an iterated ball sequence."""
    if not 0 < p < t:
        raise SpaceError("need 0 < p < t")
    return theta ** (-p * t / (t - p)) * 2.0 ** (-p * t * t / (t - p) ** 2)


def iteration_hypothesis(masses, theta, p, t, start=1):
    """True iff masses[j+1]**(1/t) <= theta * 2**j * masses[j]**(1/p) for every listed j (from ``start``)."""
    m = np.asarray(masses, dtype=float)
    j = np.arange(start, start + m.size - 1)
    return bool(np.all(m[1:] ** (1.0 / t) <= theta * 2.0 ** j * m[:-1] ** (1.0 / p)))
