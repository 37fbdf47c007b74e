"""Whitney-type ball covers, Hoelder partitions of unity and bump families.

All constructions work with a regularized metric ``rho_#`` (symmetric, with
``rho_#**alpha`` a genuine metric).  Every structural property that the
construction is supposed to have is re-measured after the fact; a failed
check raises ``WhitneyError`` carrying the offending point.
"""

import math
from dataclasses import dataclass

import numpy as np

from .functions import minimal_norm
from .measure import phi_radius
from .space import SpaceError, compute_constants

SEPARATION = 0.5


class WhitneyError(RuntimeError):
    pass


@dataclass(frozen=True)
class WhitneyCover:
    centers: tuple
    radii: np.ndarray
    theta: float
    Lambda: float
    c: float
    inflation: float
    overlap: int
    local_overlap: int
    neighbor_ratio: float
    open_set: tuple
    distance_to_complement: np.ndarray


@dataclass(frozen=True)
class PartitionOfUnity:
    psi: np.ndarray
    phi: np.ndarray
    alpha: float
    theta_prime: float
    c_star: float
    seminorms: dict


def _as_mask(n, subset):
    mask = np.zeros(n, dtype=bool)
    mask[np.asarray(list(subset), dtype=int)] = True
    return mask


def whitney_cover(space, regmetric, open_set, theta=None, local_eps=0.5):
    """Greedy Whitney cover of ``open_set`` by rho_#-balls, verified afterwards.

    Radii are d(x) / (2 theta c) where d is the distance to the complement and
    c the quasi-triangle constant of rho_#.  Centres are taken in decreasing d
    order and kept when they are at least half the larger radius away from every
    centre kept so far.
    """
    n = space.n
    R = np.asarray(regmetric.matrix)
    O = _as_mask(n, open_set)
    if not O.any() or O.all():
        raise SpaceError("open set must be a proper nonempty subset")
    c = compute_constants(space.with_dist(R)).c_rho
    if theta is None:
        theta = 2 * c * c
    if not theta > c * c:
        raise SpaceError("theta must exceed c**2")
    dcomp = R[:, ~O].min(axis=1)
    rad = dcomp / (2 * theta * c)
    pts = np.flatnonzero(O)
    order = sorted(pts, key=lambda x: (-dcomp[x], x))
    centers = []
    for x in order:
        if all(R[x, j] >= SEPARATION * max(rad[x], rad[j]) for j in centers):
            centers.append(int(x))
    cen = np.array(centers)
    radii = rad[cen].copy()
    # inflate uniformly until the open set is covered (a no-op for this greedy order)
    inflation = 1.0
    while True:
        covered = (R[cen] < (radii * inflation)[:, None]).any(axis=0)
        if covered[O].all():
            break
        inflation *= 1.25
        if inflation > 2 * theta * c:
            bad = int(np.flatnonzero(O & ~covered)[0])
            raise WhitneyError(f"coverage failed at point {bad}")
    radii = radii * inflation
    cover = _measure_cover(R, O, cen, radii, theta, c, inflation, dcomp, local_eps)
    return cover


def _measure_cover(R, O, cen, radii, theta, c, inflation, dcomp, local_eps):
    inner = R[cen] < (theta * radii)[:, None]
    core = R[cen] < radii[:, None]
    if not core.any(axis=0)[O].all():
        raise WhitneyError("balls do not cover the open set")
    if (core.any(axis=0) & ~O).any():
        raise WhitneyError(f"a core ball leaves the open set at {int(np.flatnonzero(core.any(axis=0) & ~O)[0])}")
    leak = inner & ~O[None, :]
    if leak.any():
        j = int(np.flatnonzero(leak.any(axis=1))[0])
        raise WhitneyError(f"theta-dilate of ball {j} leaves the open set")
    # smallest dilation reaching the complement, nudged so that the open ball contains it
    reach = dcomp[cen] / radii
    Lam = float(reach.max()) * (1 + 2.0 ** -20)
    if not np.all((R[cen][:, ~O] < (Lam * radii)[:, None]).any(axis=1)):
        raise WhitneyError("Lambda-dilate misses the complement")
    overlap = int(inner.sum(axis=0)[O].max())
    local = (R[cen] < (local_eps * radii)[:, None]).sum(axis=0)
    meet = (inner.astype(int) @ inner.T.astype(int)) > 0
    ratio = radii[:, None] / radii[None, :]
    neighbor = float(ratio[meet].max())
    return WhitneyCover(centers=tuple(int(x) for x in cen), radii=radii, theta=float(theta), Lambda=Lam,
                        c=float(c), inflation=float(inflation), overlap=overlap,
                        local_overlap=int(local[O].max()), neighbor_ratio=neighbor,
                        open_set=tuple(int(i) for i in np.flatnonzero(O)), distance_to_complement=dcomp)


def holder_seminorm(f, R, beta):
    """max |f(x) - f(y)| / R(x,y)**beta over distinct pairs."""
    diff = np.abs(f[:, None] - f[None, :])
    den = R ** beta
    np.fill_diagonal(den, 1.0)
    out = diff / den
    np.fill_diagonal(out, 0.0)
    return float(out.max())


def partition_of_unity(space, regmetric, cover, alpha=None, theta_prime=None, tol=1e-12):
    """Hoelder partition of unity subordinate to a Whitney cover, with all properties measured."""
    R = np.asarray(regmetric.matrix)
    n = space.n
    c = cover.c
    alpha = regmetric.alpha if alpha is None else float(alpha)
    if c > 2 ** (1.0 / alpha) * (1 + 1e-12):
        raise SpaceError("alpha too large for the quasi-triangle constant of rho_#")
    if theta_prime is None:
        theta_prime = (c + cover.theta / c) / 2
    if not c < theta_prime < cover.theta / c:
        raise SpaceError("theta_prime must lie in (c, theta/c)")
    cen = np.array(cover.centers)
    r = cover.radii
    Ra = R[cen] ** alpha
    ta = theta_prime ** alpha
    phi = np.clip((ta * r[:, None] ** alpha - Ra) / ((ta - 1) * r[:, None] ** alpha), 0.0, 1.0)
    core = R[cen] < r[:, None]
    union = core.any(axis=0)
    total = phi.sum(axis=0)
    psi = np.where(union[None, :], phi / np.where(total > 0, total, 1.0)[None, :], 0.0)

    # measured properties
    if np.any(psi < 0) or np.any(psi > 1 + tol):
        raise WhitneyError("psi outside [0, 1]")
    support = R[cen] < (theta_prime * r)[:, None]
    if np.any((psi > 0) & ~support):
        raise WhitneyError("psi leaks outside its dilated ball")
    sums = psi.sum(axis=0)
    if np.abs(sums[union] - 1).max(initial=0) > tol or np.abs(sums[~union]).max(initial=0) > 0:
        raise WhitneyError("psi does not sum to the indicator of the union")
    dil_mid = (R[cen] < (theta_prime * r)[:, None]).any(axis=0)
    dil_big = (R[cen] < (cover.theta * r)[:, None]).any(axis=0)
    if not (np.array_equal(union, dil_mid) and np.array_equal(union, dil_big)):
        raise WhitneyError("indicator identities fail")
    floor = min(float(psi[j][core[j]].min()) for j in range(len(cen)))
    c_star = 1.0 / floor
    semis = {}
    for beta in (alpha / 2, alpha):
        worst = 0.0
        for j in range(len(cen)):
            worst = max(worst, holder_seminorm(psi[j], R, beta) * r[j] ** beta)
        semis[beta] = worst
        c_star = max(c_star, worst)
    # phi_j is a clamp of a 1-Lipschitz function of the metric R**alpha
    Rpow = R ** alpha
    for j in range(len(cen)):
        bound = 1.0 / ((ta - 1) * r[j] ** alpha)
        if holder_seminorm(phi[j], Rpow, 1.0) > bound * (1 + 1e-9):
            raise WhitneyError(f"bump {j} exceeds its Lipschitz bound")
    return PartitionOfUnity(psi=psi, phi=phi, alpha=alpha, theta_prime=float(theta_prime),
                            c_star=float(c_star), seminorms=semis)


@dataclass(frozen=True)
class BumpFamily:
    radii: np.ndarray
    functions: np.ndarray
    norm_constant: float
    norms: tuple
    perfect_ok: bool


def holder_bumps(space, regmetric, x, r, s, p, q, count, delta=0.5, flavor="M", c0=None):
    """Nested Hoelder bumps around x with radii strictly between delta*r/D and r/D.

    D is the distortion of rho_# against rho, so each rho_#-ball of radius r_j
    sits inside the rho-ball of radius r.  Properties (a)-(d) are checked
    exactly, (e) through the minimal norm and (f) when ``c0`` is given.  With
    ``c0`` (meaning r <= c0 * phi(x, r)) the top radius shrinks to r/(c0 D), so
    every bump ball lies inside the half-mass radius and the rest of B(x, r)
    outweighs it.
    """
    R = np.asarray(regmetric.matrix)
    alpha = regmetric.alpha
    if s > alpha:
        raise SpaceError("s must not exceed the regularization exponent")
    D = regmetric.distortion
    if not math.isfinite(D):
        raise SpaceError("regularized metric collapsed")
    if c0 is not None:
        if not c0 > 1:
            raise SpaceError("c0 must exceed 1")
        if r > c0 * phi_radius(space, range(space.n), x, r):
            raise SpaceError("r <= c0 * phi(x, r) fails at this centre")
    top = r / D if c0 is None else r / (c0 * D)
    radii = top * delta ** (np.arange(1, count + 2) / (count + 2))
    if np.any(np.diff(radii) >= 0) or radii[-1] <= delta * top:
        raise SpaceError("radius sequence collapsed")
    rowa = R[x] ** alpha
    funcs = []
    for j in range(count):
        hi, lo = radii[j] ** alpha, radii[j + 1] ** alpha
        funcs.append(np.clip((hi - rowa) / (hi - lo), 0.0, 1.0))
    funcs = np.array(funcs)
    rho_ball = space.dist[x] < r
    for j in range(count):
        in_j = R[x] < radii[j]
        if np.any(in_j & ~rho_ball):
            raise WhitneyError("(a) bump ball not inside the rho-ball")
        if np.any(funcs[j][~in_j] != 0):
            raise WhitneyError("(c) bump nonzero outside its ball")
        if np.any(funcs[j][R[x] <= radii[j + 1]] != 1):
            raise WhitneyError("(d) bump not 1 on the inner closed ball")
    norms, const = [], 0.0
    for j in range(count):
        val = minimal_norm(space, funcs[j], s, p, q, flavor).value
        mass = float(space.weight[R[x] < radii[j]].sum())
        if not val > 0:
            raise WhitneyError("(e) bump has zero norm")
        norms.append(val)
        const = max(const, val / (2.0 ** (j + 1) * r ** (-s) * mass ** (1.0 / p)))
    ok = True
    if c0 is not None:
        for j in range(count):
            inner_mass = float(space.weight[R[x] <= radii[j + 1]].sum())
            for g in np.unique(np.concatenate([np.linspace(0.05, 1.5, 30), [0.5, 1.0]])):
                E = rho_ball & (np.abs(funcs[j] - g) >= 0.5)
                if float(space.weight[E].sum()) < inner_mass:
                    ok = False
    return BumpFamily(radii=radii, functions=funcs, norm_constant=const, norms=tuple(norms), perfect_ok=ok)
