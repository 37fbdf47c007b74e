"""Deterministic test spaces.

Every generator returns a ``QuasiMetricSpace`` normalized to diameter 1
(unless ``diameter`` says otherwise); the domain generators also return a
sorted index array for Omega.  Randomness uses numpy's PCG64 generator seeded
explicitly.
"""

import math

import numpy as np

from ..space import QuasiMetricSpace, SpaceError

KINDS = ("grid", "snowflake_grid", "ultrametric_tree", "cantor_in_grid", "cusp", "random_quasimetric")


def _normalize(d, diameter):
    top = float(d.max())
    return d * (diameter / top) if diameter is not None else d


def _line(x, power=1.0):
    return np.abs(x[:, None] - x[None, :]) ** power


def grid(n, diameter=1.0):
    """n equally spaced points on a segment, unit weights."""
    if n < 2:
        raise SpaceError("grid needs n >= 2")
    # integer differences divided once, so equal gaps give equal distances
    return QuasiMetricSpace(_normalize(_line(np.arange(n, dtype=float)) / (n - 1), diameter), np.ones(n))


def snowflake_grid(n, epsilon, diameter=1.0):
    """Grid points with rho = |x - y|**(1/epsilon)."""
    if n < 2 or not epsilon > 0:
        raise SpaceError("snowflake_grid needs n >= 2 and epsilon > 0")
    # integer differences keep powers of the spacing exact
    i = np.arange(n, dtype=float)
    d = _line(i, 1.0 / epsilon) / float(n - 1) ** (1.0 / epsilon)
    return QuasiMetricSpace(_normalize(d, diameter), np.ones(n))


def ultrametric_tree(depth, branching=2, ratio=0.5, diameter=1.0):
    """Leaves of a regular tree; two leaves splitting at depth j are ratio**j apart."""
    if depth < 1 or branching < 2 or not 0 < ratio < 1:
        raise SpaceError("bad ultrametric_tree parameters")
    n = branching ** depth
    idx = np.arange(n)
    digits = np.array([(idx // branching ** (depth - 1 - j)) % branching for j in range(depth)]).T
    same = np.cumprod(digits[:, None, :] == digits[None, :, :], axis=2).sum(axis=2)
    d = np.where(same == depth, 0.0, ratio ** same.astype(float))
    return QuasiMetricSpace(_normalize(d, diameter), np.ones(n))


def cantor_mask(level, depth=2):
    """Grid {i/3**level} points lying in the closed intervals kept after ``depth`` middle-third steps."""
    if not 1 <= depth <= level:
        raise SpaceError("need 1 <= depth <= level")
    i = np.arange(3 ** level + 1)
    width = 3 ** (level - depth)
    keep = np.zeros(i.size, dtype=bool)
    for start in range(3 ** depth):
        digits = [(start // 3 ** (depth - 1 - j)) % 3 for j in range(depth)]
        if 1 not in digits:
            keep[start * width:(start + 1) * width + 1] = True
    return keep


def cantor_in_grid(level, depth=2, diameter=1.0):
    """Uniform grid of 3**level + 1 points; Omega = the depth-``depth`` Cantor intervals."""
    n = 3 ** level + 1
    space = grid(n, diameter)
    return space, np.flatnonzero(cantor_mask(level, depth))


def cusp(n, terms=3, diameter=1.0):
    """Grid {i/n : 0 <= i < n} with Omega = {0} and the points 2**(-2**m), m < terms.

    Omega stays fixed while the grid is refined, so the measure density
    constant grows linearly in n.
    """
    if n < 2 ** 2 ** (terms - 1):
        raise SpaceError("grid too coarse for the cusp points")
    x = np.arange(n) / n
    d = _line(np.arange(n, dtype=float)) / n
    targets = [0.0] + [2.0 ** -(2 ** m) for m in range(terms)]
    omega = sorted({int(round(t * n)) for t in targets})
    if any(abs(x[i] - t) > 1e-15 for i, t in zip(omega, sorted(targets))):
        raise SpaceError("cusp points must lie on the grid")
    return QuasiMetricSpace(_normalize(d, diameter), np.ones(n)), np.array(omega)


def random_quasimetric(n, seed, power=1.0, asymmetry=0.5, dim=2, weights="random", diameter=1.0):
    """Random points in the unit cube, distances |x-y|**power scaled by 1 + asymmetry*U(0,1), asymmetric."""
    if n < 2 or asymmetry < 0 or not power > 0:
        raise SpaceError("bad random_quasimetric parameters")
    rng = np.random.Generator(np.random.PCG64(seed))
    pts = rng.random((n, dim))
    base = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)) ** power
    d = base * (1 + asymmetry * rng.random((n, n)))
    np.fill_diagonal(d, 0.0)
    w = rng.uniform(0.5, 2.0, n) if weights == "random" else np.ones(n)
    return QuasiMetricSpace(_normalize(d, diameter), w)


def generate(spec):
    """Build a space from a dict {"kind": ..., **params}; returns (space, omega or None)."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in KINDS:
        raise SpaceError(f"unknown generator kind {kind!r}")
    if kind == "grid":
        return grid(**spec), None
    if kind == "snowflake_grid":
        return snowflake_grid(**spec), None
    if kind == "ultrametric_tree":
        return ultrametric_tree(**spec), None
    if kind == "random_quasimetric":
        return random_quasimetric(**spec), None
    if kind == "cantor_in_grid":
        return cantor_in_grid(**spec)
    return cusp(**spec)


def log2_ceil(x):
    return math.ceil(math.log2(x))
