"""Quasi-metric constants, the regularized metric and the smoothness index on the test spaces.

    python demos/spaces_and_index.py
"""

import math

from qmext.metrization import estimate_index, regularize
from qmext.space import compute_constants
from qmext.workbench.generators import grid, random_quasimetric, snowflake_grid, ultrametric_tree

spaces = {
    "grid(64)": grid(64),
    "snowflake rho=|x-y|^2 (64)": snowflake_grid(64, 0.5),
    "tree(depth 4)": ultrametric_tree(4),
    "random asymmetric (40)": random_quasimetric(40, seed=1),
}

print(f"{'space':30s} {'C_rho':>8s} {'C_tilde':>8s} {'alpha':>8s} {'distortion':>11s}")
for name, sp in spaces.items():
    c = compute_constants(sp)
    alpha = 1 / math.log2(c.c_rho) if c.c_rho > 1 else 8.0
    reg = regularize(sp, alpha)
    print(f"{name:30s} {c.c_rho:8.4f} {c.c_tilde:8.4f} {alpha:8.4f} {reg.distortion:11.4f}")

# the index lower bound is the largest alpha whose regularization stays within the budget;
# on a grid the bound drifts down toward 1 as the grid is refined
print("\nindex lower bound (budget 2)")
for n in (16, 64, 256):
    print(f"  grid({n:3d})        {estimate_index(grid(n)).lower_bound:.4f}")
for n in (64, 256):
    print(f"  snowflake({n:3d})   {estimate_index(snowflake_grid(n, 2.0)).lower_bound:.4f}")
print(f"  tree              infinite={estimate_index(ultrametric_tree(4)).infinite}")
