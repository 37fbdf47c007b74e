"""Extend random data from a Cantor-type set inside a grid and measure what the extension costs.

    python demos/extension_on_cantor.py
"""

import numpy as np

from qmext.extension import ExtensionConfig, extend, verify_extension
from qmext.functions import minimal_norm
from qmext.workbench.generators import cantor_in_grid

sp, om = cantor_in_grid(4)
rng = np.random.Generator(np.random.PCG64(0))
u = rng.normal(size=len(om))
print(f"{sp.n} grid points, {len(om)} of them in Omega")

sub = sp.restrict(om)
for p, q in ((2, 2), (0.8, 0.9)):
    res = minimal_norm(sub, u, 0.6, p, q)
    print(f"norm of u on Omega, (p, q) = ({p}, {q}): {res.value:.4f} [{res.status}]")

for mode in ("median", "average"):
    ext = extend(sp, om, u, ExtensionConfig(s=0.6, p=2, q=2, mode=mode))
    assert np.array_equal(ext.u_ext[om], u)
    print(f"{mode:7s}: {len(ext.cover.centers)} Whitney balls, k0 = {ext.k0}, "
          f"cutoff support {int(ext.V.sum())} points")

# the extension comes with an explicit gradient; validity_scale is how much it must be
# inflated to be a true gradient, norm_ratio compares norms on X and on Omega
for p, q in ((2, 2), (0.8, 0.9)):
    rep = verify_extension(sp, om, u, ExtensionConfig(s=0.6, p=p, q=q))
    print(f"(p, q) = ({p}, {q}): validity_scale {rep.validity_scale:.4f}, norm_ratio {rep.norm_ratio:.4f}")
