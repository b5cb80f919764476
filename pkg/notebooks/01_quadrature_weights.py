"""
Quadrature weights for the three kernels
========================================

How the exact, Riemann and normalized Riemann weight families compare, and
which structural conditions each one satisfies.
"""

# %%
import numpy as np

from nonlocal_lwr import CONSTANT, EXPONENTIAL, LINEAR, build_weights, verify_weight_conditions
from nonlocal_lwr.kernels import first_moment

np.set_printoptions(precision=5, suppress=True)

# %% [markdown]
# With eps = 4h the exponential cell masses start at 1 - exp(-1/4) and decay
# geometrically, while the compact kernels cover exactly four cells.

# %%
for kernel in (EXPONENTIAL, LINEAR, CONSTANT):
    w = build_weights(kernel, "exact", 0.04, 0.01)
    print(f"{kernel.name:12s} K={w.K:3d}  first weights {w.weights[:5]}  total {w.total:.15f}")

# %% [markdown]
# Point samples of the kernel do not sum to one.  For the linear kernel at
# eps = h the total is 2, which is why the scheme built on them converges to
# the wrong limit.

# %%
for family in ("exact", "riemann", "normalized_riemann"):
    w = build_weights(LINEAR, family, 0.01, 0.01)
    rep = verify_weight_conditions(w, first_moment(LINEAR) * 2)
    print(f"{family:20s} weights {w.weights}  normalized={rep.normalized}  convex={rep.convex}")

# %%
# the constant kernel has a jump at the edge of its support, so its cell
# masses fail the discrete convexity check
rep = verify_weight_conditions(build_weights(CONSTANT, "exact", 1.0, 0.25), 0.5)
print(rep.as_dict())
