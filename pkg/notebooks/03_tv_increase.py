"""
Total variation of rho and W
============================

A small bump in front of a jam makes TV(rho) grow for a while before it
decays, yet the total variation of W never increases.
"""

# %%
import numpy as np

from nonlocal_lwr import CONSTANT, EXPONENTIAL, LINEAR
from nonlocal_lwr.harness import run_tv_study

# %%
for kernel in (EXPONENTIAL, LINEAR, CONSTANT):
    s = run_tv_study([0.2], 2e-3, kernel, T=1.6)[0.2]
    every = len(s.t) // 8
    print(f"{kernel.name}: TV(rho) peaks at {s.tv_rho.max():.3f}, "
          f"back below 1.05 at t={s.return_time}")
    print("   t      TV(rho)  TV(W)")
    for t, a, b in zip(s.t[::every], s.tv_rho[::every], s.tv_W[::every]):
        print(f"   {t:5.2f}  {a:.4f}   {b:.4f}")
    print(f"   largest one-step increase of TV(W): {np.max(np.diff(s.tv_W)):.1e}")
