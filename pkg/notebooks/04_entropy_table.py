"""
Local entropy violations
========================

Summed positive parts of the local Kruzhkov residuals (c = 0.5) for rho and W
on a 2e-3 grid, for three kernels and three initial data.  Takes about half a
minute.
"""

# %%
from nonlocal_lwr import CONSTANT, EXPONENTIAL, LINEAR, bell_shaped, riemann_rarefaction, riemann_shock
from nonlocal_lwr.harness import run_entropy_table

table = run_entropy_table([2e-1, 2e-2, 2e-3], 2e-3, [EXPONENTIAL, LINEAR, CONSTANT],
                          [riemann_shock(), riemann_rarefaction(), bell_shaped()])

# %%
for data in table.data:
    print(data)
    for metric in ("rho", "W"):
        for kernel in table.kernels:
            col = table.column(kernel, data, metric)
            # anything below 1e-12 is rounding noise
            cells = "  ".join("0      " if v < 1e-12 else f"{v:.1e}" for v in col)
            print(f"   E_{metric:3s} {kernel:12s} {cells}")
