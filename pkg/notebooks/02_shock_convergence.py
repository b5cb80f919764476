"""
Convergence to the entropy solution along limiting paths
========================================================

Riemann shock from 0 to 0.7 under the Greenshields law.  The error of W
against the exact shock is measured along eps = h, eps = 5h and eps = sqrt(h).
"""

# %%
from nonlocal_lwr import LINEAR, riemann_shock
from nonlocal_lwr.harness import StudySpec, kuznetsov_constants, run_convergence_study

H_LIST = (4e-3, 2e-3, 1e-3, 5e-4)

# %%
results = {}
for path in ("eps_equals_h", "eps_equals_5h", "eps_equals_sqrt_h"):
    spec = StudySpec(riemann_shock(), LINEAR, path=path, h_list=H_LIST)
    results[path] = res = run_convergence_study(spec)
    print(f"{path:18s} slope {res.fitted_slope:.3f}")
    for r in res.rows:
        print(f"    h={r.h:.1e} eps={r.epsilon:.2e} error={r.l1_error:.3e} ({r.wall_time:.2f} s)")

# %% [markdown]
# Along eps = h the error falls like h, while the error bound behaves like
# sqrt(h).  The ratio of the two is therefore not constant:

# %%
ks = kuznetsov_constants(results["eps_equals_h"], tv0=0.7)
print("error / envelope:", ", ".join(f"{k:.4f}" for k in ks))
