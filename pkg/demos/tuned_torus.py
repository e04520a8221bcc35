# %% [markdown]
# # A conformal class with a sign-changing null vector
#
# A warped 3-torus is tuned until its second Yamabe eigenvalue vanishes.  The
# null vector then has two nodal domains, and the quantities attached to them
# behave as conformal invariants do.

# %%
import numpy as np

from confnodal.conformal import FamilySpec, bandlimited_field, scalar_curvature_conformal, tuned_kernel_example
from confnodal.nodal import (courant_check, green_identity, lp_invariant, nodal_domain_identity, nodal_domains,
                             obstruction_integral)
from confnodal.prescription import forbidden_function_test, probe_factors
from confnodal.verify import conformal_invariance_suite

# %%
tk = tuned_kernel_example(32)
grid = tk.metric.grid
u = tk.null_vector
print(f"tuned warp c = {tk.tune.c:.6f}, lowest eigenvalues {np.round(tk.eigenvalues, 6)}")
dec = nodal_domains(u.reshape(grid.shape))
print("nodal domains:", dec.count, "signs:", dec.signs, courant_check(u.reshape(grid.shape), tk.nu).to_dict())

# %% [markdown]
# ## Boundary-flux identities
# Volume integral of |u| P v against the flux of grad u through the nodal set.

# %%
v = np.exp(bandlimited_field(grid, 7, 0.5)).ravel()
for k in range(1, dec.count + 1):
    print(f"domain {k}:", nodal_domain_identity(u, v, k, tk.metric, tk.operator, dec).to_dict())
print("whole torus:", green_identity(u, v, tk.metric, tk.operator).to_dict())

# %% [markdown]
# ## Scalar curvature in the class
# For every conformal factor the weighted integral of the new scalar
# curvature over a nodal domain is negative.

# %%
for seed in range(3):
    up = bandlimited_field(grid, seed, 0.5)
    f = scalar_curvature_conformal(up, grid, tk.metric.base)
    vals = [obstruction_integral(u, dec.mask(k), f, up, tk.metric).value for k in (1, 2)]
    print(seed, np.round(vals, 4), "L^6 norm", lp_invariant(u, up, 3))

# %% [markdown]
# ## Forbidden Q-curvatures

# %%
verdict = forbidden_function_test(u, u ** 3, probe_factors(grid), tk.metric.base_weights)
print(verdict.verdict, verdict.margins)

# %% [markdown]
# ## Invariance over a family of factors (N = 16)

# %%
report = conformal_invariance_suite(16, 3, FamilySpec(0, 0.5, 5))
for check in report["checks"]:
    print(f"{check['name']:28s} {'ok' if check['passed'] else 'VIOLATED'}")
