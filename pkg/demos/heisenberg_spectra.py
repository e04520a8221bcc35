# %% [markdown]
# # Spectra of Heisenberg nilmanifolds
#
# Closed-form Laplacian, Yamabe and Paneitz spectra of the left-invariant
# metrics g_s on a compact Heisenberg quotient, checked against a twisted
# finite-difference grid, plus the growth of the negative-eigenvalue count.

# %%
import numpy as np

from confnodal.heisenberg import (HeisenbergModel, HermiteFamily, count_negative, fit_slope, lowest_nonzero,
                                  paneitz_constants, spectrum_lines, yamabe_eigenvalue, yamabe_null_parameter)
from confnodal.heisenberg.grid import twisted_grid_lowest

# %% [markdown]
# ## Closed form against the grid
# Lowest nonzero Laplacian eigenvalues for d = 1, r = (1), s = 1.

# %%
model = HeisenbergModel(1, (1,), 1.0)
exact = lowest_nonzero(spectrum_lines(model, "laplacian", 200.0), 10)
for N in (16, 32, 64):
    grid = twisted_grid_lowest(model, N, 11)[1:]
    print(f"N={N:3d}  max rel. error {np.max(np.abs(grid - exact) / exact):.2e}")

# %% [markdown]
# ## Null parameters
# Each Hermite family (n, |alpha|) crosses zero for exactly one s.

# %%
for n in (1, 2, 3):
    s = yamabe_null_parameter(1, n, 0)
    lam = yamabe_eigenvalue(model.with_s(s), HermiteFamily(n, 0))
    print(f"n={n}: s = {s:.6f}, eigenvalue there {lam:+.1e}")

# %% [markdown]
# ## Negative Yamabe eigenvalues
# The exact count grows like s^6 for d = 1, faster than s^4.

# %%
s_values = np.geomspace(8, 64, 8)
counts = [count_negative(model.with_s(float(s)), "yamabe").total for s in s_values]
for s, c in zip(s_values, counts):
    print(f"s={s:7.3f}  nu={c}")
print("log-log slope:", round(fit_slope(s_values, counts), 3))

# %% [markdown]
# ## Paneitz constants

# %%
for d in range(1, 6):
    rep = paneitz_constants(d).report()
    print(d, rep["c0"], rep["c1"], "delta0 =", rep["delta0"], "simplified form:", rep["delta0_closed_form"])
