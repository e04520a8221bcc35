# %% [markdown]
# # GJMS operators on hyperbolic products
#
# On a product with Ric = -g the GJMS eigenvalue over a surface eigenvalue
# lambda is a product of linear factors lambda - mu_j.  Its sign on
# (0, mu_{(n-1)/2}) is decided by how many mu_j sit above that threshold.

# %%
import numpy as np

from confnodal.einstein import (hyperbolic_product_eigenvalue, mu_j, mu_threshold, sign_guaranteed, sign_table,
                                stated_hypothesis)

# %%
for n in (8, 9, 12, 13):
    top = float(mu_threshold(n))
    print(f"n={n}: mu_j =", [str(mu_j(j, n)) for j in range(1, n // 2 + 2)], "threshold", mu_threshold(n))
    for k in range(1, n + 1):
        t = sign_table(n, [k], 50)[k]
        sign = "-" if t["negative"] == 50 else ("+" if t["negative"] == 0 else "mixed")
        print(f"   k={k:2d}  sign {sign:5s} guaranteed={sign_guaranteed(n, k)!s:5s} clause={stated_hypothesis(n, k)}")

# %% [markdown]
# A single surface eigenvalue, for comparison with the table.

# %%
print(hyperbolic_product_eigenvalue(np.array([0.1, 0.5]), 5, 9))
