"""The doubling selection on random metric spaces and the integral inequality on grids."""
# %%
import numpy as np

from liouville_lab import doubling as D
from liouville_lab import estimates as ES
from liouville_lab.errors import PreconditionError

# %% [markdown]
# Random finite metric spaces with weights spanning several decades. When
# M(y) dist(y, Γ) > 2k the selection ends within ⌈log₂(max M / M(y))⌉ + 1 steps.

# %%
rng = np.random.default_rng(1)
held = 0
for _ in range(200):
    space, M, k, y = D.random_instance(rng, n_max=60)
    try:
        res = D.doubling_select(space, M, k, y)
    except PreconditionError:
        continue
    held += 1
    assert all(D.verify_conclusions(space, M, k, y, res.x).values())
    assert res.iterations <= res.bound
print(f"{held} of 200 instances met the precondition; all conclusions held")

# %% [markdown]
# Both sides of the integral inequality by central differences. The slack
# (right minus left) is compared with a Richardson estimate of the grid error.

# %%
rng = np.random.default_rng(7)
for n in (1, 2):
    v, phi, q, k = ES.random_gs_case(rng, n)
    for h in (1 / 64, 1 / 128):
        X = ES.box_grid(n, h)
        r = ES.gs_inequality_check(v(*X), phi(*X), q, k, h)
        print(f"n={n} q={q:+.3f} k={k:+.3f} h=1/{round(1 / h)}: slack = {r.slack:+.4e}, "
              f"C_disc h^2 = {r.C_disc * h * h:.2e}, passed = {r.passed}")
