"""Radial shooting for -Δv = f(v): crossings, ground states and a threshold sweep."""
# %%
import numpy as np

from liouville_lab import elliptic_radial as ER
from liouville_lab.nonlinearity import build_example, parse_nonlinearity

# %% [markdown]
# At the Sobolev power in three dimensions the shot from v(0) = 1 follows
# the closed-form ground state (1 + r²/3)^(-1/2).

# %%
shot = ER.shoot(parse_nonlinearity("pow(s,5)"), 3, 1.0, r_max=100.0)
r = np.array([0.5, 1.0, 10.0, 100.0])
print(shot.outcome, np.max(np.abs(shot.at(r) / (1 + r ** 2 / 3) ** -0.5 - 1)))

# %% [markdown]
# Below the Sobolev power every shot crosses zero, so no positive entire solution is found.

# %%
for text in ("pow(s,3)", "pow(s,3)*log(2+s)", "pow(s,2)*log(2+s)"):
    s = ER.entire_solution_search(parse_nonlinearity(text), 3, [0.1, 1.0, 10.0])
    print(f"{text:20s}", {v0: o["outcome"] for v0, o in s.outcomes.items()})

# %% [markdown]
# A logarithmic factor of high enough power lets a positive solution exist.

# %%
f = build_example("power_log_entire", p=5.0, q=1.0, K=1.0, n=3)
print(f, ER.entire_solution_search(f, 3, [0.1, 1.0, 10.0]).to_dict()["existence_corroborated"])

# %% [markdown]
# Bisect on the log exponent a in s^3 log^a(1+s) for the onset of a positive shot.

# %%
lo, hi = 0.0, 4.0
for _ in range(10):
    mid = 0.5 * (lo + hi)
    f = parse_nonlinearity("pow(s,3)*pow(log(1+s),a)", {"a": mid})
    if ER.entire_solution_search(f, 3, [0.1, 1.0, 10.0]).existence_corroborated:
        hi = mid
    else:
        lo = mid
print(f"threshold in [{lo:.4f}, {hi:.4f}] for this v0 grid and r_max = 1e3")
