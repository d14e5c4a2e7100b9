"""Blow-up of y' = f(y): time, profile and the rate ρ = (f(y)/y)(T - t)."""
# %%
import numpy as np

from liouville_lab import ode_blowup as OB
from liouville_lab.nonlinearity import parse_nonlinearity

# %% [markdown]
# For a pure power the blow-up time from y0 = 1 is 1/(p-1) and ρ is constant.

# %%
for p in (1.5, 2.0, 3.0):
    f = parse_nonlinearity(f"pow(s,{p})")
    rc = OB.verify_rate(f, 1.0, decades=8.0)
    print(f"s^{p}: T = {rc.profile.T:.15f}, rho in [{rc.rho_min:.12f}, {rc.rho_max:.12f}]")

# %% [markdown]
# A logarithmic factor changes T but not the limit of ρ, which tends to
# 1/(m-1) for a regularly varying f of index m.

# %%
f = parse_nonlinearity("pow(s,2)*log(2+s)")
rc = OB.verify_rate(f, 1.0, decades=10.0, count=11)
tau = rc.profile.tau
for t, r in zip(tau, rc.profile.rho):
    print(f"T - t = {t:9.3e}   rho = {r:.6f}")

# %% [markdown]
# The inversion-based profile agrees with a direct high-order integration.

# %%
print("max gap to DOP853:", OB.rk_crosscheck(f, 1.0))
print("H(10) =", OB.H_value(f, 10.0), " H on a grid:", np.round(OB.H_grid(f, [1.0, 1e3, 1e6]), 8))
