"""Regular and controlled variation of nonlinearities."""
# %%
from liouville_lab import classification as C
from liouville_lab.nonlinearity import build_example, parse_nonlinearity, slow_variation_catalog

# %% [markdown]
# s^p times a slowly varying factor has index p, at infinity and at zero.

# %%
for kind, f in slow_variation_catalog(2.0).items():
    at_inf = C.estimate_rv_index(f, "inf", deep=True)
    at_0 = C.estimate_rv_index(f, "0", deep=True)
    print(f"{kind:>10}: {str(f):45s} index(inf) = {at_inf.index:.4f}, index(0) = {at_0.index:.4f}")

# %% [markdown]
# An exponent that oscillates on a log-log scale is not regularly varying,
# but its ratios f(λs)/f(λ) stay bounded away from zero.

# %%
f = build_example("oscillating_exponent", p=2.0, a=0.5)
print(f, "->", C.estimate_rv_index(f).verdict, "/",
      C.controlled_variation_inf(f).verdict, "/", C.classify(f).verdict)

# %% [markdown]
# A toggling exponent breaks controlled variation; the report carries a witness.

# %%
cv = C.controlled_variation_inf(build_example("toggle", p=2.0, a=1.0))
print("toggle:", cv.verdict, cv.witness)

# %% [markdown]
# The hypothesis check bundles the growth, superlinearity and monotone-quotient conditions.

# %%
for text in ("pow(s,2)*log(2+s)", "pow(s,3)", "s"):
    rep = C.liouville_hypothesis_check(parse_nonlinearity(text), 3)
    print(f"{text:20s} {rep.verdict}")
