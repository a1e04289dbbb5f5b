"""
Achievable rate-reliability trade-offs
======================================

How fast can a search zoom in (rate, bits of resolution per query) versus
how quickly can its error decay (reliability, bits per query)?  For the
linear noise profile p(x) = 0.1 + 0.5 x, the sorted and dyadic rules reach
the whole optimal segment; the hierarchical rule gives up a little rate; the
median rule is stuck with worst-case noise in both coordinates.
"""

# %%
from noisysearch import (
    AffineNoise,
    FrontierClass,
    StrategyKind,
    constant_k_d,
    constant_k_h,
    constant_k_s,
    rate_reliability_frontier,
    tau_upper_bound,
)

profile = AffineNoise(0.1, 0.5)

for cls in FrontierClass:
    pts = rate_reliability_frontier(profile, cls)
    r_max = max(r for r, _ in pts)
    e_max = max(e for _, e in pts)
    print(f"{cls.value:8s}: rate intercept {r_max:.4f}, reliability intercept {e_max:.4f}")

# %%
# The drift constants behind the bounds: strictly positive whenever the
# worst-case channel is usable, and tiny — they govern how fast query sets
# shrink, not the headline rate.

print(f"\nK_s = {constant_k_s(profile):.5f}")
print(f"K_h = {constant_k_h(profile):.5f}")
print(f"K_d = {constant_k_d(profile):.5f}")

# %%
# Assembled search-time bounds at a finite scale (delta = 2**-15,
# epsilon = 1e-3).  The residual term dominates at desk scale: these are
# sanity ceilings, not sharp predictions.

for kind in (StrategyKind.SORT_PM, StrategyKind.DYA_PM, StrategyKind.HIE_PM):
    rep = tau_upper_bound(kind, profile, 2.0**-15, 1e-3, 2.0**-6)
    print(
        f"{kind.value:5s}: tau <= {rep.tau_upper:8.1f} "
        f"(leading {15 / rep.rate_term:5.1f} + {rep.tau_upper - rep.residual - 15 / rep.rate_term:4.1f}, "
        f"residual {rep.residual:7.1f}; alpha floor {rep.floor:.3f})"
    )
