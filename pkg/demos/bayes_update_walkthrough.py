"""
Tracking the posterior with interval partitions
===============================================

When every query is a contiguous interval, the posterior over the target bin
stays piecewise constant: each query adds at most two cut points, so after t
queries the belief is described by at most 2t + 1 intervals, no matter how
many bins the search space has.  This script walks through a few updates and
shows the partition tracking the dense vector exactly.
"""

# %%
# Setup: 16 bins, linear size-dependent noise p(x) = 0.1 + 0.5 x.

import numpy as np

from noisysearch import (
    AffineNoise,
    PosteriorDense,
    PosteriorPartition,
    QuerySet,
    bayes_update_dense,
    bayes_update_partition,
    flatten,
)

profile = AffineNoise(0.1, 0.5)
n = 16

dense = PosteriorDense.uniform(n)
part = PosteriorPartition.uniform(n)
print(f"prior: {part.n_intervals} interval, mass {part.mass.sum():.3f}")

# %%
# Query the middle third and observe y = 1.  A query covering 6 of 16 bins
# sees crossover probability p(6/16) = 0.2875: the answer leans toward the
# truth but lies fairly often.

query = QuerySet.from_run(6, 11)
dense = bayes_update_dense(dense, query, 1, profile)
part = bayes_update_partition(part, query, 1, profile)

print("after querying [6, 11], y=1:")
for lo, hi, mass in part.intervals:
    print(f"  bins {lo:2d}..{hi:2d}  mass {mass:.4f}")

# %%
# A second, overlapping query.  The partition splits only where the new
# endpoints cut existing intervals.

query = QuerySet.from_run(9, 16)
dense = bayes_update_dense(dense, query, 0, profile)
part = bayes_update_partition(part, query, 0, profile)

print("after querying [9, 16], y=0:")
for lo, hi, mass in part.intervals:
    print(f"  bins {lo:2d}..{hi:2d}  mass {mass:.4f}")
print(f"intervals: {part.n_intervals} (bound after 2 queries: 5)")

# %%
# The flattened partition matches the dense chain bin for bin.

gap = np.max(np.abs(flatten(part).mass - dense.mass))
print(f"max |partition - dense| = {gap:.2e}")

# %%
# Run a longer random chain and watch the interval count stay under 2t + 1.

rng = np.random.default_rng(0)
part = PosteriorPartition.uniform(256)
for t in range(1, 21):
    s1 = int(rng.integers(1, 257))
    s2 = int(rng.integers(s1, 257))
    y = int(rng.integers(0, 2))
    part = bayes_update_partition(part, QuerySet.from_run(s1, s2), y, profile)
    print(f"t={t:2d}  intervals={part.n_intervals:3d}  bound={2 * t + 1}")
