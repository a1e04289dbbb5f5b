"""
What the four query rules actually ask
======================================

All four rules steer the next query toward posterior mass 1/2; they differ
in which sets they are allowed to use.  This script applies each rule to the
same beliefs and prints the chosen sets, their sizes, and the noise level
each query would suffer.
"""

# %%
import numpy as np

from noisysearch import (
    AffineNoise,
    PosteriorDense,
    StrategyKind,
    ejs_divergence,
    heaviest_node,
    noise_for_size,
    query_mass,
    select,
)

profile = AffineNoise(0.1, 0.5)
n = 16


def show(post):
    for kind in StrategyKind:
        qs = select(kind, post)
        rho = query_mass(post, qs)
        p = noise_for_size(profile, qs.size_fraction(n))
        ejs = ejs_divergence(post, qs, profile)
        print(
            f"  {kind.value:6s} -> {str(qs.runs):24s} |S|={qs.cardinality:2d} "
            f"mass={rho:.3f} p={p:.3f} EJS={ejs:.3f}"
        )


# %%
# From the uniform prior every rule halves the space.

print("uniform prior:")
show(PosteriorDense.uniform(n))

# %%
# A belief concentrated near the right edge.  The median rule still queries
# a prefix, which must stretch most of the way across the space (worst-case
# noise); the sorted rule cherry-picks heavy bins regardless of position;
# the tree rules stay contiguous but anchored to the heavy dyadic node.

mass = np.ones(n)
mass[12] = 30.0
mass[13] = 10.0
post = PosteriorDense(mass / mass.sum())
print("concentrated near the right edge:")
show(post)
print(f"  heaviest >=1/2 node: {heaviest_node(post, 4)}")

# %%
# A bimodal belief with a quarter of the mass on each mode: the sorted rule
# unites the two modes into one (disconnected) query of two bins; the
# connected rules cannot, and fall back to querying half the space.

mass = np.ones(n) * 0.2
mass[2] = 1.4
mass[11] = 1.4
post = PosteriorDense(mass / mass.sum())
print("bimodal belief:")
show(post)
