"""
Error probability vs. number of queries
=======================================

A desk-scale rerun of the headline experiment: resolution 2**12, linear
noise p(x) = 0.1 + 0.5 x, fixed-length stopping swept over query budgets.
The median rule pays for its unconstrained query sizes; the sorted, dyadic
and hierarchical rules all turn the corner once the budget passes
L / I(1/2, p_min) = 12 / 0.531 = 22.6 queries.

Writes ``error_vs_queries.csv`` next to this script (plot-ready).
"""

# %%
import csv
import pathlib

from noisysearch import (
    AffineNoise,
    FixedLength,
    SearchConfig,
    StrategyKind,
    mutual_info_bsc,
    sweep_error_vs_queries,
)

L = 12
TRIALS = 2000
BUDGETS = range(10, 61, 5)
profile = AffineNoise(0.1, 0.5)

capacity = mutual_info_bsc(0.5, 0.1)
print(f"acquisition capacity I(1/2, 0.1) = {capacity:.3f}")
print(f"expected corner near {L / capacity:.1f} queries\n")

# %%
# Shared seeds make the curves comparable point by point.

curves = {}
for kind in StrategyKind:
    cfg = SearchConfig(
        L=L, strategy=kind, profile=profile,
        stopping=FixedLength(max(BUDGETS)), seed=7,
    )
    curves[kind] = dict(sweep_error_vs_queries(cfg, BUDGETS, TRIALS, workers=2))
    tail = curves[kind][max(BUDGETS)]
    print(f"{kind.value:6s}: error at n=60 is {tail.error_rate:.4f}")

# %%
# Print the table and drop it as CSV.

header = ["n"] + [k.value for k in StrategyKind]
print("\n" + "  ".join(f"{h:>8s}" for h in header))
rows = []
for n in BUDGETS:
    row = [n] + [curves[k][n].error_rate for k in StrategyKind]
    rows.append(row)
    print("  ".join(f"{v:8.4f}" if isinstance(v, float) else f"{v:8d}" for v in row))

out = pathlib.Path(__file__).with_name("error_vs_queries.csv")
with out.open("w", newline="") as fh:
    writer = csv.writer(fh)
    writer.writerow(header)
    writer.writerows(rows)
print(f"\nwrote {out}")
