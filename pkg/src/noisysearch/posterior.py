"""Posterior representations and the Bayes update.

The belief over the target bin lives in one of two interchangeable forms:

* :class:`PosteriorDense` — a length-``n`` probability vector, one entry per
  bin.  Used by the sorted-matching strategy, whose query sets are arbitrary
  unions of runs.

* :class:`PosteriorPartition` — an interval-piecewise-constant simple
  function.  When every query is a single contiguous interval, each update
  adds at most two cut points, so after ``t`` steps the partition has at most
  ``2t + 1`` intervals.  This is what makes the connected-geometry strategies
  cheap: tracking the posterior costs O(number of queries), not O(number of
  bins).

Bins are indexed 1..n throughout the public API; intervals are inclusive
``(lo, hi)`` pairs.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .channel import NoiseProfile, noise_for_size
from .errors import ContractViolationError, ZeroLikelihoodError

__all__ = [
    "QuerySet",
    "PosteriorDense",
    "PosteriorPartition",
    "Posterior",
    "bayes_update_dense",
    "bayes_update_partition",
    "flatten",
    "prefix_mass",
    "query_mass",
    "posterior_predictive",
    "avg_log_likelihood",
]

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class QuerySet:
    """A query set: a sorted union of disjoint, non-adjacent index runs."""

    runs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not self.runs:
            raise ValueError("query set must be non-empty")
        prev_hi = -1
        for lo, hi in self.runs:
            if lo < 1 or hi < lo:
                raise ValueError(f"bad run ({lo}, {hi})")
            if lo <= prev_hi + 1:
                raise ValueError(f"runs must be sorted and non-adjacent, got {self.runs}")
            prev_hi = hi

    @classmethod
    def from_run(cls, lo: int, hi: int) -> "QuerySet":
        return cls(((int(lo), int(hi)),))

    @classmethod
    def from_indices(cls, indices: Iterable[int]) -> "QuerySet":
        """Build from individual bin indices, merging adjacent ones into runs."""
        idx = np.unique(np.asarray(list(indices), dtype=np.int64))
        if idx.size == 0:
            raise ValueError("query set must be non-empty")
        breaks = np.flatnonzero(np.diff(idx) > 1)
        starts = np.concatenate(([0], breaks + 1))
        ends = np.concatenate((breaks, [idx.size - 1]))
        return cls(tuple((int(idx[s]), int(idx[e])) for s, e in zip(starts, ends)))

    @property
    def cardinality(self) -> int:
        return sum(hi - lo + 1 for lo, hi in self.runs)

    @property
    def is_contiguous(self) -> bool:
        return len(self.runs) == 1

    @property
    def single_run(self) -> tuple[int, int]:
        if not self.is_contiguous:
            raise ContractViolationError(f"query is not a single interval: {self.runs}")
        return self.runs[0]

    def size_fraction(self, n_bins: int) -> float:
        return self.cardinality / n_bins

    def member_mask(self, n_bins: int) -> np.ndarray:
        """Boolean membership vector of length ``n_bins`` (0-based storage)."""
        if self.runs[-1][1] > n_bins:
            raise ValueError(f"query {self.runs} exceeds range 1..{n_bins}")
        mask = np.zeros(n_bins, dtype=bool)
        for lo, hi in self.runs:
            mask[lo - 1 : hi] = True
        return mask


@dataclass(frozen=True)
class PosteriorDense:
    """Probability vector over bins 1..n."""

    mass: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.mass, dtype=np.float64, copy=True)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("mass must be a non-empty 1-D vector")
        if np.any(arr < 0.0):
            raise ValueError("posterior entries must be non-negative")
        if abs(float(arr.sum()) - 1.0) > _SUM_TOL:
            raise ValueError(f"posterior must sum to 1 within {_SUM_TOL}, got {arr.sum()!r}")
        arr.flags.writeable = False
        object.__setattr__(self, "mass", arr)

    @classmethod
    def uniform(cls, n_bins: int) -> "PosteriorDense":
        return cls(np.full(n_bins, 1.0 / n_bins))

    @classmethod
    def _wrap(cls, mass: np.ndarray) -> "PosteriorDense":
        """Adopt a freshly-computed, already-valid vector without copying."""
        self = object.__new__(cls)
        mass.flags.writeable = False
        object.__setattr__(self, "mass", mass)
        return self

    @property
    def n_bins(self) -> int:
        return int(self.mass.size)

    @property
    def max_mass(self) -> float:
        return float(self.mass.max())

    @property
    def argmax(self) -> int:
        """Index (1-based) of the largest entry; ties go to the smaller index."""
        return int(np.argmax(self.mass)) + 1


@dataclass(frozen=True)
class PosteriorPartition:
    """Interval-piecewise-constant posterior.

    ``lo``/``hi`` are inclusive 1-based endpoints; intervals are sorted,
    disjoint and contiguous, covering 1..n.  ``mass[u]`` is the total mass of
    interval ``u``; the per-bin density inside it is ``mass[u] / width(u)``.
    """

    lo: np.ndarray
    hi: np.ndarray
    mass: np.ndarray

    def __post_init__(self) -> None:
        lo = np.array(self.lo, dtype=np.int64, copy=True)
        hi = np.array(self.hi, dtype=np.int64, copy=True)
        mass = np.array(self.mass, dtype=np.float64, copy=True)
        if not (lo.ndim == hi.ndim == mass.ndim == 1) or lo.size == 0:
            raise ValueError("lo/hi/mass must be non-empty 1-D arrays")
        if not (lo.size == hi.size == mass.size):
            raise ValueError("lo/hi/mass must have equal length")
        if lo[0] != 1:
            raise ValueError("first interval must start at bin 1")
        if np.any(hi < lo):
            raise ValueError("intervals must satisfy lo <= hi")
        if np.any(lo[1:] != hi[:-1] + 1):
            raise ValueError("intervals must be contiguous and sorted")
        if np.any(mass < 0.0):
            raise ValueError("interval masses must be non-negative")
        if abs(float(mass.sum()) - 1.0) > _SUM_TOL:
            raise ValueError(f"masses must sum to 1 within {_SUM_TOL}, got {mass.sum()!r}")
        for name, arr in (("lo", lo), ("hi", hi), ("mass", mass)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def uniform(cls, n_bins: int) -> "PosteriorPartition":
        return cls(np.array([1]), np.array([n_bins]), np.array([1.0]))

    @classmethod
    def _wrap(cls, lo: np.ndarray, hi: np.ndarray, mass: np.ndarray) -> "PosteriorPartition":
        """Adopt freshly-computed, already-valid arrays without copying.

        Used on the per-step path, where outputs of the update preserve the
        structural invariants by construction.
        """
        self = object.__new__(cls)
        for name, arr in (("lo", lo), ("hi", hi), ("mass", mass)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        return self

    @classmethod
    def from_intervals(cls, intervals: Iterable[tuple[int, int, float]]) -> "PosteriorPartition":
        rows = list(intervals)
        return cls(
            np.array([r[0] for r in rows]),
            np.array([r[1] for r in rows]),
            np.array([r[2] for r in rows]),
        )

    @property
    def n_bins(self) -> int:
        return int(self.hi[-1])

    @property
    def n_intervals(self) -> int:
        return int(self.lo.size)

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo + 1

    @property
    def densities(self) -> np.ndarray:
        return self.mass / self.widths

    @property
    def intervals(self) -> list[tuple[int, int, float]]:
        return [
            (int(a), int(b), float(m)) for a, b, m in zip(self.lo, self.hi, self.mass)
        ]

    @property
    def max_mass(self) -> float:
        """Largest single-bin posterior value (max density)."""
        return float(self.densities.max())

    @property
    def argmax(self) -> int:
        """1-based bin index of the largest density; ties go to the smallest bin."""
        return int(self.lo[int(np.argmax(self.densities))])


Posterior = Union[PosteriorDense, PosteriorPartition]


def _likelihoods(y: int, p: float) -> tuple[float, float]:
    """(likelihood inside query, likelihood outside) for observation ``y``."""
    if y not in (0, 1):
        raise ValueError(f"observation must be 0 or 1, got {y}")
    if y == 1:
        return 1.0 - p, p
    return p, 1.0 - p


def _reweight_dense(mass: np.ndarray, member_idx: np.ndarray, y: int, p: float) -> np.ndarray:
    """Core dense Bayes step: reweight by the channel likelihood and normalize."""
    in_lik, out_lik = _likelihoods(y, p)
    lik = np.full(mass.size, out_lik)
    lik[member_idx] = in_lik
    new = mass * lik
    total = float(new.sum())
    if total <= 0.0:
        raise ZeroLikelihoodError("all posterior mass has zero likelihood")
    new /= total
    return new


def bayes_update_dense(
    post: PosteriorDense, query: QuerySet, y: int, profile: NoiseProfile
) -> PosteriorDense:
    """One Bayes step on the dense vector."""
    n = post.n_bins
    p = noise_for_size(profile, query.size_fraction(n))
    members = np.flatnonzero(query.member_mask(n))
    return PosteriorDense._wrap(_reweight_dense(post.mass, members, y, p))


def _insert_boundary_lists(
    los: list, his: list, masses: list, b: int
) -> tuple[list, list, list]:
    """Split so that some interval starts at bin ``b``; no-op if one already does.

    The straddling interval's mass is divided proportionally to the
    sub-interval widths.  Degenerate cuts at the ends of the range are
    dropped, never stored with zero width.
    """
    if b <= los[0] or b > his[-1]:
        return los, his, masses
    j = bisect_right(los, b) - 1
    if los[j] == b:
        return los, his, masses
    width = his[j] - los[j] + 1
    m = masses[j]
    left_m = m * ((b - los[j]) / width)
    right_m = m * ((his[j] - b + 1) / width)
    return (
        los[: j + 1] + [b] + los[j + 1 :],
        his[:j] + [b - 1] + his[j:],
        masses[:j] + [left_m, right_m] + masses[j + 1 :],
    )


def _update_partition_lists(
    los: list, his: list, masses: list, s1: int, s2: int, in_lik: float, out_lik: float
) -> tuple[list, list, list]:
    """Core sequential-binning Bayes step on plain lists (the hot path)."""
    los, his, masses = _insert_boundary_lists(los, his, masses, s1)
    los, his, masses = _insert_boundary_lists(los, his, masses, s2 + 1)
    i1 = bisect_left(los, s1)
    i2 = bisect_left(his, s2)
    new = [0.0] * len(masses)
    total = 0.0
    for u in range(len(masses)):
        v = masses[u] * (in_lik if i1 <= u <= i2 else out_lik)
        new[u] = v
        total += v
    if total <= 0.0:
        raise ZeroLikelihoodError("all posterior mass has zero likelihood")
    for u in range(len(new)):
        new[u] /= total
    return los, his, new


def bayes_update_partition(
    post: PosteriorPartition, query: QuerySet, y: int, profile: NoiseProfile
) -> PosteriorPartition:
    """One Bayes step with sequential binning.

    Cuts the partition at the query endpoints so the query interval is a
    union of whole intervals (adding at most two intervals), then reweights
    interval masses by the channel likelihood and renormalizes.  Requires a
    contiguous query.
    """
    s1, s2 = query.single_run
    n = post.n_bins
    if s2 > n:
        raise ValueError(f"query {query.runs} exceeds range 1..{n}")
    p = noise_for_size(profile, query.size_fraction(n))
    in_lik, out_lik = _likelihoods(y, p)
    los, his, masses = _update_partition_lists(
        post.lo.tolist(), post.hi.tolist(), post.mass.tolist(), s1, s2, in_lik, out_lik
    )
    return PosteriorPartition._wrap(
        np.array(los, dtype=np.int64), np.array(his, dtype=np.int64), np.array(masses)
    )


def flatten(post: PosteriorPartition) -> PosteriorDense:
    """Expand to the dense per-bin density vector."""
    return PosteriorDense._wrap(np.repeat(post.densities, post.widths))


def prefix_mass(post: Posterior, k: int) -> float:
    """Total mass of bins 1..k, for either representation."""
    n = post.n_bins
    if not (1 <= k <= n):
        raise ValueError(f"k must be in 1..{n}, got {k}")
    if isinstance(post, PosteriorDense):
        return float(post.mass[:k].sum())
    j = int(np.searchsorted(post.hi, k, side="left"))
    full = float(post.mass[:j].sum())
    frac = (k - int(post.lo[j]) + 1) / float(post.hi[j] - post.lo[j] + 1)
    return full + float(post.mass[j]) * frac


def query_mass(post: Posterior, query: QuerySet) -> float:
    """Total posterior mass inside a query set."""
    if isinstance(post, PosteriorDense):
        return float(post.mass[query.member_mask(post.n_bins)].sum())
    total = 0.0
    for lo, hi in query.runs:
        total += prefix_mass(post, hi)
        if lo > 1:
            total -= prefix_mass(post, lo - 1)
    return total


def posterior_predictive(
    post: Posterior, query: QuerySet, profile: NoiseProfile
) -> tuple[float, float]:
    """(P(Y=1), P(Y=0)) for the next observation under the current belief."""
    p = noise_for_size(profile, query.size_fraction(post.n_bins))
    rho = query_mass(post, query)
    p1 = rho * (1.0 - p) + (1.0 - rho) * p
    return p1, 1.0 - p1


def avg_log_likelihood(post: Union[PosteriorDense, np.ndarray]) -> float:
    """Average posterior log-likelihood U = sum_i pi_i log2(pi_i / (1 - pi_i)).

    Zero-mass entries contribute nothing; an entry equal to 1 makes the
    value +inf.
    """
    vec = post.mass if isinstance(post, PosteriorDense) else np.asarray(post, dtype=np.float64)
    pos = vec[vec > 0.0]
    if np.any(pos >= 1.0):
        return float("inf")
    return float(np.sum(pos * np.log2(pos / (1.0 - pos))))
