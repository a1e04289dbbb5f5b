"""Search episodes and Monte Carlo experiments.

An episode runs the closed loop select-query / observe / Bayes-update until
the stopping rule fires: fixed-length stops after exactly ``n`` queries,
variable-length stops once the largest posterior entry exceeds ``1 - eps``.
The declared estimate is the posterior argmax.

Reproducibility: trial ``i`` of a run seeded with ``s`` draws from a Philox
counter-based generator keyed by ``s`` with its counter advanced to block
``i``, so streams never overlap, results do not depend on the worker count,
and any single trial can be replayed in isolation.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np

from .channel import NoiseProfile, noise_for_size, sample_observation
from .errors import CapExceededError, ContractViolationError
from .posterior import (
    Posterior,
    PosteriorDense,
    PosteriorPartition,
    _likelihoods,
    _reweight_dense,
    _update_partition_lists,
)
from .strategies import StrategyKind, _PartitionPrefix, _run_for, _sort_pm_member_indices

__all__ = [
    "FixedLength",
    "VariableLength",
    "StoppingRule",
    "SearchConfig",
    "EpisodeRecord",
    "MonteCarloSummary",
    "trial_rng",
    "run_episode",
    "run_monte_carlo",
    "sweep_error_vs_queries",
    "episode_final_posterior",
    "wilson_interval",
]

STEP_CAP = 10**6
_WILSON_Z95 = 1.959963984540054


@dataclass(frozen=True)
class FixedLength:
    n: int

    def __post_init__(self) -> None:
        if not (1 <= self.n <= STEP_CAP):
            raise ValueError(f"fixed length must be in 1..{STEP_CAP}, got {self.n}")


@dataclass(frozen=True)
class VariableLength:
    epsilon: float

    def __post_init__(self) -> None:
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")


StoppingRule = Union[FixedLength, VariableLength]


@dataclass(frozen=True)
class SearchConfig:
    """One fully-specified search experiment.

    ``L`` is the resolution exponent (2**L bins); ``target`` fixes the true
    bin, or draws it uniformly per episode when ``None``.
    """

    L: int
    strategy: StrategyKind
    profile: NoiseProfile
    stopping: StoppingRule
    seed: int
    target: Optional[int] = None

    def __post_init__(self) -> None:
        if self.L < 0:
            raise ValueError(f"L must be >= 0, got {self.L}")
        if self.target is not None and not (1 <= self.target <= self.n_bins):
            raise ValueError(f"target must be in 1..{self.n_bins}, got {self.target}")

    @property
    def n_bins(self) -> int:
        return 1 << self.L


@dataclass(frozen=True)
class EpisodeRecord:
    """One search trajectory."""

    tau: int
    estimate: int
    truth: int
    correct: bool
    query_sizes: tuple[float, ...]
    ops: int = 0
    max_posterior_trace: Optional[tuple[float, ...]] = None
    checkpoint_estimates: Optional[tuple[int, ...]] = None


@dataclass(frozen=True)
class MonteCarloSummary:
    trials: int
    errors: int
    error_rate: float
    error_lo: float
    error_hi: float
    mean_tau: float
    empirical_rate: float
    empirical_reliability: Optional[float]


def wilson_interval(successes: int, trials: int, z: float = _WILSON_Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Chosen over the Wald interval for its coverage at proportions near 0,
    which is exactly the regime of low error rates.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not (0 <= successes <= trials):
        raise ValueError(f"successes must be in 0..{trials}, got {successes}")
    p_hat = successes / trials
    z2n = z * z / trials
    center = (p_hat + z2n / 2.0) / (1.0 + z2n)
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / trials + z2n / (4.0 * trials)) / (1.0 + z2n)
    lo = 0.0 if successes == 0 else max(center - half, 0.0)
    hi = 1.0 if successes == trials else min(center + half, 1.0)
    return lo, hi


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent per-trial stream: Philox keyed by the run seed, counter
    advanced to a disjoint 2**128-draw block per trial."""
    return np.random.Generator(
        np.random.Philox(key=seed % (1 << 64), counter=trial_index << 128)
    )


def _lemma_bound_check(n_intervals: int, steps_done: int) -> None:
    if n_intervals > 2 * steps_done + 1:
        raise ContractViolationError(
            f"partition has {n_intervals} intervals after {steps_done} connected "
            f"queries, exceeding {2 * steps_done + 1}"
        )


def _max_density(los: list, his: list, masses: list) -> tuple[float, int]:
    """(max single-bin mass, 1-based bin index of its first occurrence)."""
    best = -1.0
    best_lo = 1
    for u in range(len(masses)):
        d = masses[u] / (his[u] - los[u] + 1)
        if d > best:
            best = d
            best_lo = los[u]
    return best, best_lo


def _run(
    config: SearchConfig,
    rng: np.random.Generator,
    trace: bool,
    checkpoints: Optional[tuple[int, ...]],
) -> tuple[EpisodeRecord, Posterior]:
    n = config.n_bins
    profile = config.profile
    kind = config.strategy
    dense = kind is StrategyKind.SORT_PM

    if config.target is not None:
        truth = config.target
    else:
        truth = int(rng.integers(1, n + 1))

    if n == 1:
        # single-bin search: the prior is already certain
        rec = EpisodeRecord(
            tau=0, estimate=1, truth=truth, correct=truth == 1, query_sizes=(),
            ops=0, max_posterior_trace=(1.0,) if trace else None,
            checkpoint_estimates=tuple(1 for _ in checkpoints) if checkpoints else None,
        )
        return rec, PosteriorDense.uniform(1) if dense else PosteriorPartition.uniform(1)

    fl_n = config.stopping.n if isinstance(config.stopping, FixedLength) else None
    vl_threshold = (
        1.0 - config.stopping.epsilon
        if isinstance(config.stopping, VariableLength)
        else None
    )
    if checkpoints is not None and fl_n is None:
        raise ValueError("checkpoints require fixed-length stopping")

    mass_vec = np.full(n, 1.0 / n) if dense else None
    los, his, masses = [1], [n], [1.0]
    depth = config.L
    theta0 = truth - 1
    sizes: list[float] = []
    max_trace: list[float] = [] if trace else None
    cp_estimates: list[int] = [] if checkpoints is not None else None
    ops = 0
    tau = 0

    for t in range(STEP_CAP):
        if dense:
            members = _sort_pm_member_indices(mass_vec)
            frac = members.size / n
            j = int(np.searchsorted(members, theta0))
            member = j < members.size and int(members[j]) == theta0
            y = sample_observation(profile, member, frac, rng)
            p = noise_for_size(profile, frac)
            mass_vec = _reweight_dense(mass_vec, members, y, p)
            ops += n
            estimate = int(np.argmax(mass_vec)) + 1
            peak = float(mass_vec[estimate - 1])
        else:
            idx = _PartitionPrefix(los, his, masses, n)
            s1, s2 = _run_for(kind, idx, depth)
            frac = (s2 - s1 + 1) / n
            member = s1 <= truth <= s2
            y = sample_observation(profile, member, frac, rng)
            in_lik, out_lik = _likelihoods(y, noise_for_size(profile, frac))
            los, his, masses = _update_partition_lists(
                los, his, masses, s1, s2, in_lik, out_lik
            )
            _lemma_bound_check(len(los), t + 1)
            ops += len(los)
            peak, estimate = _max_density(los, his, masses)
        tau = t + 1
        sizes.append(frac)
        if trace:
            max_trace.append(peak)
        if cp_estimates is not None and tau in checkpoints:
            cp_estimates.append(estimate)
        if fl_n is not None and tau == fl_n:
            break
        if vl_threshold is not None and peak > vl_threshold:
            break
    else:
        raise CapExceededError(f"episode exceeded {STEP_CAP} steps without stopping")

    if dense:
        post: Posterior = PosteriorDense._wrap(mass_vec)
    else:
        post = PosteriorPartition._wrap(
            np.array(los, dtype=np.int64), np.array(his, dtype=np.int64), np.array(masses)
        )
    rec = EpisodeRecord(
        tau=tau,
        estimate=estimate,
        truth=truth,
        correct=estimate == truth,
        query_sizes=tuple(sizes),
        ops=ops,
        max_posterior_trace=tuple(max_trace) if trace else None,
        checkpoint_estimates=tuple(cp_estimates) if cp_estimates is not None else None,
    )
    return rec, post


def run_episode(
    config: SearchConfig,
    rng: np.random.Generator,
    *,
    trace: bool = False,
    checkpoint_steps: Optional[Sequence[int]] = None,
) -> EpisodeRecord:
    """Run one search episode to completion.

    With ``checkpoint_steps`` (fixed-length runs only), the posterior argmax
    is also recorded after each listed step, which is exactly what a shorter
    fixed-length run with the same stream would declare: a length-n episode
    contains every shorter one as a prefix.
    """
    cps = None
    if checkpoint_steps is not None:
        cps = tuple(sorted(set(int(s) for s in checkpoint_steps)))
        if not cps or cps[0] < 1:
            raise ValueError("checkpoint steps must be positive")
        if not isinstance(config.stopping, FixedLength) or cps[-1] > config.stopping.n:
            raise ValueError("checkpoints must lie within a fixed-length horizon")
    rec, _ = _run(config, rng, trace, cps)
    return rec


def episode_final_posterior(config: SearchConfig, trial_index: int = 0) -> Posterior:
    """Replay one trial and return its final posterior (debugging aid)."""
    _, post = _run(config, trial_rng(config.seed, trial_index), False, None)
    return post


def _mc_range(config: SearchConfig, start: int, stop: int) -> tuple[int, int]:
    errors = 0
    tau_sum = 0
    for i in range(start, stop):
        rec, _ = _run(config, trial_rng(config.seed, i), False, None)
        errors += not rec.correct
        tau_sum += rec.tau
    return errors, tau_sum


def _sweep_range(
    config: SearchConfig, ns: tuple[int, ...], start: int, stop: int
) -> np.ndarray:
    errors = np.zeros(len(ns), dtype=np.int64)
    sweep_config = replace(config, stopping=FixedLength(ns[-1]))
    for i in range(start, stop):
        rec, _ = _run(config=sweep_config, rng=trial_rng(config.seed, i), trace=False, checkpoints=ns)
        for k, est in enumerate(rec.checkpoint_estimates):
            errors[k] += est != rec.truth
    return errors


def _chunk_bounds(trials: int, workers: int) -> list[tuple[int, int]]:
    chunks = min(max(workers, 1) * 4, trials)
    edges = np.linspace(0, trials, chunks + 1, dtype=int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _summarize(config: SearchConfig, trials: int, errors: int, tau_sum: float) -> MonteCarloSummary:
    error_rate = errors / trials
    lo, hi = wilson_interval(errors, trials)
    mean_tau = tau_sum / trials
    empirical_rate = config.L / mean_tau if mean_tau > 0 else math.inf
    reliability = None
    if errors > 0 and mean_tau > 0:
        reliability = math.log2(1.0 / error_rate) / mean_tau
    return MonteCarloSummary(
        trials=trials,
        errors=errors,
        error_rate=error_rate,
        error_lo=lo,
        error_hi=hi,
        mean_tau=mean_tau,
        empirical_rate=empirical_rate,
        empirical_reliability=reliability,
    )


def run_monte_carlo(config: SearchConfig, trials: int, workers: int = 1) -> MonteCarloSummary:
    """Independent episodes with per-trial substreams; aggregates error rate,
    mean stopping time, and the empirical rate/reliability pair.

    The outcome is identical for any ``workers`` value: trial streams are
    independent of scheduling and the reduction is in trial order over
    integer counters.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if workers <= 1:
        errors, tau_sum = _mc_range(config, 0, trials)
    else:
        errors = 0
        tau_sum = 0
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_mc_range, config, a, b) for a, b in _chunk_bounds(trials, workers)
            ]
            for fut in futures:
                e, ts = fut.result()
                errors += e
                tau_sum += ts
    return _summarize(config, trials, errors, tau_sum)


def sweep_error_vs_queries(
    config: SearchConfig, n_values: Sequence[int], trials: int, workers: int = 1
) -> list[tuple[int, MonteCarloSummary]]:
    """Fixed-length error rates over a grid of query budgets.

    All budgets share the per-trial random streams (each trial is run once to
    the largest budget and read off at every checkpoint), so the resulting
    curves are directly comparable point by point.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ns = tuple(sorted(set(int(v) for v in n_values)))
    if not ns or ns[0] < 1:
        raise ValueError("n_values must be non-empty positive integers")
    if workers <= 1:
        errors = _sweep_range(config, ns, 0, trials)
    else:
        errors = np.zeros(len(ns), dtype=np.int64)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_sweep_range, config, ns, a, b)
                for a, b in _chunk_bounds(trials, workers)
            ]
            for fut in futures:
                errors += fut.result()
    return [
        (n, _summarize(config, trials, int(err), float(n) * trials))
        for n, err in zip(ns, errors)
    ]
