"""Monte Carlo samplers and exact small-instance oracles.

Per-trial randomness is derived from (master_seed, trial index), so any
execution order — serial, process pool, re-run of a single trial — yields
identical results for the same plan.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .codec import GenerationConfig, TrialRecord, run_trial
from .errors import ResourceLimitError
from .theory import ThresholdSpec

_QUANTILES = (0.01, 0.05, 0.25, 0.50, 0.75, 0.95, 0.99)


@dataclass(frozen=True)
class SamplePlan:
    """Trial count plus the master seed the per-trial seeds derive from."""

    trials: int
    master_seed: int | tuple[int, ...] = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        key = (self.master_seed,) if isinstance(self.master_seed, int) else tuple(self.master_seed)
        if any(not isinstance(v, int) or v < 0 for v in key):
            raise ValueError("master_seed must be a nonnegative int or tuple of them")
        object.__setattr__(self, "master_seed", key if len(key) > 1 else key[0])


def trial_rng(master_seed, index: int) -> np.random.Generator:
    """Generator for one trial; a pure function of (master_seed, index)."""
    key = (master_seed,) if isinstance(master_seed, int) else tuple(master_seed)
    return np.random.default_rng(np.random.SeedSequence((*key, index)))


@dataclass(frozen=True, eq=False)
class TrialSummary:
    """Sorted raw samples with their headline statistics."""

    samples: np.ndarray
    mean: float
    stderr: float

    @classmethod
    def from_samples(cls, values) -> "TrialSummary":
        arr = np.sort(np.asarray(values, dtype=float))
        if arr.size == 0:
            raise ValueError("no samples")
        sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        return cls(arr, float(arr.mean()), sd / math.sqrt(arr.size))

    @property
    def count(self) -> int:
        return int(self.samples.size)

    @property
    def min(self) -> float:
        return float(self.samples[0])

    @property
    def max(self) -> float:
        return float(self.samples[-1])

    def quantile(self, p: float) -> float:
        return float(np.quantile(self.samples, p))

    def ccdf(self, t: float) -> float:
        """Fraction of samples strictly greater than t."""
        return 1.0 - float(np.searchsorted(self.samples, t, side="right")) / self.samples.size

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "count": self.count,
            "min": self.min,
            "max": self.max,
            "quantiles": {f"p{int(100 * p):02d}": self.quantile(p) for p in _QUANTILES},
        }


def _map_trials(fn, trials: int, workers: int) -> list:
    if workers <= 1:
        return [fn(i) for i in range(trials)]
    chunk = max(1, trials // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials), chunksize=chunk))


# -- coupon-model samplers --------------------------------------------------


def _threshold_time_one(spec: ThresholdSpec, rng: np.random.Generator) -> int:
    """Exact stopping time of one trial: first draw at which, for every
    (k, m) pair, at least k coupon types have been seen m times."""
    n = spec.n
    pairs = spec.pairs
    m1 = pairs[0][1]
    guess = int(n * (math.log(n + 1.0) + 1.0) + 2.0 * n * m1) + 64
    draws = rng.integers(0, n, size=guess)
    while True:
        counts = np.bincount(draws, minlength=n)
        by_size = np.sort(counts)[::-1]
        if all(by_size[k - 1] >= m for k, m in pairs):
            break
        draws = np.concatenate([draws, rng.integers(0, n, size=draws.size)])
    # stable sort groups draws by coupon; the m-th occurrence of coupon c
    # sits at order[starts[c] + m - 1]
    order = np.argsort(draws, kind="stable")
    starts = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    stop = 0
    for k, m in pairs:
        have = np.nonzero(counts >= m)[0]
        times = order[starts[have] + (m - 1)]
        stop = max(stop, int(np.partition(times, k - 1)[k - 1]))
    return stop + 1


def _threshold_trial(spec: ThresholdSpec, master_seed, index: int) -> int:
    return _threshold_time_one(spec, trial_rng(master_seed, index))


def sample_threshold_times(spec: ThresholdSpec, plan: SamplePlan, workers: int = 1) -> TrialSummary:
    """Monte Carlo stopping times for a general threshold profile."""
    values = _map_trials(partial(_threshold_trial, spec, plan.master_seed), plan.trials, workers)
    return TrialSummary.from_samples(values)


def sample_collection_times(n: int, m: int, plan: SamplePlan, workers: int = 1) -> TrialSummary:
    """Monte Carlo draws until every one of n coupon types is held m times.

    Same trial-for-trial values as sample_threshold_times with the single
    pair (n, m) under the same plan.
    """
    return sample_threshold_times(ThresholdSpec(n, ((n, m),)), plan, workers)


# -- codec sampler ----------------------------------------------------------


def _codec_trial(config: GenerationConfig, master_seed, index: int) -> TrialRecord:
    return run_trial(config, trial_rng(master_seed, index))


def sample_codec_times(
    config: GenerationConfig,
    plan: SamplePlan,
    workers: int = 1,
    collect_records: bool = False,
):
    """Rank-only codec trials; returns the packet-count summary, and the
    per-trial records too when collect_records is set."""
    records = _map_trials(partial(_codec_trial, config, plan.master_seed), plan.trials, workers)
    summary = TrialSummary.from_samples([r.total_packets for r in records])
    return (summary, records) if collect_records else summary


# -- exact oracle and empirical curves ---------------------------------------


def markov_expected_time(spec: ThresholdSpec, state_cap: int = 10**6) -> float:
    """Exact expected stopping time of the threshold event.

    Solves the absorbing-chain system over coupon-count vectors capped at
    m_1 (higher counts cannot affect the event).  Transitions never decrease
    the capped total, so ordering states by decreasing total makes the
    system triangular and it is solved by one back-substitution sweep.
    """
    n = spec.n
    m1 = spec.pairs[0][1]
    base = m1 + 1
    nstates = base**n
    if nstates > state_cap:
        raise ResourceLimitError(f"{nstates} Markov states exceed the cap {state_cap}")

    ids = np.arange(nstates, dtype=np.int64)
    totals = np.zeros(nstates, dtype=np.int64)
    tmp = ids.copy()
    for _ in range(n):
        totals += tmp % base
        tmp //= base
    order = np.argsort(-totals, kind="stable")

    powers = [base**c for c in range(n)]
    pairs = spec.pairs
    expected = np.zeros(nstates)
    for sid in order:
        sid = int(sid)
        digits = []
        rem = sid
        for _ in range(n):
            digits.append(rem % base)
            rem //= base
        by_size = sorted(digits, reverse=True)
        if all(by_size[k - 1] >= m for k, m in pairs):
            continue
        acc = 0.0
        free = 0
        for c in range(n):
            if digits[c] < m1:
                free += 1
                acc += expected[sid + powers[c]]
        expected[sid] = (n + acc) / free
    return float(expected[0])


def empirical_failure_curve(summary: TrialSummary, t_grid) -> list[tuple[float, float]]:
    """Pointwise fraction of samples strictly above each grid value."""
    grid = np.asarray(t_grid, dtype=float)
    frac = 1.0 - np.searchsorted(summary.samples, grid, side="right") / summary.samples.size
    return [(float(t), float(f)) for t, f in zip(grid, frac)]
