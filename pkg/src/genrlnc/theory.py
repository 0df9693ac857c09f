"""Collection-time formulas for coding over disjoint generations.

The receiver's progress maps onto sampling n coupon types uniformly with
replacement: a generation decodes once its decoder holds h independent
coding vectors, and the whole block decodes once every generation does.
This module provides

  * the per-generation law: expectation and distribution of the number of
    draws until h uniform GF(q) vectors reach full rank, with exponential
    bounds on the upper tail;
  * exact expected stopping times, by semi-infinite quadrature, for holding
    m copies of every coupon, m copies of at least k coupons, and general
    per-threshold profiles (at least k_1 types held m_1 times, at least
    k_2 held m_2 times, ...);
  * the large-n expansion of the stopping time, its Gumbel-type limit law,
    and the induced lower bound on the decoding-failure probability.

Everything here is a pure function of its arguments; quadrature-backed
results return a TheoryResult carrying a certified absolute error estimate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import ResourceLimitError
from .quadrature import IntegralTask, integrate

EULER_GAMMA = float(np.euler_gamma)


@dataclass(frozen=True)
class TheoryResult:
    value: float
    abs_error_estimate: float
    method: str  # "exact-sum" | "quadrature" | "asymptotic"


@dataclass(frozen=True)
class ThresholdSpec:
    """Collection targets over n coupon types.

    Each pair (k, m) demands at least m copies of at least k types; k values
    strictly increase and m values strictly decrease, so later pairs relax
    the copy count while widening the coverage.
    """

    n: int
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        pairs = tuple((int(k), int(m)) for k, m in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs:
            raise ValueError("at least one (k, m) pair is required")
        ks = [k for k, _ in pairs]
        ms = [m for _, m in pairs]
        if ks[0] < 1 or ks[-1] > self.n or any(a >= b for a, b in zip(ks, ks[1:])):
            raise ValueError(f"k values must satisfy 1 <= k_1 < ... < k_A <= n={self.n}")
        if ms[-1] < 1 or any(a <= b for a, b in zip(ms, ms[1:])):
            raise ValueError("m values must satisfy m_1 > ... > m_A >= 1")


# -- exponential partial sums and Poisson tails ----------------------------


def exp_partial_sum(m, x: float) -> float:
    """Sum of x^i/i! over i < m; exp(x) when m is math.inf, 0 when m == 0."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    if m == 0:
        return 0.0
    if m == math.inf:
        return math.exp(x)
    if m < 0 or m != int(m):
        raise ValueError("m must be 0, a positive integer, or math.inf")
    term = 1.0
    total = 1.0
    for i in range(1, int(m)):
        term *= x / i
        total += term
    return total


def poisson_tail(m: int, x: float) -> float:
    """Pr[Poisson(x) >= m], i.e. 1 - exp_partial_sum(m, x) e^{-x}.

    Uses the regularized lower incomplete gamma so large x does not go
    through a catastrophically cancelling subtraction.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if x < 0:
        raise ValueError("x must be nonnegative")
    return float(special.gammainc(m, x))


def _poisson_band(a: int, b: int, x: np.ndarray) -> np.ndarray:
    # Pr[a <= Poisson(x) < b] by direct pmf summation: positive terms only.
    out = np.zeros_like(x)
    pos = x > 0
    if pos.any():
        i = np.arange(a, b, dtype=float)
        lg = special.gammaln(i + 1)
        xp = x[pos]
        out[pos] = np.exp(i[:, None] * np.log(xp)[None, :] - xp[None, :] - lg[:, None]).sum(axis=0)
    if a == 0:
        out[~pos] = 1.0
    return out


# -- per-generation full-rank law ------------------------------------------


def _validate_qh(q: int, h: int) -> None:
    if q < 2:
        raise ValueError("q must be >= 2")
    if h < 1:
        raise ValueError("h must be >= 1")


def expected_draws_to_full_rank(q: int, h: int) -> TheoryResult:
    """Mean draws of uniform GF(q) vectors until an h-unknown system has
    full rank: sum_{j=1..h} 1/(1 - q^-j)."""
    _validate_qh(q, h)
    lnq = math.log(q)
    value = math.fsum(1.0 / -math.expm1(-j * lnq) for j in range(1, h + 1))
    return TheoryResult(value, 4 * np.finfo(float).eps * value, "exact-sum")


def expected_draws_to_full_rank_approx(q: int, h: int) -> float:
    """Integral upper approximation of expected_draws_to_full_rank:
    h + 1/(q-1) + log_q((1 - q^-h) / (1 - q^-1))."""
    _validate_qh(q, h)
    lnq = math.log(q)
    num = -math.expm1(-h * lnq)
    den = -math.expm1(-lnq)
    return h + 1.0 / (q - 1) + math.log(num / den) / lnq


def draws_to_full_rank_cdf(q: int, h: int, s: int) -> float:
    """Probability that s uniform GF(q) vectors of length h already have
    rank h: zero below s = h, then prod_{k<h} (1 - q^{k-s})."""
    _validate_qh(q, h)
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s < h:
        return 0.0
    lnq = math.log(q)
    return math.exp(math.fsum(math.log1p(-math.exp((k - s) * lnq)) for k in range(h)))


def alpha_constant(q: int, h: int) -> float:
    """-log of the full-rank probability at exactly h draws; the decay
    constant of the tail bound below."""
    _validate_qh(q, h)
    lnq = math.log(q)
    return -math.fsum(math.log1p(-math.exp(-j * lnq)) for j in range(1, h + 1))


@lru_cache(maxsize=1)
def alpha_binary_limit() -> float:
    """Limit of alpha_constant(2, h) as h grows; increments below 1e-15 stop
    the summation."""
    total = 0.0
    k = 1
    while True:
        inc = -math.log1p(-math.exp(-k * math.log(2.0)))
        total += inc
        if inc < 1e-15:
            return total
        k += 1


def draws_to_full_rank_ccdf_bounds(q: int, h: int, s: int) -> tuple[float, float, float]:
    """Exact upper-tail probability after s >= h draws, with its two
    exponential upper bounds 1 - exp(-alpha q^{-(s-h)}).

    Returns (exact, field_bound, binary_limit_bound); the first bound uses
    alpha_constant(q, h), the second the binary-field limit constant, and
    exact <= field_bound <= binary_limit_bound with equality only at s = h.
    """
    _validate_qh(q, h)
    if s < h:
        raise ValueError(f"s={s} must be at least h={h}")
    lnq = math.log(q)
    logcdf = math.fsum(math.log1p(-math.exp((k - s) * lnq)) for k in range(h))
    exact = -math.expm1(logcdf)
    decay = math.exp(-(s - h) * lnq)
    field_bound = -math.expm1(-alpha_constant(q, h) * decay)
    binary_bound = -math.expm1(-alpha_binary_limit() * decay)
    return exact, field_bound, binary_bound


# -- expected stopping times by quadrature ----------------------------------


def _complete_sets_integrand(n: int, m: int):
    # Pr[some coupon type has fewer than m copies at Poisson time x],
    # bounded above by n * exp_partial_sum(m,x) e^{-x}
    def g(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        p = special.gammainc(m, x)
        out = np.empty_like(p)
        low = p < 0.5
        out[low] = 1.0 - p[low] ** n
        rest = ~low
        if rest.any():
            out[rest] = -np.expm1(n * np.log1p(-special.gammaincc(m, x[rest])))
        return out

    return g


def _partial_sets_integrand(n: int, k: int, m: int):
    # Pr[Binomial(n, Pr[Poisson(x) >= m]) < k]; same n-scaled tail majorant
    def g(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        p = special.gammainc(m, x)
        return special.bdtr(k - 1, n, p)

    return g


def _chain_count(spec: ThresholdSpec) -> int:
    # number of nondecreasing (i_1..i_A) with k_j <= i_j <= n, counted exactly
    n = spec.n
    ks = [k for k, _ in spec.pairs]
    ways = [1 if v >= ks[0] else 0 for v in range(n + 1)]
    for kj in ks[1:]:
        pref = list(itertools.accumulate(ways))
        ways = [pref[v] if v >= kj else 0 for v in range(n + 1)]
    return sum(ways)


def _chain_gaps(spec: ThresholdSpec) -> np.ndarray:
    # consecutive differences (i_1-0, i_2-i_1, ..., n-i_A) of every chain
    n = spec.n
    ks = [k for k, _ in spec.pairs]
    A = len(ks)
    gaps: list[tuple[int, ...]] = []
    chain = [0] * (A + 2)
    chain[A + 1] = n

    def rec(j: int, prev: int) -> None:
        if j > A:
            gaps.append(tuple(chain[t + 1] - chain[t] for t in range(A + 1)))
            return
        for v in range(max(ks[j - 1], prev), n + 1):
            chain[j] = v
            rec(j + 1, v)

    rec(1, 0)
    return np.array(gaps, dtype=np.float64)


def _threshold_integrand(spec: ThresholdSpec):
    # Pr[threshold profile not yet met at Poisson time x].  The met
    # probability is a sum over count-level chains of multinomial terms whose
    # factors are Poisson band probabilities, so each factor stays in [0, 1]
    # and the multinomial weight is applied in the log domain.
    n = spec.n
    ms = [m for _, m in spec.pairs]
    A = len(ms)
    m1 = ms[0]
    bands = [(ms[t], ms[t - 1]) for t in range(1, A)] + [(0, ms[-1])]
    gaps = _chain_gaps(spec)
    logmult = special.gammaln(n + 1) - special.gammaln(gaps + 1).sum(axis=1)

    def g(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        P = np.empty((A + 1, x.size))
        P[0] = special.gammainc(m1, x)
        for t, (a, b) in enumerate(bands, start=1):
            P[t] = _poisson_band(a, b, x)
        logP = np.full_like(P, -1e60)
        np.log(P, out=logP, where=P > 0)
        met = np.exp(logmult[:, None] + gaps @ logP).sum(axis=0)
        return np.clip(1.0 - met, 0.0, None)

    return g


def expected_collection_time(n: int, m: int, tol: float = 1e-8) -> TheoryResult:
    """Expected draws until every one of n coupon types is held m times:
    n * int_0^inf [1 - (1 - exp_partial_sum(m,x) e^{-x})^n] dx.

    The survival integral is evaluated to tol/n so the n-scaled result meets
    the requested absolute tolerance.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    task = IntegralTask(_complete_sets_integrand(n, m), float(n), m, tol / n)
    value, err = integrate(task)
    return TheoryResult(n * value, n * err, "quadrature")


def expected_partial_collection_time(n: int, k: int, m: int, tol: float = 1e-8) -> TheoryResult:
    """Expected draws until at least k of the n coupon types are held m
    times each."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must lie in [1, n={n}]")
    task = IntegralTask(_partial_sets_integrand(n, k, m), float(n), m, tol / n)
    value, err = integrate(task)
    return TheoryResult(n * value, n * err, "quadrature")


def expected_threshold_time(spec: ThresholdSpec, tol: float = 1e-8, chain_cap: int = 10_000_000) -> TheoryResult:
    """Expected draws until the full threshold profile of spec is met.

    Evaluation enumerates count-level chains, so cost grows like n^A; specs
    whose chain count exceeds chain_cap are rejected up front with a
    ResourceLimitError instead of stalling.
    """
    count = _chain_count(spec)
    if count > chain_cap:
        raise ResourceLimitError(f"threshold evaluation needs {count} chains, above the cap {chain_cap}")
    task = IntegralTask(_threshold_integrand(spec), float(spec.n), spec.pairs[0][1], tol / spec.n)
    value, err = integrate(task)
    return TheoryResult(spec.n * value, spec.n * err, "quadrature")


# -- asymptotics, limit law, failure bound ----------------------------------


def collection_time_asymptotic(n: int, m: float) -> float:
    """Large-n expansion n log n + (m-1) n log log n + (gamma - log (m-1)!) n,
    natural logarithms throughout.

    m may be any real >= 1; the factorial generalizes through log-gamma.
    """
    if n < 2:
        raise ValueError("n must be >= 2 so log log n is defined")
    if m < 1:
        raise ValueError("m must be >= 1")
    ln = math.log(n)
    return n * ln + (m - 1) * n * math.log(ln) + (EULER_GAMMA - math.lgamma(m)) * n


def collection_time_many_copies_limit(n: int, m: int) -> float:
    """Limit of the expected collection time per copy count as m grows: n*m."""
    return float(n) * float(m)


def limit_law_cdf(y: float, m: int) -> float:
    """Limiting law of the centered, scaled collection time as n grows:
    exp(-e^{-y} / (m-1)!)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    inner = -y - math.lgamma(m)
    if inner > 700:
        return 0.0
    return math.exp(-math.exp(inner))


def decoding_failure_lower_bound(n: int, h: int, t: float) -> float:
    """Large-n lower bound on the probability the block is still
    undecodable after t packets: 1 - exp(-n (log n)^{h-1} e^{-t/n} / (h-1)!).

    Leading term only; the slowly decaying log log n / log n correction is
    reported as a caveat by callers, not folded in here.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if h < 1:
        raise ValueError("h must be >= 1")
    if t < 0:
        raise ValueError("t must be nonnegative")
    lograte = math.log(n) + (h - 1) * math.log(math.log(n)) - t / n - math.lgamma(h)
    if lograte > 700:
        return 1.0
    return -math.expm1(-math.exp(lograte))
