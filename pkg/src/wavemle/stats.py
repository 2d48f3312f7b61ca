"""Statistical primitives for the experiment harness.

Self-contained on purpose: the standard-normal distribution function
delegates to the C library's erfc (a fixed, documented implementation,
accurate in both tails and far below the 1e-7 requirement), and the
Kolmogorov-Smirnov machinery is implemented here so the goodness-of-fit
verdicts do not depend on an external statistics stack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

_SQRT2 = math.sqrt(2.0)
_KS_TERM_CUTOFF = 1e-10


def std_normal_cdf(x: float) -> float:
    """Phi(x) = erfc(-x / sqrt 2) / 2; monotone, Phi(x) + Phi(-x) = 1 to ~1 ulp."""
    if math.isnan(x):
        raise ValueError("x must not be NaN")
    return 0.5 * math.erfc(-x / _SQRT2)


def kolmogorov_survival(y: float) -> float:
    """P(K > y) for the Kolmogorov distribution, y >= 0.

    Alternating series 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 y^2), truncated once
    terms drop below 1e-10.  Below y = 1e-3 the value is 1 to double
    precision, short-circuited to keep the series finite.
    """
    if math.isnan(y) or y < 0.0:
        raise ValueError(f"y must be >= 0, got {y!r}")
    if y < 1e-3:
        return 1.0
    total = 0.0
    sign = 1.0
    j = 1
    while True:
        term = math.exp(-2.0 * j * j * y * y)
        if term < _KS_TERM_CUTOFF:
            break
        total += sign * term
        sign = -sign
        j += 1
    return min(max(2.0 * total, 0.0), 1.0)


@dataclass(frozen=True)
class KsResult:
    """One-sample Kolmogorov-Smirnov verdict against the standard normal."""

    d_stat: float
    p_value: float
    n: int


def ks_test(samples) -> KsResult:
    """Exact sup-gap between the empirical CDF and Phi, with asymptotic p-value.

    d = max_i max(i/n - Phi(x_(i)), Phi(x_(i)) - (i-1)/n) over the order
    statistics; p = kolmogorov_survival(sqrt(n) d).
    """
    xs = np.sort(np.asarray(samples, dtype=np.float64))
    n = xs.size
    if n < 1:
        raise ValueError("ks_test requires at least one sample")
    if not np.all(np.isfinite(xs)):
        raise ValueError("samples must be finite")
    d = 0.0
    for i in range(n):
        phi = std_normal_cdf(xs[i])
        d = max(d, (i + 1) / n - phi, phi - i / n)
    return KsResult(d_stat=d, p_value=kolmogorov_survival(math.sqrt(n) * d), n=n)


class SampleSummary(NamedTuple):
    mean: float
    variance: float
    min: float
    max: float
    n: int


def summarize(samples) -> SampleSummary:
    """Mean, unbiased variance, range, count; variance needs n >= 2.

    Two-pass variance with a constant-sample short circuit, so identical
    samples report exactly zero.
    """
    xs = np.asarray(samples, dtype=np.float64)
    n = xs.size
    if n < 2:
        raise ValueError("summarize requires at least two samples")
    if not np.all(np.isfinite(xs)):
        raise ValueError("samples must be finite")
    lo = float(xs.min())
    hi = float(xs.max())
    mean = math.fsum(xs) / n
    if lo == hi:
        variance = 0.0
    else:
        variance = math.fsum((x - mean) ** 2 for x in xs) / (n - 1)
    return SampleSummary(mean=mean, variance=variance, min=lo, max=hi, n=n)


@dataclass(frozen=True)
class Histogram:
    """Uniform half-open bins [edge_i, edge_{i+1}) plus out-of-range tallies."""

    edges: np.ndarray
    counts: np.ndarray
    below: int
    above: int


def histogram(samples, n_bins: int, lo: float, hi: float) -> Histogram:
    """Bin counts over [lo, hi) with a value at an interior edge going right.

    Counts sum to the number of in-range samples; values below lo or at/above
    hi are tallied separately.
    """
    if not (isinstance(n_bins, int) and n_bins >= 1):
        raise ValueError(f"n_bins must be an integer >= 1, got {n_bins!r}")
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError(f"invalid range [{lo!r}, {hi!r})")
    xs = np.asarray(samples, dtype=np.float64)
    if xs.size and not np.all(np.isfinite(xs)):
        raise ValueError("samples must be finite")
    edges = np.linspace(lo, hi, n_bins + 1)
    idx = np.searchsorted(edges, xs, side="right") - 1
    below = int(np.count_nonzero(idx < 0))
    above = int(np.count_nonzero(idx >= n_bins))
    in_range = idx[(idx >= 0) & (idx < n_bins)]
    counts = np.bincount(in_range, minlength=n_bins).astype(np.int64)
    return Histogram(edges=edges, counts=counts, below=below, above=above)
