"""Empirical CDFs, Kolmogorov-Smirnov statistics, atoms and MC standard errors.

Thresholds use the asymptotic Kolmogorov distribution: reject at level a when
sqrt(n_eff) D > c(a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError

KOLMOGOROV_C = {0.10: 1.224, 0.05: 1.358, 0.01: 1.628, 0.001: 1.949}


@dataclass(frozen=True, eq=False)
class Sample:
    values: np.ndarray

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, float).ravel())
        if v.size < 1:
            raise ValidationError("a sample needs at least one value")
        if not np.all(np.isfinite(v)):
            raise ValidationError("sample values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def ecdf(self, x):
        """Right-continuous empirical CDF."""
        out = np.searchsorted(self.values, np.asarray(x, float), side="right") / self.n
        return float(out) if np.ndim(x) == 0 else out


def _as_sample(s) -> Sample:
    return s if isinstance(s, Sample) else Sample(s)


@dataclass(frozen=True)
class KsResult:
    D: float
    n_eff: float

    def threshold_at(self, level: float) -> float:
        try:
            return KOLMOGOROV_C[level] / math.sqrt(self.n_eff)
        except KeyError:
            raise ValidationError(f"no Kolmogorov constant for level {level}") from None

    def passes(self, level: float) -> bool:
        return self.D <= self.threshold_at(level)

    def __iter__(self):
        # unpacks as (D, threshold_at)
        return iter((self.D, self.threshold_at))


def ks_one_sample(sample, cdf: Callable) -> KsResult:
    """sup_x |F_n(x) - cdf(x)| with both one-sided gaps at each distinct value."""
    s = _as_sample(sample)
    x, idx = np.unique(s.values, return_index=True)
    below = idx / s.n  # F_n(x-)
    above = np.append(idx[1:], s.n) / s.n  # F_n(x)
    F = np.clip(np.asarray(cdf(x), float), 0.0, 1.0)
    D = max(np.max(above - F), np.max(F - below))
    return KsResult(float(D), float(s.n))


def ks_two_sample(a, b) -> KsResult:
    sa, sb = _as_sample(a), _as_sample(b)
    x = np.union1d(sa.values, sb.values)
    D = np.max(np.abs(sa.ecdf(x) - sb.ecdf(x)))
    return KsResult(float(D), sa.n * sb.n / (sa.n + sb.n))


def largest_atom(sample) -> tuple[float, float]:
    """Most frequent exact value and its sample fraction."""
    s = _as_sample(sample)
    vals, counts = np.unique(s.values, return_counts=True)
    k = int(np.argmax(counts))
    return float(vals[k]), float(counts[k] / s.n)


@dataclass(frozen=True)
class MeanEstimate:
    mean: float
    se: float
    n: int

    def within(self, target: float, tol: float) -> bool:
        return abs(self.mean - target) <= tol


def mc_mean(x) -> MeanEstimate:
    x = np.asarray(x, float).ravel()
    if x.size < 2:
        raise ValidationError("need at least two draws for a standard error")
    return MeanEstimate(float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size)), int(x.size))
