"""First time a scalar path reaches its own alpha-quantile.

    tau = inf{t > 0 : sup_{s<=t} x_s >= M}   if M > x_0
          0                                  if M = x_0
          inf{t > 0 : inf_{s<=t} x_s <= M}   if M < x_0

with ``M = M_{T,alpha}(x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import ValidationError
from .paths import CadlagPath, Interpolation, _require_scalar
from .quantile import _check_alpha, quantile


class HitCase(Enum):
    ABOVE_START = "above_start"
    AT_START = "at_start"
    BELOW_START = "below_start"


@dataclass(frozen=True)
class HittingTime:
    tau: float
    case: HitCase
    level: float
    never_hit: bool = False
    horizon: float = math.inf

    @property
    def after_horizon(self) -> bool:
        return self.tau > self.horizon

    def to_dict(self) -> dict:
        return {
            "tau": None if self.never_hit else self.tau,
            "case": self.case.value,
            "level": self.level,
            "never_hit": self.never_hit,
            "after_horizon": self.after_horizon,
        }


def first_passage_up(path: CadlagPath, level: float) -> float:
    """inf{t > 0 : sup_{s<=t} x_s >= level}; inf if never reached."""
    bp, v = path.breakpoints, path.scalar_values
    if v[0] >= level:
        return 0.0
    hit = np.flatnonzero(v >= level)
    if hit.size == 0:
        return math.inf
    k = int(hit[0])
    if path.interpolation is Interpolation.STEP or v[k] == level:
        return float(bp[k])
    a, b = v[k - 1], v[k]
    return float(bp[k - 1] + (level - a) / (b - a) * (bp[k] - bp[k - 1]))


def first_passage_down(path: CadlagPath, level: float) -> float:
    """inf{t > 0 : inf_{s<=t} x_s <= level}; inf if never reached."""
    bp, v = path.breakpoints, path.scalar_values
    if v[0] <= level:
        return 0.0
    hit = np.flatnonzero(v <= level)
    if hit.size == 0:
        return math.inf
    k = int(hit[0])
    if path.interpolation is Interpolation.STEP or v[k] == level:
        return float(bp[k])
    a, b = v[k - 1], v[k]
    return float(bp[k - 1] + (level - a) / (b - a) * (bp[k] - bp[k - 1]))


def _check(path: CadlagPath, T: float, alpha: float):
    _require_scalar(path)
    if not float(T) > 0:
        raise ValidationError("horizon T must be positive")
    return float(T), _check_alpha(alpha)


def hitting_time(path: CadlagPath, T: float, alpha: float) -> HittingTime:
    T, alpha = _check(path, T, alpha)
    m = quantile(path, T, alpha).value
    x0 = float(path.scalar_values[0])
    if m > x0:
        tau, case = first_passage_up(path, m), HitCase.ABOVE_START
    elif m < x0:
        tau, case = first_passage_down(path, m), HitCase.BELOW_START
    else:
        tau, case = 0.0, HitCase.AT_START
    return HittingTime(tau, case, m, never_hit=math.isinf(tau), horizon=T)


def hitting_time_continuous(path: CadlagPath, T: float, alpha: float) -> HittingTime:
    """inf{t : x_t = M} by scanning for the first segment that brackets M.

    Only valid for continuous paths, where it agrees with :func:`hitting_time`.
    """
    T, alpha = _check(path, T, alpha)
    if path.interpolation is not Interpolation.LINEAR:
        raise ValidationError("hitting_time_continuous requires a continuous (linear) path")
    m = quantile(path, T, alpha).value
    bp, v = path.breakpoints, path.scalar_values
    x0 = float(v[0])
    case = HitCase.ABOVE_START if m > x0 else HitCase.BELOW_START if m < x0 else HitCase.AT_START
    tau = math.inf
    for k in range(v.size):
        if v[k] == m:
            tau = float(bp[k])
            break
        if k + 1 < v.size and min(v[k], v[k + 1]) < m < max(v[k], v[k + 1]):
            a, b = v[k], v[k + 1]
            tau = float(bp[k] + (m - a) / (b - a) * (bp[k + 1] - bp[k]))
            break
    return HittingTime(tau, case, m, never_hit=math.isinf(tau), horizon=T)


class OneSidedLimits(NamedTuple):
    left: float
    right: float
    center: float
    case: HitCase

    @property
    def relevant(self) -> float:
        """The one-sided value that decides continuity of alpha -> tau."""
        return self.right if self.case is HitCase.ABOVE_START else self.left


def tau_one_sided_limits(
    path: CadlagPath, T: float, alpha: float, h: float = 1e-3
) -> OneSidedLimits:
    """tau at alpha - h and alpha + h, plus tau at alpha and its case tag."""
    T, alpha = _check(path, T, alpha)
    if not (h > 0 and 0 < alpha - h and alpha + h < 1):
        raise ValidationError("need 0 < alpha - h and alpha + h < 1")
    c = hitting_time(path, T, alpha)
    return OneSidedLimits(
        hitting_time(path, T, alpha - h).tau,
        hitting_time(path, T, alpha + h).tau,
        c.tau,
        c.case,
    )
