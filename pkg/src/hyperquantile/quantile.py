"""Exact occupation-time CDF of a scalar path and its generalized inverse.

For a scalar path ``x`` and horizon ``t`` the occupation CDF is

    F(y) = (1/t) * Leb{s in [0, t] : x_s <= y},

and the alpha-quantile is its left-continuous generalized inverse
``M_{t,alpha}(x) = inf{y : F(y) >= alpha}``.

``F`` is stored exactly as a list of level knots ``L_0 < ... < L_m`` with the
left limit and value of ``F`` at every knot; between knots ``F`` is affine.
Step paths give a pure jump function, linear paths a continuous one (unless a
segment is flat, which puts an atom at its level).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import ValidationError
from .paths import CadlagPath, Interpolation, _require_scalar, running_inf, running_sup


@dataclass(frozen=True, eq=False)
class OccupationCdf:
    horizon: float
    levels: np.ndarray
    f_left: np.ndarray
    f_right: np.ndarray
    y_min: float
    y_max: float
    interpolation: Interpolation

    def __call__(self, y):
        y_arr = np.asarray(y, dtype=np.float64)
        L, fl, fr = self.levels, self.f_left, self.f_right
        j = np.searchsorted(L, y_arr, side="right") - 1
        jc = np.clip(j, 0, L.size - 1)
        jn = np.minimum(jc + 1, L.size - 1)
        on_knot = L[jc] == y_arr
        gap = L[jn] - L[jc]
        with np.errstate(invalid="ignore", divide="ignore"):
            inner = fr[jc] + (y_arr - L[jc]) * ((fl[jn] - fr[jc]) / gap)
        out = np.where(on_knot | (jc == L.size - 1), fr[jc], inner)
        out = np.where(j < 0, 0.0, out)
        return float(out) if np.ndim(y) == 0 else out

    def left_limit(self, y):
        """F(y-)."""
        y_arr = np.asarray(y, dtype=np.float64)
        k = np.clip(np.searchsorted(self.levels, y_arr, side="left"), 0, self.levels.size - 1)
        on_knot = self.levels[k] == y_arr
        out = np.where(on_knot, self.f_left[k], self(y_arr))
        return float(out) if np.ndim(y) == 0 else out

    @property
    def atoms(self) -> np.ndarray:
        """Jump sizes of F at each level knot."""
        return self.f_right - self.f_left

    @property
    def is_continuous(self) -> bool:
        return bool(np.all(self.f_right == self.f_left))

    def pieces(self) -> list[tuple]:
        """(kind, y_lo, y_hi, F_lo, F_hi) with kind 'jump' or 'affine'."""
        out = []
        L, fl, fr = self.levels, self.f_left, self.f_right
        for j in range(L.size):
            if fr[j] > fl[j]:
                out.append(("jump", L[j], L[j], fl[j], fr[j]))
            if j + 1 < L.size:
                out.append(("affine", L[j], L[j + 1], fr[j], fl[j + 1]))
        return out


@dataclass(frozen=True)
class QuantileResult:
    alpha: float
    value: float
    flat: bool
    piece: int
    on_atom: bool


@dataclass(frozen=True, eq=False)
class QuantileCurve:
    """alpha -> M_{t,alpha} as flats and affine pieces on (alpha_lo, alpha_hi]."""

    cdf: OccupationCdf
    alpha_lo: np.ndarray
    alpha_hi: np.ndarray
    m_lo: np.ndarray
    m_hi: np.ndarray

    def __call__(self, alpha):
        if np.ndim(alpha) == 0:
            return _invert(self.cdf, _check_alpha(alpha)).value
        return np.array([_invert(self.cdf, _check_alpha(a)).value for a in np.ravel(alpha)]).reshape(
            np.shape(alpha)
        )

    @property
    def flats(self) -> np.ndarray:
        return self.m_lo == self.m_hi

    @property
    def is_strictly_increasing(self) -> bool:
        return not bool(np.any(self.flats))

    def jump_alphas(self) -> np.ndarray:
        """alpha with M_{t,alpha} < M_{t,alpha+}."""
        jumps = self.m_hi[:-1] < self.m_lo[1:]
        a = self.alpha_hi[:-1][jumps]
        return a[(a > 0) & (a < 1)]


@dataclass(frozen=True)
class DiscontinuitySet:
    alphas: tuple[float, ...]

    def __len__(self):
        return len(self.alphas)

    def __contains__(self, a):
        return a in self.alphas


def _check_alpha(alpha) -> float:
    a = float(alpha)
    if not (0.0 < a < 1.0):
        raise ValidationError("alpha out of (0,1)")
    return a


def _check_horizon(t) -> float:
    t = float(t)
    if not (t > 0.0) or not math.isfinite(t):
        raise ValidationError("horizon t must be positive")
    return t


def occupation_cdf(path: CadlagPath, t: float) -> OccupationCdf:
    _require_scalar(path)
    t = _check_horizon(t)
    if path.interpolation is Interpolation.STEP:
        levels, fl, fr = _step_cdf(path.breakpoints, path.scalar_values, t)
    else:
        levels, fl, fr = _linear_cdf(path, t)
    return OccupationCdf(
        horizon=t,
        levels=levels,
        f_left=fl,
        f_right=fr,
        y_min=running_inf(path, t),
        y_max=running_sup(path, t),
        interpolation=path.interpolation,
    )


def _step_cdf(bp: np.ndarray, v: np.ndarray, t: float):
    ends = np.append(bp[1:], np.inf)
    dur = np.minimum(ends, t) - bp
    keep = dur > 0
    levels, inv = np.unique(v[keep], return_inverse=True)
    fr = np.cumsum(np.bincount(inv, weights=dur[keep], minlength=levels.size)) / t
    fr[-1] = 1.0
    fr = np.minimum(fr, 1.0)
    fl = np.concatenate(([0.0], fr[:-1]))
    return levels, fl, fr


def _linear_cdf(path: CadlagPath, t: float):
    bp, v = path.breakpoints, path.scalar_values
    k = np.flatnonzero(bp[:-1] < t)
    end = np.minimum(bp[k + 1], t)
    a = v[k]
    b = np.where(bp[k + 1] <= t, v[k + 1], path(end))
    dur = end - bp[k]
    if t > bp[-1]:
        a = np.append(a, v[-1])
        b = np.append(b, v[-1])
        dur = np.append(dur, t - bp[-1])
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    levels = np.unique(np.concatenate((lo, hi)))
    fl, fr = _linear_sweep(
        levels,
        np.searchsorted(levels, lo),
        np.searchsorted(levels, hi),
        dur / t,
    )
    return levels, fl, fr


@numba.njit(cache=True)
def _grow(partials, n, x):
    # exact running sum as non-overlapping partials (Shewchuk); returns new length
    i = 0
    for k in range(n):
        y = partials[k]
        if abs(x) < abs(y):
            x, y = y, x
        hi = x + y
        lo = y - (hi - x)
        if lo != 0.0:
            partials[i] = lo
            i += 1
        x = hi
    partials[i] = x
    return i + 1


@numba.njit(cache=True)
def _collapse(partials, n):
    total = 0.0
    for k in range(n - 1, -1, -1):
        total += partials[k]
    return total


@numba.njit(cache=True)
def _linear_sweep(levels, lo_idx, hi_idx, w):
    m = levels.size
    atoms = np.zeros(m)
    # density d switches on at its low knot and off at its high knot
    ev_at = np.empty(2 * w.size, np.int64)
    ev_d = np.empty(2 * w.size)
    ne = 0
    for k in range(w.size):
        i, j = lo_idx[k], hi_idx[k]
        d = w[k] / (levels[j] - levels[i]) if i != j else np.inf
        if not np.isfinite(d):
            # level range too narrow for a finite density; the mass sits at the top knot
            atoms[j] += w[k]
        else:
            ev_at[ne] = i
            ev_d[ne] = d
            ev_at[ne + 1] = j
            ev_d[ne + 1] = -d
            ne += 2
    order = np.argsort(ev_at[:ne], kind="mergesort")
    fl = np.zeros(m)
    fr = np.zeros(m)
    # the slope is kept exact: steep short segments add and remove densities many
    # orders of magnitude above the others, which plain or compensated sums lose
    partials = np.zeros(256)
    n = 0
    e = 0
    slope = 0.0
    for j in range(m):
        if j > 0:
            fl[j] = fr[j - 1] + slope * (levels[j] - levels[j - 1])
        fr[j] = fl[j] + atoms[j]
        changed = False
        while e < ne and ev_at[order[e]] == j:
            n = _grow(partials, n, ev_d[order[e]])
            e += 1
            changed = True
        if changed:
            slope = _collapse(partials, n)
    fr[m - 1] = 1.0
    run = 0.0
    for j in range(m):
        fl[j] = min(max(fl[j], run), 1.0)
        fr[j] = min(max(fr[j], fl[j]), 1.0)
        run = fr[j]
    return fl, fr


_SIGN = 0x7FFFFFFFFFFFFFFF


def _ordinal(x: float) -> int:
    """Integer key that orders doubles like the reals (-0.0 and 0.0 share one)."""
    i = int(np.float64(x).view(np.int64))
    return i if i >= 0 else -(i & _SIGN)


def _from_ordinal(k: int) -> float:
    v = float(np.int64(abs(k)).view(np.float64))
    return -v if k < 0 else v


def _invert(cdf: OccupationCdf, alpha: float) -> QuantileResult:
    L, fl, fr = cdf.levels, cdf.f_left, cdf.f_right
    j = min(int(np.searchsorted(fr, alpha, side="left")), L.size - 1)
    if fl[j] < alpha:
        flat = bool(fr[j] > alpha)
        return QuantileResult(alpha, float(L[j]), flat, j, True)
    # alpha is reached strictly inside (L[j-1], L[j]) where F is affine
    y0, y1, f0, f1 = L[j - 1], L[j], fr[j - 1], fl[j]

    def F(y):
        return f0 + (y - y0) * ((f1 - f0) / (y1 - y0))

    # smallest float m in (y0, y1] with F(m) >= alpha, by bisection over the
    # ordered float lattice; F is affine there and rounding keeps it monotone
    lo, hi = _ordinal(y0), _ordinal(y1)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if F(_from_ordinal(mid)) >= alpha:
            hi = mid
        else:
            lo = mid
    m = _from_ordinal(hi)
    return QuantileResult(alpha, float(m), False, j, bool(m == y1))


def quantile(path: CadlagPath, t: float, alpha: float) -> QuantileResult:
    alpha = _check_alpha(alpha)
    return _invert(occupation_cdf(path, t), alpha)


def quantile_from_cdf(cdf: OccupationCdf, alpha: float) -> QuantileResult:
    return _invert(cdf, _check_alpha(alpha))


def quantile_curve(path: CadlagPath, t: float) -> QuantileCurve:
    return curve_from_cdf(occupation_cdf(path, t))


def curve_from_cdf(cdf: OccupationCdf) -> QuantileCurve:
    L, fl, fr = cdf.levels, cdf.f_left, cdf.f_right
    continuous = cdf.interpolation is Interpolation.LINEAR
    a_lo, a_hi, m_lo, m_hi = [], [], [], []
    for j in range(L.size):
        if fr[j] > fl[j]:
            a_lo.append(fl[j])
            a_hi.append(fr[j])
            m_lo.append(L[j])
            m_hi.append(L[j])
        # a continuous path occupies every level between its extremes, so a
        # piece whose F-increase rounded to zero is kept rather than read as a gap
        if j + 1 < L.size and (fl[j + 1] > fr[j] or continuous):
            a_lo.append(fr[j])
            a_hi.append(fl[j + 1])
            m_lo.append(L[j])
            m_hi.append(L[j + 1])
    return QuantileCurve(cdf, np.array(a_lo), np.array(a_hi), np.array(m_lo), np.array(m_hi))


def discontinuity_set(path: CadlagPath, t: float) -> DiscontinuitySet:
    curve = quantile_curve(path, t)
    return DiscontinuitySet(tuple(float(a) for a in curve.jump_alphas()))
