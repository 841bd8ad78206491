"""Upper bounds on the J1 distance between scalar cadlag paths.

    delta_N(x, y) = inf_lambda ( |||lambda||| + sup_t |(k_N x)(lambda(t)) - (k_N y)(t)| )
    delta(x, y)   = sum_N 2^-N (1 ^ delta_N(x, y))

with k_N the taper equal to 1 on [0, N], N + 1 - t on (N, N + 1) and 0 after,
and |||lambda||| the largest |log slope| of the time change.

The infimum runs over piecewise-linear time changes whose knots send knots of
y (its jump times and the anchors N, N + 1) to knots of x.  A beam search over
monotone matchings picks the knots, a short coordinate search polishes the
images, and the identity is always evaluated, so every reported delta_N is at
most the uniform distance of the truncated paths.  Both orientations are run
and the smaller value is kept.  The sup norm is taken over [0, inf) with the
plain uniform norm; truncated paths vanish after N + 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import ValidationError
from .paths import CadlagPath, Interpolation, _require_scalar


@dataclass(frozen=True, eq=False)
class PiecewisePoly:
    """Cadlag piecewise quadratic: c0 + c1 t + c2 t^2 on [knots[i], knots[i+1]).

    The last piece extends to infinity.
    """

    knots: np.ndarray
    coef: np.ndarray

    def __call__(self, t):
        t_arr = np.asarray(t, float)
        i = np.clip(np.searchsorted(self.knots, t_arr, side="right") - 1, 0, self.knots.size - 1)
        c = self.coef[i]
        out = c[..., 0] + t_arr * (c[..., 1] + t_arr * c[..., 2])
        return float(out) if np.ndim(t) == 0 else out

    def jump_times(self) -> np.ndarray:
        k, c = self.knots, self.coef
        if k.size < 2:
            return np.empty(0)
        t = k[1:]
        left = c[:-1, 0] + t * (c[:-1, 1] + t * c[:-1, 2])
        right = c[1:, 0] + t * (c[1:, 1] + t * c[1:, 2])
        return t[left != right]


def _path_poly(path: CadlagPath) -> tuple[np.ndarray, np.ndarray]:
    bp, v = path.breakpoints, path.scalar_values
    coef = np.zeros((bp.size, 3))
    coef[:, 0] = v
    if path.interpolation is Interpolation.LINEAR and bp.size > 1:
        slope = np.diff(v) / np.diff(bp)
        coef[:-1, 1] = slope
        coef[:-1, 0] = v[:-1] - slope * bp[:-1]
    return bp, coef


def truncate(path: CadlagPath, N: int) -> PiecewisePoly:
    """k_N x as an exact piecewise quadratic."""
    _require_scalar(path)
    if int(N) != N or N < 1:
        raise ValidationError("N must be a positive integer")
    N = int(N)
    bp, coef = _path_poly(path)
    knots = np.union1d(bp[bp < N + 1], [float(N), float(N + 1)])
    src = coef[np.searchsorted(bp, knots, side="right") - 1]
    out = src.copy()
    taper = (knots >= N) & (knots < N + 1)
    c0, c1 = src[taper, 0], src[taper, 1]
    # (c0 + c1 t)(N + 1 - t)
    out[taper, 0] = c0 * (N + 1)
    out[taper, 1] = c1 * (N + 1) - c0
    out[taper, 2] = -c1
    out[knots >= N + 1] = 0.0
    return PiecewisePoly(knots, out)


@dataclass(frozen=True, eq=False)
class TimeChange:
    """Continuous strictly increasing piecewise-linear map with lambda(0) = 0.

    Slope 1 after the last knot.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, float)
        v = np.asarray(self.values, float)
        if b.size != v.size or b.size < 1 or b[0] != 0 or v[0] != 0:
            raise ValidationError("a time change starts at (0, 0)")
        if np.any(np.diff(b) <= 0) or np.any(np.diff(v) <= 0):
            raise ValidationError("a time change must be strictly increasing")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    @classmethod
    def identity(cls) -> "TimeChange":
        return cls(np.zeros(1), np.zeros(1))

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.breakpoints)

    @property
    def norm(self) -> float:
        """sup |log slope|."""
        s = self.slopes
        return float(np.max(np.abs(np.log(s)))) if s.size else 0.0

    def __call__(self, t):
        t_arr = np.asarray(t, float)
        b, v = self.breakpoints, self.values
        inside = np.interp(t_arr, b, v)
        out = np.where(t_arr > b[-1], v[-1] + (t_arr - b[-1]), inside)
        return float(out) if np.ndim(t) == 0 else out

    def inverse(self) -> "TimeChange":
        return TimeChange(self.values, self.breakpoints)


@dataclass(frozen=True)
class SearchParams:
    beam: int = 64
    window: int = 4
    skip: int = 3
    refine_levels: int = 2

    def __post_init__(self):
        if self.beam < 1 or self.window < 1 or self.skip < 1 or self.refine_levels < 0:
            raise ValidationError("search parameters must be positive")


@dataclass(frozen=True, eq=False)
class J1Distance:
    delta: float
    per_N: np.ndarray
    uniform_per_N: np.ndarray
    witnesses: list = field(default_factory=list)
    swapped: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "per_N": self.per_N.tolist(),
            "uniform_per_N": self.uniform_per_N.tolist(),
            "witnesses": [
                {"breakpoints": w.breakpoints.tolist(), "values": w.values.tolist(), "x_to_y": s}
                for w, s in zip(self.witnesses, self.swapped)
            ],
        }


# ---------------------------------------------------------------- numba core


@numba.njit(cache=True)
def _piece(knots, t):
    # index i with knots[i] <= t < knots[i+1]
    lo, hi = 0, knots.size - 1
    if t >= knots[hi]:
        return hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if knots[mid] <= t:
            lo = mid
        else:
            hi = mid
    return lo


@numba.njit(cache=True)
def _poly(c, i, t):
    return c[i, 0] + t * (c[i, 1] + t * c[i, 2])


@numba.njit(cache=True)
def _seg_sup(kx, cx, ky, cy, s0, s1, u0, u1):
    """sup over t in [s0, s1] of |x(lambda t) - y(t)|, lambda affine (s0,u0)->(s1,u1)."""
    r = (u1 - u0) / (s1 - s0)
    A = u0 - r * s0
    best = 0.0
    ta = s0
    jy = _piece(ky, s0) + 1
    jx = _piece(kx, u0) + 1
    while ta < s1:
        ny = ky[jy] if jy < ky.size else np.inf
        nx = s0 + (kx[jx] - u0) / r if jx < kx.size else np.inf
        tb = min(ny, nx, s1)
        if tb <= ta:
            # knot images can round onto ta; step past them
            if ny <= ta:
                jy += 1
            if nx <= ta:
                jx += 1
            continue
        tm = 0.5 * (ta + tb)
        iy = _piece(ky, tm)
        ix = _piece(kx, A + r * tm)
        for t in (ta, tb):
            g = abs(_poly(cx, ix, A + r * t) - _poly(cy, iy, t))
            if g > best:
                best = g
        g2 = cx[ix, 2] * r * r - cy[iy, 2]
        if g2 != 0.0:
            g1 = cx[ix, 1] * r + 2.0 * cx[ix, 2] * A * r - cy[iy, 1]
            tv = -g1 / (2.0 * g2)
            if ta < tv < tb:
                g = abs(_poly(cx, ix, A + r * tv) - _poly(cy, iy, tv))
                if g > best:
                    best = g
        if tb == ny:
            jy += 1
        if tb == nx:
            jx += 1
        ta = tb
    return best


@numba.njit(cache=True)
def _tail(kx, cx, ky, cy, s, u, end):
    # slope-one continuation from (s, u) until both truncated paths vanish
    stop = max(end, s + (end - u)) + 1.0
    return _seg_sup(kx, cx, ky, cy, s, stop, u, u + (stop - s))


@numba.njit(cache=True)
def _beam_search(kx, cx, ky, cy, xs, ys, end, beam, window, skip, bound):
    """Layered search over y-knots ys[0] = 0 < ... ; returns images and cost."""
    m = ys.size
    U = np.full((m, beam), np.nan)
    L = np.full((m, beam), np.inf)
    D = np.full((m, beam), np.inf)
    P = np.full((m, beam), -1, dtype=np.int64)
    PL = np.full((m, beam), -1, dtype=np.int64)
    U[0, 0] = 0.0
    L[0, 0] = 0.0
    D[0, 0] = 0.0
    cap = beam * skip * (2 * window + 2)
    cu = np.empty(cap)
    cl = np.empty(cap)
    cd = np.empty(cap)
    cp = np.empty(cap, dtype=np.int64)
    cpl = np.empty(cap, dtype=np.int64)
    for i in range(1, m):
        nc = 0
        p = np.searchsorted(xs, ys[i])
        for back in range(1, skip + 1):
            li = i - back
            if li < 0:
                break
            for e in range(beam):
                if not L[li, e] < np.inf:
                    continue
                u0 = U[li, e]
                ds = ys[i] - ys[li]
                for j in range(p - window - 1, p + window + 1):
                    if j == p + window:
                        u1 = u0 + ds  # slope-one continuation
                    elif j < 0 or j >= xs.size:
                        continue
                    else:
                        u1 = xs[j]
                    if not u1 > u0:
                        continue
                    lv = max(L[li, e], abs(math.log((u1 - u0) / ds)))
                    if lv >= bound:
                        continue
                    dv = max(D[li, e], _seg_sup(kx, cx, ky, cy, ys[li], ys[i], u0, u1))
                    if lv + dv >= bound:
                        continue
                    cu[nc] = u1
                    cl[nc] = lv
                    cd[nc] = dv
                    cp[nc] = e
                    cpl[nc] = li
                    nc += 1
        if nc == 0:
            continue
        order = np.argsort(cl[:nc] + cd[:nc])
        kept = 0
        for q in order:
            dup = False
            for e in range(kept):
                if U[i, e] == cu[q]:
                    dup = True
                    break
            if dup:
                continue
            U[i, kept] = cu[q]
            L[i, kept] = cl[q]
            D[i, kept] = cd[q]
            P[i, kept] = cp[q]
            PL[i, kept] = cpl[q]
            kept += 1
            if kept == beam:
                break
    best = np.inf
    bi, be = -1, -1
    for i in range(m - skip, m):
        if i < 0:
            continue
        for e in range(beam):
            if not L[i, e] < np.inf:
                continue
            d = max(D[i, e], _tail(kx, cx, ky, cy, ys[i], U[i, e], end))
            c = L[i, e] + d
            if c < best:
                best = c
                bi, be = i, e
    if bi < 0:
        return np.empty(0), np.empty(0), np.inf
    ts = []
    us = []
    while bi >= 0 and be >= 0:
        ts.append(ys[bi])
        us.append(U[bi, be])
        bi, be = PL[bi, be], P[bi, be]
    return np.array(ts[::-1]), np.array(us[::-1]), best


@numba.njit(cache=True)
def _cost(kx, cx, ky, cy, ts, us, end):
    lv = 0.0
    dv = 0.0
    for k in range(ts.size - 1):
        lv = max(lv, abs(math.log((us[k + 1] - us[k]) / (ts[k + 1] - ts[k]))))
        dv = max(dv, _seg_sup(kx, cx, ky, cy, ts[k], ts[k + 1], us[k], us[k + 1]))
    dv = max(dv, _tail(kx, cx, ky, cy, ts[-1], us[-1], end))
    return lv + dv


@numba.njit(cache=True)
def _refine(kx, cx, ky, cy, ts, us, end, levels):
    """Coordinate search on interior knot images with shrinking steps."""
    us = us.copy()
    best = _cost(kx, cx, ky, cy, ts, us, end)
    n = ts.size
    if n < 2:
        return us, best
    for lev in range(1, levels + 1):
        frac = 0.25**lev
        improved = True
        rounds = 0
        while improved and rounds < 4:
            improved = False
            rounds += 1
            for k in range(1, n):
                lo = us[k - 1]
                hi = us[k + 1] if k + 1 < n else us[k] + 2.0 * (us[k] - lo)
                h = frac * min(us[k] - lo, hi - us[k])
                if not h > 0:
                    continue
                for sgn in (-1.0, 1.0):
                    old = us[k]
                    us[k] = old + sgn * h
                    c = _cost(kx, cx, ky, cy, ts, us, end)
                    if c < best - 1e-15:
                        best = c
                        improved = True
                    else:
                        us[k] = old
    return us, best


# ---------------------------------------------------------------- public API

REFINE_MAX_KNOTS = 64


def _knot_set(poly: PiecewisePoly, N: int) -> np.ndarray:
    j = poly.jump_times()
    j = j[(j > 0) & (j < N + 1)]
    return np.union1d(j, [float(N), float(N + 1)])


def _one_way(px: PiecewisePoly, py: PiecewisePoly, N: int, search: SearchParams, bound: float):
    xs = _knot_set(px, N)
    ys = np.concatenate(([0.0], _knot_set(py, N)))
    ts, us, cost = _beam_search(
        px.knots, px.coef, py.knots, py.coef, xs, ys, float(N + 1),
        search.beam, search.window, search.skip, bound,
    )
    if not np.isfinite(cost):
        return math.inf, None
    if search.refine_levels > 0 and ts.size <= REFINE_MAX_KNOTS:
        us, cost = _refine(px.knots, px.coef, py.knots, py.coef, ts, us, float(N + 1), search.refine_levels)
    return float(cost), TimeChange(ts, us)


def uniform_distance(x: CadlagPath, y: CadlagPath, N: int) -> float:
    """sup_t |k_N x - k_N y|."""
    px, py = truncate(x, N), truncate(y, N)
    return float(_seg_sup(px.knots, px.coef, py.knots, py.coef, 0.0, N + 2.0, 0.0, N + 2.0))


def delta_N(x: CadlagPath, y: CadlagPath, N: int, search: SearchParams | None = None):
    """(upper bound on delta_N, witness time change, x_to_y flag, uniform distance).

    The witness lambda acts on the time of y when x_to_y is False, that is the
    bound is |||lambda||| + |(k_N x) o lambda - k_N y|; with x_to_y True the roles
    are swapped.
    """
    search = search or SearchParams()
    px, py = truncate(x, N), truncate(y, N)
    unif = float(_seg_sup(px.knots, px.coef, py.knots, py.coef, 0.0, N + 2.0, 0.0, N + 2.0))
    best, wit, swapped = unif, TimeChange.identity(), False
    if unif == 0.0:
        return 0.0, wit, swapped, unif
    for flip, (a, b) in enumerate(((px, py), (py, px))):
        # prune against the uniform bound only, so the result does not depend on argument order
        c, w = _one_way(a, b, N, search, unif)
        if w is not None and c < best:
            best, wit, swapped = c, w, bool(flip)
    return best, wit, swapped, unif


def j1_distance(
    x: CadlagPath, y: CadlagPath, N_max: int, search: SearchParams | None = None
) -> J1Distance:
    _require_scalar(x)
    _require_scalar(y)
    if int(N_max) != N_max or N_max < 1:
        raise ValidationError("N_max must be a positive integer")
    per, unif, wits, flips = [], [], [], []
    for N in range(1, int(N_max) + 1):
        d, w, s, u = delta_N(x, y, N, search)
        per.append(d)
        unif.append(u)
        wits.append(w)
        flips.append(s)
    per_arr = np.array(per)
    delta = float(sum(2.0 ** -(k + 1) * min(1.0, d) for k, d in enumerate(per)))
    return J1Distance(delta, per_arr, np.array(unif), wits, flips)


def default_n_max(T: float) -> int:
    return int(math.ceil(T)) + 1
