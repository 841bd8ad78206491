"""Batch kernels for paths on the uniform grid k/n, one path per row.

Rows hold projected values v_0..v_K with K = nT.  Step rows hold v_k on
[k/n, (k+1)/n); linear rows interpolate.  Results agree with the scalar
routines in :mod:`quantile` and :mod:`hitting` up to float rounding.
"""

from __future__ import annotations

import math

import numba
import numpy as np


@numba.njit(cache=True)
def _rank(alpha, K):
    # smallest c with c / K >= alpha
    c = int(math.ceil(alpha * K))
    while c < K and c / K < alpha:
        c += 1
    while c > 1 and (c - 1) / K >= alpha:
        c -= 1
    return max(c, 1)


@numba.njit(cache=True)
def _tau(v, m, linear, scale):
    x0 = v[0]
    if m == x0:
        return 0.0, 0
    up = m > x0
    for k in range(1, v.size):
        hit = v[k] >= m if up else v[k] <= m
        if hit:
            if not linear or v[k] == m:
                return k * scale, 1 if up else -1
            a, b = v[k - 1], v[k]
            return ((k - 1) + (m - a) / (b - a)) * scale, 1 if up else -1
    return np.inf, 1 if up else -1


@numba.njit(cache=True)
def _step_quantile(v, alpha):
    K = v.size - 1
    r = _rank(alpha, K)
    return np.partition(v[:K].copy(), r - 1)[r - 1]


@numba.njit(cache=True)
def _linear_quantile(v, alpha):
    K = v.size - 1
    lo = np.minimum(v[:-1], v[1:])
    hi = np.maximum(v[:-1], v[1:])
    r = _rank(alpha, K)
    # fewer than r segments start below a, at least r have ended by b
    a = np.partition(lo.copy(), r - 1)[r - 1]
    b = np.partition(hi.copy(), r - 1)[r - 1]
    target = alpha * K
    base = 0.0
    slope = 0.0
    pos = np.empty(2 * K)
    dsl = np.empty(2 * K)
    jmp = np.empty(2 * K)
    ne = 0
    for k in range(K):
        l, h = lo[k], hi[k]
        if h <= a:
            base += 1.0
        elif l < b:
            if h == l:
                pos[ne] = l
                dsl[ne] = 0.0
                jmp[ne] = 1.0
                ne += 1
                continue
            w = 1.0 / (h - l)
            if l <= a:
                base += (a - l) * w
                slope += w
            else:
                pos[ne] = l
                dsl[ne] = w
                jmp[ne] = 0.0
                ne += 1
            if h < b:
                pos[ne] = h
                dsl[ne] = -w
                jmp[ne] = 0.0
                ne += 1
    if base >= target:
        return a
    order = np.argsort(pos[:ne])
    y = a
    F = base
    for e in order:
        p = pos[e]
        nxt = F + slope * (p - y)
        if nxt >= target:
            return min(y + (target - F) / slope, p)
        F = nxt + jmp[e]
        y = p
        if F >= target:
            return p
        slope += dsl[e]
    if slope > 0:
        return min(y + (target - F) / slope, b)
    return b


@numba.njit(cache=True)
def grid_functionals(values, alphas, linear, n):
    """M, tau, case (+1 above, 0 at, -1 below start), inf and sup per row."""
    R = values.shape[0]
    A = alphas.size
    M = np.empty((R, A))
    tau = np.empty((R, A))
    case = np.empty((R, A), dtype=np.int8)
    lo = np.empty(R)
    hi = np.empty(R)
    scale = 1.0 / n
    for i in range(R):
        v = values[i]
        lo[i] = v.min()
        hi[i] = v.max()
        for j in range(A):
            if linear:
                m = _linear_quantile(v, alphas[j])
            else:
                m = _step_quantile(v, alphas[j])
            M[i, j] = m
            t, c = _tau(v, m, linear, scale)
            tau[i, j] = t
            case[i, j] = c
    return M, tau, case, lo, hi


@numba.njit(cache=True)
def rademacher_rows(raw, rows, K, coef):
    """Projected walk values from packed sign bits.

    Row i uses words [i*w, (i+1)*w) with w = ceil(K*d/64); bit b of the
    concatenated stream is step b // d, coordinate b % d (1 = +1).
    """
    d = coef.size
    w = (K * d + 63) // 64
    out = np.empty((rows, K + 1))
    s = np.zeros(d, dtype=np.int64)
    for i in range(rows):
        s[:] = 0
        out[i, 0] = 0.0
        base = i * w
        for k in range(K):
            acc = 0.0
            for j in range(d):
                b = k * d + j
                word = raw[base + b // 64]
                bit = (word >> np.uint64(b % 64)) & np.uint64(1)
                s[j] += 1 if bit else -1
                acc += coef[j] * s[j]
            out[i, k + 1] = acc
    return out
