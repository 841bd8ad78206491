"""Reference laws for the alpha-quantile of a projected Brownian motion.

For X = Sigma W and a projection gamma, gamma . X is a Brownian motion with
volatility sigma = |gamma' Sigma|.  Its alpha-quantile over [0, T] has the law
of S + I with S and I independent, S the supremum of a Brownian motion over
[0, alpha T] (half-normal, scale sigma sqrt(alpha T)) and I the infimum over
[0, (1 - alpha) T] (negative half-normal, scale sigma sqrt((1 - alpha) T)).

Normal CDF and survival function come from ``scipy.special.ndtr``, which is
accurate to double precision over the whole real line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from .errors import ValidationError
from .quantile import _check_alpha

TAIL_SD = 8.0


@dataclass(frozen=True, eq=False)
class BrownianSpec:
    Sigma: np.ndarray
    gamma: np.ndarray
    T: float = 1.0

    def __post_init__(self):
        S = np.atleast_2d(np.asarray(self.Sigma, float))
        g = np.atleast_1d(np.asarray(self.gamma, float))
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ValidationError("Sigma must be a square matrix")
        if g.ndim != 1 or g.size != S.shape[0]:
            raise ValidationError(f"gamma has dimension {g.size}, Sigma is {S.shape[0]}x{S.shape[1]}")
        if not (np.all(np.isfinite(S)) and np.all(np.isfinite(g))):
            raise ValidationError("Sigma and gamma must be finite")
        if not (float(self.T) > 0 and math.isfinite(self.T)):
            raise ValidationError("horizon T must be positive")
        object.__setattr__(self, "Sigma", S)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "T", float(self.T))

    @classmethod
    def scalar(cls, sigma: float = 1.0, T: float = 1.0) -> "BrownianSpec":
        return cls(np.array([[float(sigma)]]), np.array([1.0]), T)

    @property
    def dimension(self) -> int:
        return self.Sigma.shape[0]

    @property
    def nondegenerate(self) -> bool:
        """Sigma Sigma' positive definite."""
        return bool(np.linalg.matrix_rank(self.Sigma) == self.dimension)

    @property
    def sigma_eff(self) -> float:
        return effective_sigma(self)


def effective_sigma(spec: BrownianSpec) -> float:
    """|gamma' Sigma|, the volatility of gamma . X."""
    return float(np.linalg.norm(spec.gamma @ spec.Sigma))


def _scales(spec: BrownianSpec, alpha: float) -> tuple[float, float]:
    s = effective_sigma(spec)
    return s * math.sqrt(alpha * spec.T), s * math.sqrt((1 - alpha) * spec.T)


def mean_quantile(spec: BrownianSpec, alpha: float) -> float:
    alpha = _check_alpha(alpha)
    s, T = effective_sigma(spec), spec.T
    return s * (math.sqrt(2 * alpha * T) - math.sqrt(2 * (1 - alpha) * T)) / math.sqrt(math.pi)


@dataclass(frozen=True, eq=False)
class QuantileLaw:
    alpha: float
    T: float
    sigma_eff: float
    quad_tol: float
    cdf: Callable
    pdf: Callable
    mean: float

    def expect(self, f: Callable[[float], float], quad_tol: float | None = None) -> float:
        """E[f(M)] by adaptive quadrature of f against the density."""
        a, b = _scales_from(self)
        span = TAIL_SD * math.hypot(a, b)
        tol = self.quad_tol if quad_tol is None else quad_tol
        val, _ = integrate.quad(lambda m: f(m) * self.pdf(m), -span, span, epsabs=tol, limit=400, points=[0.0])
        return float(val)


def _scales_from(law: QuantileLaw) -> tuple[float, float]:
    return law.sigma_eff * math.sqrt(law.alpha * law.T), law.sigma_eff * math.sqrt((1 - law.alpha) * law.T)


def _phi(x):
    return np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


def quantile_law(spec: BrownianSpec, alpha: float, quad_tol: float = 1e-8) -> QuantileLaw:
    """Law of S + I with CDF by quadrature and density in closed form.

    CDF(m) = P(S <= m) + int_{m+}^{inf} f_S(s) P(I <= m - s) ds, where
    P(S <= m) = 2 Phi(m+/a) - 1 and P(I <= z) = 2 Phi(z/b) for z <= 0.  The
    integral is cut at m+ + 8a.
    """
    alpha = _check_alpha(alpha)
    if not (quad_tol > 0):
        raise ValidationError("quad_tol must be positive")
    s = effective_sigma(spec)
    if not s > 0:
        raise ValidationError("sigma_eff must be positive")
    a, b = _scales(spec, alpha)
    c = math.hypot(a, b)

    def cdf(m):
        m_arr = np.atleast_1d(np.asarray(m, float))
        mp = np.maximum(m_arr, 0.0)
        head = 2 * ndtr(mp / a) - 1

        def integrand(u):
            # s = mp + u*TAIL_SD*a, u in [0,1]
            sv = mp + u * TAIL_SD * a
            return (2 / a) * _phi(sv / a) * 2 * ndtr((m_arr - sv) / b) * TAIL_SD * a

        tail, _ = integrate.quad_vec(integrand, 0.0, 1.0, epsabs=quad_tol / 2, epsrel=0)
        out = np.clip(head + tail, 0.0, 1.0)
        out = np.where(np.isneginf(m_arr), 0.0, np.where(np.isposinf(m_arr), 1.0, out))
        return float(out[0]) if np.ndim(m) == 0 else out.reshape(np.shape(m))

    def pdf(m):
        m_arr = np.asarray(m, float)
        # density of S + I: (4/(ab)) int_{m+}^inf phi(s/a) phi((m-s)/b) ds, completed square
        k = (np.maximum(m_arr, 0.0) - m_arr * a * a / (c * c)) * c / (a * b)
        out = (4 / c) * _phi(m_arr / c) * ndtr(-k)
        return float(out) if np.ndim(m) == 0 else out

    return QuantileLaw(alpha, spec.T, s, quad_tol, cdf, pdf, mean_quantile(spec, alpha))


def _check_beta(beta) -> float:
    b = float(beta)
    if not (0.0 < b <= 1.0):
        raise ValidationError("beta out of (0,1]")
    return b


def expected_tau_positive(beta: float) -> float:
    """E[1{M > 0} tau] for unit volatility and T = 1."""
    b = _check_beta(beta)
    return (math.asin(math.sqrt(b)) - math.sqrt((1 - b) * b)) / math.pi


def joint_density_positive(u, b):
    """b / (pi sqrt(u^3 (1-u))) exp(-b^2 / (2u)) on 0 < u < 1, b > 0."""
    u_arr = np.asarray(u, float)
    b_arr = np.asarray(b, float)
    if np.any((u_arr <= 0) | (u_arr >= 1)):
        raise ValidationError("u out of (0,1)")
    if np.any(b_arr <= 0):
        raise ValidationError("b must be positive")
    out = b_arr / (math.pi * np.sqrt(u_arr**3 * (1 - u_arr))) * np.exp(-(b_arr**2) / (2 * u_arr))
    return float(out) if out.ndim == 0 else out
