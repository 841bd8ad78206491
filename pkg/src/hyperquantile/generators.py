"""Seeded path generators: Donsker walks, grid Brownian motion, compound Poisson.

Every draw comes from ``PCG64`` seeded by ``SeedSequence(seed, spawn_key=(stream,))``,
so a ``(seed, stream)`` pair pins a path bit for bit.  Batch generators split
the N paths into fixed-size chunks and give chunk ``c`` the stream ``c``; the
output is therefore the same whatever the number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator

import numpy as np

from ._kernels import grid_functionals, rademacher_rows
from .errors import ValidationError
from .paths import CadlagPath, Interpolation

CHUNK_ROWS = 32


@dataclass(frozen=True)
class RngConfig:
    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed) & (2**64 - 1), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(ss))


class IncrementLaw(Enum):
    RADEMACHER = "rademacher"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class WalkSpec:
    n: int
    d: int = 1
    Sigma: np.ndarray | None = None
    increment_law: IncrementLaw = IncrementLaw.RADEMACHER
    T: float = 1.0

    def __post_init__(self):
        if int(self.n) < 1 or int(self.n) != self.n:
            raise ValidationError("n must be a positive integer")
        if int(self.d) < 1:
            raise ValidationError("d must be a positive integer")
        if not (float(self.T) > 0 and math.isfinite(self.T)):
            raise ValidationError("horizon T must be positive")
        S = np.eye(self.d) if self.Sigma is None else np.atleast_2d(np.asarray(self.Sigma, float))
        if S.shape != (self.d, self.d) or not np.all(np.isfinite(S)):
            raise ValidationError(f"Sigma must be a finite {self.d}x{self.d} matrix")
        object.__setattr__(self, "Sigma", S)
        object.__setattr__(self, "increment_law", IncrementLaw(self.increment_law))

    @property
    def steps(self) -> int:
        return math.ceil(round(self.n * self.T, 9))

    @property
    def on_grid(self) -> bool:
        """True when T is a whole number of steps, so batch kernels apply."""
        return abs(self.n * self.T - self.steps) < 1e-9

    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) / self.n


class JumpLaw(Enum):
    EXP = "exp"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class CompoundPoissonSpec:
    rate: float
    T: float = 1.0
    jump_law: JumpLaw = JumpLaw.EXP
    jump_mean: float = 1.0

    def __post_init__(self):
        if not float(self.rate) > 0:
            raise ValidationError("rate must be positive")
        if not float(self.T) > 0:
            raise ValidationError("horizon T must be positive")
        if not float(self.jump_mean) > 0:
            raise ValidationError("jump_mean must be positive")
        object.__setattr__(self, "jump_law", JumpLaw(self.jump_law))


def _rademacher_raw(gen: np.random.Generator, rows: int, K: int, d: int) -> np.ndarray:
    return gen.bit_generator.random_raw(rows * ((K * d + 63) // 64))


def _signs(raw: np.ndarray, K: int, d: int) -> np.ndarray:
    bits = np.unpackbits(raw.astype("<u8").view(np.uint8), bitorder="little")[: K * d]
    return (2 * bits.astype(np.int64) - 1).reshape(K, d)


def _increments(spec: WalkSpec, gen: np.random.Generator) -> np.ndarray:
    K, d = spec.steps, spec.d
    if spec.increment_law is IncrementLaw.RADEMACHER:
        return _signs(_rademacher_raw(gen, 1, K, d), K, d)
    return gen.standard_normal((K, d))


def gen_walk(spec: WalkSpec, rng: RngConfig) -> CadlagPath:
    """Step path with values S_k Sigma' / sqrt(n) at times k/n."""
    z = _increments(spec, rng.generator())
    s = np.vstack([np.zeros((1, spec.d)), np.cumsum(z, axis=0)])
    return CadlagPath(spec.times(), (s @ spec.Sigma.T) / math.sqrt(spec.n), Interpolation.STEP)


def gen_bm_grid(spec: WalkSpec, rng: RngConfig) -> CadlagPath:
    """Linear interpolation of Sigma W on the grid k/n."""
    if spec.increment_law is not IncrementLaw.GAUSSIAN:
        raise ValidationError("gen_bm_grid needs Gaussian increments")
    z = rng.generator().standard_normal((spec.steps, spec.d))
    s = np.vstack([np.zeros((1, spec.d)), np.cumsum(z, axis=0)])
    return CadlagPath(spec.times(), (s @ spec.Sigma.T) / math.sqrt(spec.n), Interpolation.LINEAR)


def gen_compound_poisson(spec: CompoundPoissonSpec, rng: RngConfig) -> CadlagPath:
    gen = rng.generator()
    k = gen.poisson(spec.rate * spec.T)
    times = np.sort(gen.uniform(0.0, spec.T, size=k))
    if spec.jump_law is JumpLaw.EXP:
        sizes = gen.exponential(spec.jump_mean, size=k)
    else:
        sizes = gen.uniform(0.0, 2 * spec.jump_mean, size=k)
    return CadlagPath.step(np.concatenate(([0.0], times)), np.concatenate(([0.0], np.cumsum(sizes))))


def coupled_walks(
    n: int, rng: RngConfig, factor: int = 4, T: float = 1.0
) -> tuple[CadlagPath, CadlagPath]:
    """Gaussian walks at resolutions n and factor*n built from the same increments.

    The coarse increment over [k/n, (k+1)/n) is the sum of the ``factor`` fine
    ones, rescaled so both walks have unit variance per unit time.
    """
    fine = WalkSpec(n * factor, T=T, increment_law=IncrementLaw.GAUSSIAN)
    coarse = WalkSpec(n, T=T, increment_law=IncrementLaw.GAUSSIAN)
    if not (fine.on_grid and coarse.on_grid):
        raise ValidationError("coupling needs nT to be an integer")
    z = rng.generator().standard_normal(fine.steps)
    sf = np.concatenate(([0.0], np.cumsum(z))) / math.sqrt(fine.n)
    return CadlagPath.step(coarse.times(), sf[::factor]), CadlagPath.step(fine.times(), sf)


# ---------------------------------------------------------------- batches


def _projected_coef(spec: WalkSpec, gamma) -> np.ndarray:
    g = np.atleast_1d(np.asarray(gamma, float))
    if g.size != spec.d:
        raise ValidationError(f"projection has dimension {g.size}, walk has dimension {spec.d}")
    return (g @ spec.Sigma) / math.sqrt(spec.n)


def projected_chunk(spec: WalkSpec, gamma, rows: int, rng: RngConfig, linear: bool) -> np.ndarray:
    """rows x (K+1) projected values; row 0 equals the single path drawn with ``rng``."""
    K, d = spec.steps, spec.d
    coef = _projected_coef(spec, gamma)
    gen = rng.generator()
    if spec.increment_law is IncrementLaw.RADEMACHER and not linear:
        return rademacher_rows(_rademacher_raw(gen, rows, K, d), rows, K, coef)
    z = gen.standard_normal((rows, K, d)) @ coef
    out = np.empty((rows, K + 1))
    out[:, 0] = 0.0
    np.cumsum(z, axis=1, out=out[:, 1:])
    return out


@dataclass(frozen=True)
class BatchResult:
    """Per-path functionals for a batch; arrays of shape (N, len(alphas))."""

    alphas: np.ndarray
    M: np.ndarray
    tau: np.ndarray
    case: np.ndarray
    inf: np.ndarray
    sup: np.ndarray
    terminal: np.ndarray = field(default_factory=lambda: np.empty(0))

    def column(self, alpha: float) -> int:
        hits = np.flatnonzero(np.isclose(self.alphas, alpha, rtol=0, atol=1e-12))
        if hits.size == 0:
            raise ValidationError(f"alpha {alpha} was not computed in this batch")
        return int(hits[0])


def _chunk_job(args) -> tuple:
    spec, gamma, rows, seed, stream, linear, alphas = args
    v = projected_chunk(spec, gamma, rows, RngConfig(seed, stream), linear)
    M, tau, case, lo, hi = grid_functionals(v, alphas, linear, spec.n)
    bad = np.any((M < lo[:, None]) | (M > hi[:, None]))
    if bad:
        raise RuntimeError("bounds violated: quantile outside [inf, sup] on a simulated path")
    return M, tau, case, lo, hi, v[:, -1].copy()


def simulate_functionals(
    spec: WalkSpec,
    gamma,
    N: int,
    alphas,
    seed: int,
    linear: bool = False,
    workers: int = 1,
    progress: Callable[[int], None] | None = None,
) -> BatchResult:
    """Quantiles and hitting times of N projected paths on the grid.

    ``linear=False`` gives walk (step) paths; ``linear=True`` gives grid Brownian
    motion with Gaussian increments.  The running-extrema bounds are checked on
    every path and a violation raises.
    """
    if not spec.on_grid:
        raise ValidationError("batch simulation needs nT to be an integer")
    if linear and spec.increment_law is not IncrementLaw.GAUSSIAN:
        raise ValidationError("grid Brownian motion needs Gaussian increments")
    if int(N) < 1:
        raise ValidationError("N must be positive")
    a = np.asarray(list(alphas) if not np.isscalar(alphas) else [alphas], float)
    if np.any((a <= 0) | (a >= 1)):
        raise ValidationError("alpha out of (0,1)")
    jobs = [
        (spec, gamma, min(CHUNK_ROWS, N - s), seed, c, linear, a)
        for c, s in enumerate(range(0, N, CHUNK_ROWS))
    ]
    parts = []
    for i, part in enumerate(_map(jobs, workers)):
        parts.append(part)
        if progress is not None:
            progress(min((i + 1) * CHUNK_ROWS, N))
    cols = [np.concatenate([p[k] for p in parts]) for k in range(6)]
    return BatchResult(a, *cols)


def _map(jobs, workers: int) -> Iterator:
    if workers <= 1 or len(jobs) <= 1:
        return map(_chunk_job, jobs)
    pool = ProcessPoolExecutor(max_workers=workers)
    try:
        return iter(list(pool.map(_chunk_job, jobs, chunksize=max(1, len(jobs) // (4 * workers)))))
    finally:
        pool.shutdown()
