"""Monte Carlo experiments: convergence, continuity, counterexample, pricing, J1.

Each ``run_*`` function is a pure function of its config.  Sub-seeds are
derived from ``(seed, tag, n, replicate)`` with ``SeedSequence``, and batch
simulations split paths into fixed chunks, so reports do not depend on the
number of workers.

The joint-law oracle (grid Brownian motion at high resolution) is cached on
disk under ``$HYPERQUANTILE_CACHE`` or ``~/.cache/hyperquantile``.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import os
import time
import warnings
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .brownian import BrownianSpec, expected_tau_positive, mean_quantile, quantile_law
from .errors import ValidationError
from .generators import (
    CompoundPoissonSpec,
    IncrementLaw,
    RngConfig,
    WalkSpec,
    coupled_walks,
    gen_bm_grid,
    gen_compound_poisson,
    gen_walk,
    simulate_functionals,
)
from .paths import jump_times, project
from .quantile import discontinuity_set, occupation_cdf, quantile_curve
from .skorokhod import SearchParams, default_n_max, j1_distance
from .stats import Sample, ks_one_sample, ks_two_sample, largest_atom, mc_mean

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
KS_LEVEL = 0.01


@dataclass(frozen=True)
class ExperimentConfig:
    alpha: float = 0.5
    alphas: tuple = ()
    T: float = 1.0
    gamma: tuple = (1.0,)
    Sigma: tuple = ((1.0,),)
    increment_law: str = "rademacher"
    n_list: tuple = (100, 1000, 10000)
    N: int = 10_000
    seed: int = 0
    # marginal
    ks_tol: float = 0.02
    mean_tol: float = 0.01
    median_seeds: int = 100
    median_N: int = 2000
    # grid Brownian motion and the cached oracle
    bm_n: int = 10_000
    bm_N: int = 10_000
    oracle_n: int = 100_000
    oracle_N: int = 100_000
    oracle_seed: int = 20240601
    # joint
    m0: float = 0.2
    v0: float = 0.3
    tau_tol: float = 0.01
    rect_tol: float = 0.02
    # pricing: f(m) = max(m, 0) ("call") or f = 1 ("unit"), growth |f|^p <= D (1 + |m|^p)
    payoff: str = "call"
    p: float = 2.0
    D: float = 1.0
    v: float = 0.3
    allowance: float = 0.01
    # continuity
    continuity_paths: int = 1000
    continuity_n: int = 1000
    alpha_grid: int = 99
    control_n: int = 10
    # counterexample
    cpp_rate: float = 1.0
    cpp_T: float = 10.0
    cpp_paths: int = 1000
    # J1 certificates
    j1_n_list: tuple = (100, 1000)
    j1_seeds: int = 100
    j1_factor: int = 4
    j1_beam: int = 8
    # guard rails
    max_steps: float = 5e11
    output: str | None = None

    def __post_init__(self):
        if not all(0 < float(a) < 1 for a in (self.alpha, *self.alphas)):
            raise ValidationError("alpha out of (0,1)")
        if not float(self.T) > 0:
            raise ValidationError("horizon T must be positive")
        if list(self.n_list) != sorted(set(self.n_list)) or min(self.n_list, default=1) < 1:
            raise ValidationError("n_list must be strictly increasing positive integers")
        if list(self.j1_n_list) != sorted(set(self.j1_n_list)):
            raise ValidationError("j1_n_list must be strictly increasing")
        S = np.asarray(self.Sigma, float)
        g = np.asarray(self.gamma, float)
        if S.ndim != 2 or S.shape != (g.size, g.size):
            raise ValidationError("Sigma must be d x d with d = len(gamma)")
        if self.payoff not in ("call", "unit"):
            raise ValidationError("payoff must be 'call' or 'unit'")
        if self.increment_law not in {x.value for x in IncrementLaw}:
            raise ValidationError(f"unknown increment_law {self.increment_law!r}")

    # ------------------------------------------------------------ io
    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        for k, v in d.items():
            if k == "Sigma":
                v = tuple(tuple(float(x) for x in row) for row in v)
            elif k in ("gamma", "alphas"):
                v = tuple(float(x) for x in v)
            elif k in ("n_list", "j1_n_list"):
                v = tuple(int(x) for x in v)
            kw[k] = v
        return cls(**kw)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        for k, v in out.items():
            if isinstance(v, tuple):
                out[k] = json.loads(json.dumps(v))
        return out

    # ------------------------------------------------------------ derived
    @property
    def alpha_set(self) -> tuple:
        return tuple(self.alphas) if self.alphas else (float(self.alpha),)

    @property
    def d(self) -> int:
        return len(self.gamma)

    def brownian(self) -> BrownianSpec:
        return BrownianSpec(np.asarray(self.Sigma, float), np.asarray(self.gamma, float), self.T)

    def walk(self, n: int, law: str | None = None) -> WalkSpec:
        return WalkSpec(
            n, self.d, np.asarray(self.Sigma, float), IncrementLaw(law or self.increment_law), self.T
        )


@dataclass
class Criterion:
    name: str
    value: float
    threshold: float
    passed: bool
    n: int | None = None
    N: int | None = None
    detail: str = ""
    required: bool = True


@dataclass
class ConvergenceReport:
    kind: str
    config: dict
    criteria: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    timestamp: str | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria if c.required)

    def criterion(self, name: str) -> Criterion:
        for c in self.criteria:
            if c.name == name:
                return c
        raise KeyError(name)

    def add(self, name, value, threshold, passed, **kw) -> Criterion:
        c = Criterion(name, float(value), float(threshold), bool(passed), **kw)
        self.criteria.append(c)
        return c

    def row(self, name, n, N, value, threshold=None, passed=None):
        self.rows.append(
            {"name": name, "n": n, "N": N, "statistic": float(value),
             "threshold": None if threshold is None else float(threshold),
             "pass": None if passed is None else bool(passed)}
        )

    def to_dict(self, timestamp: bool = True) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "passed": self.passed,
            "criteria": [dataclasses.asdict(c) for c in self.criteria],
            "rows": self.rows,
            "notes": self.notes,
            "config": self.config,
        }
        if timestamp:
            d["timestamp"] = self.timestamp or time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        return d

    def to_json(self, timestamp: bool = True) -> str:
        return json.dumps(self.to_dict(timestamp), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "N", "statistic", "threshold", "pass", "name", "schema_version"])
        for c in self.criteria:
            w.writerow([c.n, c.N, repr(c.value), repr(c.threshold), c.passed, c.name, SCHEMA_VERSION])
        for r in self.rows:
            w.writerow([r["n"], r["N"], repr(r["statistic"]), r["threshold"], r["pass"], r["name"], SCHEMA_VERSION])
        return buf.getvalue()


# ---------------------------------------------------------------- helpers


def subseed(seed: int, tag: str, *keys: int) -> int:
    """Deterministic 63-bit seed for (seed, tag, keys)."""
    ss = np.random.SeedSequence([int(seed) & (2**63 - 1), zlib.crc32(tag.encode()), *map(int, keys)])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def _check_budget(cfg: ExperimentConfig, steps: float, what: str) -> None:
    if steps > cfg.max_steps:
        raise ValidationError(
            f"{what} needs about {steps:.3g} path steps, above max_steps={cfg.max_steps:.3g}"
        )


def _require_ks_size(N: int) -> None:
    if N < 1000:
        raise ValidationError("KS-based criteria need N >= 1000 paths")


def cache_dir() -> Path:
    root = os.environ.get("HYPERQUANTILE_CACHE")
    return Path(root) if root else Path.home() / ".cache" / "hyperquantile"


def bm_oracle(cfg: ExperimentConfig, alphas=None, workers: int = 1, T: float | None = None):
    """(M, tau) of unit-volatility grid Brownian motion, cached on disk.

    Returns arrays of shape (oracle_N, len(alphas)).  Scale M by sigma_eff for
    other volatilities.
    """
    alphas = tuple(sorted(set(alphas or cfg.alpha_set)))
    T = float(cfg.T if T is None else T)
    key = f"bm_n{cfg.oracle_n}_N{cfg.oracle_N}_T{T:g}_s{cfg.oracle_seed}_a" + "-".join(f"{a:g}" for a in alphas)
    path = cache_dir() / f"{key}.npz"
    if path.exists():
        with np.load(path) as z:
            return z["M"], z["tau"]
    _check_budget(cfg, cfg.oracle_N * cfg.oracle_n * T, "the Brownian oracle")
    log.info("building Brownian oracle n=%d N=%d (cached at %s)", cfg.oracle_n, cfg.oracle_N, path)
    spec = WalkSpec(cfg.oracle_n, increment_law=IncrementLaw.GAUSSIAN, T=T)
    r = simulate_functionals(spec, [1.0], cfg.oracle_N, alphas, cfg.oracle_seed, linear=True, workers=workers)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp.npz")
    np.savez(tmp, M=r.M, tau=r.tau)
    os.replace(tmp, path)
    return r.M, r.tau


def _tabulated_cdf(law, points: int = 20001) -> Callable:
    c = law.sigma_eff * math.sqrt(law.T)
    grid = np.linspace(-9 * c, 9 * c, points)
    vals = np.maximum.accumulate(law.cdf(grid))
    return lambda m: np.interp(m, grid, vals, left=0.0, right=1.0)


def _payoff(kind: str) -> Callable:
    if kind == "call":
        return lambda m: np.maximum(m, 0.0)
    return lambda m: np.ones_like(np.asarray(m, float))


# ---------------------------------------------------------------- runs


def run_marginal_convergence(cfg: ExperimentConfig, workers: int = 1) -> ConvergenceReport:
    _require_ks_size(cfg.N)
    alphas = cfg.alpha_set
    steps = cfg.T * sum(n for n in cfg.n_list) * (cfg.N + cfg.median_seeds * cfg.median_N)
    _check_budget(cfg, steps, "marginal convergence")
    rep = ConvergenceReport("marginal", cfg.to_dict())
    bs = cfg.brownian()
    cdfs = {a: _tabulated_cdf(quantile_law(bs, a)) for a in alphas}
    gamma = np.asarray(cfg.gamma, float)
    final = cfg.n_list[-1]
    for n in cfg.n_list:
        r = simulate_functionals(cfg.walk(n), gamma, cfg.N, alphas, subseed(cfg.seed, "marginal", n), workers=workers)
        for j, a in enumerate(alphas):
            ks = ks_one_sample(Sample(r.M[:, j]), cdfs[a])
            thr = cfg.ks_tol
            rep.row(f"ks_M_alpha={a:g}", n, cfg.N, ks.D, thr, ks.D <= thr)
            est = mc_mean(r.M[:, j])
            rep.row(f"mean_M_alpha={a:g}", n, cfg.N, est.mean)
            if n == final:
                rep.add(f"ks_final_alpha={a:g}", ks.D, thr, ks.D <= thr, n=n, N=cfg.N,
                        detail=f"KS vs Brownian law; 1% level threshold {ks.threshold_at(KS_LEVEL):.4f}")
                target = mean_quantile(bs, a)
                gap = abs(est.mean - target)
                rep.add(f"mean_final_alpha={a:g}", gap, cfg.mean_tol, gap <= cfg.mean_tol, n=n, N=cfg.N,
                        detail=f"|mean(M) - {target:.6f}|")
    if cfg.median_seeds > 0:
        med = {a: [] for a in alphas}
        for n in cfg.n_list:
            Ds = np.empty((cfg.median_seeds, len(alphas)))
            for s in range(cfg.median_seeds):
                r = simulate_functionals(cfg.walk(n), gamma, cfg.median_N, alphas, subseed(cfg.seed, "median", n, s), workers=workers)
                for j, a in enumerate(alphas):
                    Ds[s, j] = ks_one_sample(Sample(r.M[:, j]), cdfs[a]).D
            for j, a in enumerate(alphas):
                m = float(np.median(Ds[:, j]))
                med[a].append(m)
                rep.row(f"median_ks_alpha={a:g}", n, cfg.median_N, m)
        for a in alphas:
            d = np.diff(med[a])
            rep.add(f"median_ks_decreasing_alpha={a:g}", float(d.max()) if d.size else 0.0, 0.0,
                    bool(np.all(d < 0)), N=cfg.median_N,
                    detail=f"medians over {cfg.median_seeds} seeds: {[round(x, 5) for x in med[a]]}")
    return rep


def run_mean_quantile(cfg: ExperimentConfig, workers: int = 1) -> ConvergenceReport:
    """Mean of M on grid Brownian paths against the closed form."""
    _check_budget(cfg, cfg.bm_n * cfg.bm_N * cfg.T, "grid Brownian mean")
    rep = ConvergenceReport("mean", cfg.to_dict())
    bs = cfg.brownian()
    # gamma . Sigma W has the law of sigma_eff times a scalar Brownian motion
    r = simulate_functionals(cfg.walk(cfg.bm_n, "gaussian"), np.asarray(cfg.gamma, float), cfg.bm_N,
                             cfg.alpha_set, subseed(cfg.seed, "bm_mean"), linear=True, workers=workers)
    for j, a in enumerate(cfg.alpha_set):
        est = mc_mean(r.M[:, j])
        target = mean_quantile(bs, a)
        gap = abs(est.mean - target)
        rep.add(f"bm_mean_alpha={a:g}", gap, cfg.mean_tol, gap <= cfg.mean_tol, n=cfg.bm_n, N=cfg.bm_N,
                detail=f"mean {est.mean:.6f} (se {est.se:.2g}) vs {target:.6f}")
    return rep


def run_joint_convergence(cfg: ExperimentConfig, workers: int = 1) -> ConvergenceReport:
    _require_ks_size(cfg.N)
    a = float(cfg.alpha)
    steps = cfg.T * (sum(cfg.n_list) * cfg.N + cfg.bm_n * cfg.bm_N)
    _check_budget(cfg, steps, "joint convergence")
    rep = ConvergenceReport("joint", cfg.to_dict())
    sig = cfg.brownian().sigma_eff
    # tau scales with T and the event {M > 0} is scale free
    target = cfg.T * expected_tau_positive(a)
    gamma = np.asarray(cfg.gamma, float)
    oM, oT = bm_oracle(cfg, (a,), workers)
    oM = oM[:, 0] * sig
    oT = oT[:, 0]
    rect_o = float(np.mean((oM > cfg.m0) & (oT > cfg.v0)))
    rep.notes.append(f"oracle: grid Brownian motion n={cfg.oracle_n}, N={cfg.oracle_N}, P(M>m0,tau>v0)={rect_o:.5f}")
    gaps = []
    final = cfg.n_list[-1]
    for n in cfg.n_list:
        r = simulate_functionals(cfg.walk(n), gamma, cfg.N, (a,), subseed(cfg.seed, "joint", n), workers=workers)
        M, tau = r.M[:, 0], r.tau[:, 0]
        est = mc_mean((M > 0) * tau)
        gap_tau = abs(est.mean - target)
        rect = float(np.mean((M > cfg.m0) & (tau > cfg.v0)))
        gaps.append(abs(rect - rect_o))
        rep.row("E[1{M>0}tau]", n, cfg.N, est.mean, target)
        rep.row("rectangle_gap", n, cfg.N, gaps[-1], cfg.rect_tol)
        if n == final:
            rep.add("tau_mean_walk", gap_tau, cfg.tau_tol, gap_tau <= cfg.tau_tol, n=n, N=cfg.N,
                    detail=f"estimate {est.mean:.5f} (se {est.se:.2g}) vs {target:.6f}")
            rep.add("rectangle_gap_final", gaps[-1], cfg.rect_tol, gaps[-1] <= cfg.rect_tol, n=n, N=cfg.N,
                    detail=f"P(M>{cfg.m0},tau>{cfg.v0}) walk {rect:.5f} vs oracle {rect_o:.5f}")
            ks = ks_two_sample(Sample(tau), Sample(oT))
            rep.add("tau_two_sample_ks", ks.D, ks.threshold_at(KS_LEVEL), ks.passes(KS_LEVEL), n=n, N=cfg.N,
                    detail="walk tau vs oracle tau, 1% level")
    d = np.diff(gaps)
    rep.add("rectangle_gap_decreasing", float(d.max()) if d.size else 0.0, 0.0, bool(np.all(d < 0)),
            required=False, detail=f"gaps {[round(g, 5) for g in gaps]}; informational, MC noise dominates at large n")
    bm = simulate_functionals(cfg.walk(cfg.bm_n, "gaussian"), gamma, cfg.bm_N, (a,),
                              subseed(cfg.seed, "joint_bm"), linear=True, workers=workers)
    est = mc_mean((bm.M[:, 0] > 0) * bm.tau[:, 0])
    gap = abs(est.mean - target)
    rep.add("tau_mean_bm", gap, cfg.tau_tol, gap <= cfg.tau_tol, n=cfg.bm_n, N=cfg.bm_N,
            detail=f"estimate {est.mean:.5f} (se {est.se:.2g}) vs {target:.6f}")
    return rep


def run_continuity_diagnostics(cfg: ExperimentConfig, workers: int = 1) -> ConvergenceReport:
    rep = ConvergenceReport("continuity", cfg.to_dict())
    grid = np.arange(1, cfg.alpha_grid + 1) / (cfg.alpha_grid + 1)
    spec = cfg.walk(cfg.continuity_n, "gaussian")
    gamma = np.asarray(cfg.gamma, float)

    def flats_in(paths_fn, count, tag):
        flat_pairs = 0
        with_flat = 0
        nonempty_u = 0
        for i in range(count):
            p = paths_fn(RngConfig(subseed(cfg.seed, tag), i))
            x = project(p, gamma)
            curve = quantile_curve(x, cfg.T)
            m = curve(grid)
            k = int(np.sum(np.diff(m) <= 0))
            flat_pairs += k
            with_flat += int(k > 0 or not curve.is_strictly_increasing)
            nonempty_u += int(len(discontinuity_set(x, cfg.T)) > 0)
        return flat_pairs, with_flat, nonempty_u

    fp, wf, nu = flats_in(lambda r: gen_bm_grid(spec, r), cfg.continuity_paths, "cont_bm")
    rep.add("bm_flat_pairs", fp, 0, fp == 0, n=cfg.continuity_n, N=cfg.continuity_paths,
            detail=f"{cfg.alpha_grid}-point alpha grid; paths with a flat piece: {wf}")
    rep.add("bm_nonempty_discontinuity_sets", nu, 0, nu == 0, n=cfg.continuity_n, N=cfg.continuity_paths)
    ctl = cfg.walk(cfg.control_n, "rademacher")
    fpc, wfc, nuc = flats_in(lambda r: gen_walk(ctl, r), cfg.continuity_paths, "cont_ctl")
    rep.add("control_walk_has_flats", fpc, 0, fpc > 0, n=cfg.control_n, N=cfg.continuity_paths,
            detail=f"coarse Rademacher walk; paths with flats: {wfc}, nonempty U: {nuc}")
    r = simulate_functionals(cfg.walk(cfg.bm_n, "gaussian"), gamma, cfg.bm_N, cfg.alpha_set,
                             subseed(cfg.seed, "cont_atom"), linear=True, workers=workers)
    for j, a in enumerate(cfg.alpha_set):
        _, frac = largest_atom(r.M[:, j])
        rep.add(f"bm_largest_atom_alpha={a:g}", frac, 2 / cfg.bm_N, frac <= 2 / cfg.bm_N, n=cfg.bm_n, N=cfg.bm_N)
    return rep


def run_counterexample(cfg: ExperimentConfig, workers: int = 1) -> ConvergenceReport:
    rep = ConvergenceReport("counterexample", cfg.to_dict())
    spec = CompoundPoissonSpec(cfg.cpp_rate, cfg.cpp_T)
    seed = subseed(cfg.seed, "cpp")
    many = 0
    shown = 0
    terminal = np.empty(cfg.cpp_paths)
    for i in range(cfg.cpp_paths):
        p = gen_compound_poisson(spec, RngConfig(seed, i))
        terminal[i] = p(cfg.cpp_T)
        jumps = jump_times(p)
        if np.sum(jumps <= cfg.cpp_T) < 2:
            continue
        many += 1
        F = occupation_cdf(p, cfg.cpp_T)
        curve = quantile_curve(p, cfg.cpp_T)
        shown += int(np.any(F.atoms > 0) and np.any(curve.flats))
    frac_shown = shown / many if many else 0.0
    rep.add("flat_in_every_multi_jump_path", frac_shown, 1.0, many > 0 and shown == many, N=many,
            detail=f"{shown} of {many} paths with >= 2 jumps have an atom and a flat")
    lam = cfg.cpp_rate * cfg.cpp_T
    p_expect = 1 - math.exp(-lam) * (1 + lam)
    frac = many / cfg.cpp_paths
    se = math.sqrt(p_expect * (1 - p_expect) / cfg.cpp_paths)
    rep.add("multi_jump_fraction", abs(frac - p_expect), 3 * se, abs(frac - p_expect) <= 3 * se,
            N=cfg.cpp_paths, detail=f"fraction {frac:.5f} vs {p_expect:.6f}")
    _, atom = largest_atom(terminal)
    rep.add("terminal_largest_atom", atom, 2 / cfg.cpp_paths, atom <= 2 / cfg.cpp_paths, N=cfg.cpp_paths)
    return rep


def run_pricing(cfg: ExperimentConfig, workers: int = 1) -> ConvergenceReport:
    a = float(cfg.alpha)
    _check_budget(cfg, cfg.T * sum(cfg.n_list) * cfg.N, "pricing")
    if IncrementLaw(cfg.increment_law) is not IncrementLaw.RADEMACHER:
        raise ValidationError("pricing uses bounded (Rademacher) increments")
    rep = ConvergenceReport("pricing", cfg.to_dict())
    f = _payoff(cfg.payoff)
    sig = cfg.brownian().sigma_eff
    oM, oT = bm_oracle(cfg, (a,), workers)
    oM = oM[:, 0] * sig
    oT = oT[:, 0]
    oracle = mc_mean(f(oM) * (oT > cfg.v))
    o_atom = float(np.mean(oT == cfg.v))
    rep.notes.append(f"oracle price {oracle.mean:.6f} (se {oracle.se:.2g}); oracle tau mass at v: {o_atom:g}")
    gamma = np.asarray(cfg.gamma, float)
    final = cfg.n_list[-1]
    law = quantile_law(cfg.brownian(), a)
    for n in cfg.n_list:
        r = simulate_functionals(cfg.walk(n), gamma, cfg.N, (a,), subseed(cfg.seed, "pricing", n), workers=workers)
        M, tau = r.M[:, 0], r.tau[:, 0]
        lhs = np.abs(f(M)) ** cfg.p
        if np.any(lhs > cfg.D * (1 + np.abs(M) ** cfg.p) * (1 + 1e-12)):
            msg = f"payoff violates |f|^p <= D(1+|m|^p) on the sampled range at n={n}"
            warnings.warn(msg, stacklevel=2)
            rep.notes.append(msg)
        price = mc_mean(f(M) * (tau > cfg.v))
        tol = 2 * math.hypot(price.se, oracle.se) + cfg.allowance
        gap = abs(price.mean - oracle.mean)
        rep.row("price", n, cfg.N, price.mean, oracle.mean)
        rep.row("price_gap", n, cfg.N, gap, tol, gap <= tol)
        if n == final:
            rep.add("price_gap_final", gap, tol, gap <= tol, n=n, N=cfg.N,
                    detail=f"walk {price.mean:.5f} (se {price.se:.2g}) vs oracle {oracle.mean:.5f}")
            p0 = mc_mean(f(M) * (tau > 0))
            ref = law.expect(lambda m: float(f(np.asarray(m))))
            g0 = abs(p0.mean - ref)
            rep.add("price_v0_vs_quadrature", g0, cfg.allowance, g0 <= cfg.allowance, n=n, N=cfg.N,
                    detail=f"walk {p0.mean:.5f} vs quadrature {ref:.6f}")
    return rep


def run_j1_certificates(cfg: ExperimentConfig, workers: int = 1) -> ConvergenceReport:
    rep = ConvergenceReport("j1", cfg.to_dict())
    search = SearchParams(beam=cfg.j1_beam)
    n_max = default_n_max(cfg.T)
    med = []
    for n in cfg.j1_n_list:
        ds = []
        for s in range(cfg.j1_seeds):
            x, y = coupled_walks(n, RngConfig(subseed(cfg.seed, "j1", n), s), cfg.j1_factor, cfg.T)
            ds.append(j1_distance(x, y, n_max, search).delta)
        med.append(float(np.median(ds)))
        rep.row("median_delta_coupled", n, cfg.j1_seeds, med[-1])
    d = np.diff(med)
    rep.add("coupled_median_decreasing", float(d.max()) if d.size else 0.0, 0.0, bool(np.all(d < 0)),
            N=cfg.j1_seeds, detail=f"medians {[round(m, 5) for m in med]} along n={list(cfg.j1_n_list)}")
    n = cfg.j1_n_list[-1]
    spec = WalkSpec(n, increment_law=IncrementLaw.GAUSSIAN, T=cfg.T)
    x = gen_walk(spec, RngConfig(subseed(cfg.seed, "j1_self"), 0))
    self_d = j1_distance(x, x, n_max, search).delta
    rep.add("self_distance_zero", self_d, 0.0, self_d == 0.0, n=n)
    ind = []
    for s in range(min(cfg.j1_seeds, 20)):
        x = gen_walk(spec, RngConfig(subseed(cfg.seed, "j1_ind_a"), s))
        y = gen_walk(spec, RngConfig(subseed(cfg.seed, "j1_ind_b"), s))
        ind.append(j1_distance(x, y, n_max, search).delta)
    m_ind = float(np.median(ind))
    rep.add("independent_bounded_away", m_ind, med[-1], m_ind > 2 * med[-1], n=n, N=len(ind),
            detail="control: median delta of independent walks exceeds twice the coupled median")
    return rep


RUNS = {
    "marginal": run_marginal_convergence,
    "mean": run_mean_quantile,
    "joint": run_joint_convergence,
    "continuity": run_continuity_diagnostics,
    "counterexample": run_counterexample,
    "pricing": run_pricing,
    "j1": run_j1_certificates,
}


def run(kind: str, cfg: ExperimentConfig, workers: int = 1) -> ConvergenceReport:
    try:
        fn = RUNS[kind]
    except KeyError:
        raise ValidationError(f"unknown experiment kind {kind!r}") from None
    return fn(cfg, workers=workers)
