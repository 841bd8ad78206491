import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import paths
from oracles import bisect_quantile, grid_values
from hyperquantile import ValidationError
from hyperquantile.hitting import (
    HitCase,
    first_passage_down,
    first_passage_up,
    hitting_time,
    hitting_time_continuous,
    tau_one_sided_limits,
)
from hyperquantile.paths import CadlagPath, running_inf, running_sup
from hyperquantile.quantile import occupation_cdf, quantile

IDENT = CadlagPath.linear([0, 1], [0, 1])
STEP01 = CadlagPath.step([0, 1], [0, 1])
TENT = CadlagPath.linear([0, 1, 2], [0, 1, 0])
ALPHAS = st.floats(0.001, 0.999)


def test_examples():
    h = hitting_time(IDENT, 1, 0.3)
    assert h.level == pytest.approx(0.3) and h.tau == pytest.approx(0.3) and h.case is HitCase.ABOVE_START
    h = hitting_time(CadlagPath.linear([0, 1], [0, -1]), 1, 0.3)
    assert h.level == pytest.approx(-0.7) and h.tau == pytest.approx(0.7) and h.case is HitCase.BELOW_START
    h = hitting_time(STEP01, 2, 0.75)
    assert (h.level, h.tau, h.case) == (1, 1, HitCase.ABOVE_START)


def test_continuous_examples():
    assert hitting_time_continuous(IDENT, 1, 0.3).tau == pytest.approx(0.3)
    h = hitting_time_continuous(TENT, 2, 0.5)
    ref = bisect_quantile(TENT, 2, 0.5)
    s = (np.arange(1_000_000) + 0.5) * 2e-6
    first_cross = s[np.argmax(grid_values(TENT, 2, 1_000_000) >= ref)]
    assert h.level == pytest.approx(0.5, abs=1e-12)
    assert h.tau == pytest.approx(first_cross, abs=1e-5)
    c = hitting_time_continuous(CadlagPath.linear([0, 1], [0, 0]), 1, 0.4)
    assert (c.tau, c.level, c.case) == (0.0, 0.0, HitCase.AT_START)


def test_continuous_variant_rejects_step_paths():
    with pytest.raises(ValidationError):
        hitting_time_continuous(STEP01, 2, 0.5)


def test_one_sided_examples():
    lim = tau_one_sided_limits(IDENT, 1, 0.3, h=0.01)
    assert (lim.left, lim.right) == pytest.approx((0.29, 0.31))
    lim = tau_one_sided_limits(STEP01, 2, 0.5, h=0.01)
    assert (lim.left, lim.right) == (0.0, 1.0)
    lim = tau_one_sided_limits(TENT, 2, 0.5, h=0.01)
    assert (lim.left, lim.right) == pytest.approx((0.49, 0.51))


def test_one_sided_default_step_and_validation():
    lim = tau_one_sided_limits(IDENT, 1, 0.3)
    assert lim.right - lim.left == pytest.approx(2e-3)
    with pytest.raises(ValidationError):
        tau_one_sided_limits(IDENT, 1, 0.005, h=0.01)


def test_to_dict_never_hit_is_null():
    from hyperquantile.hitting import HittingTime

    d = HittingTime(math.inf, HitCase.ABOVE_START, 1.0, never_hit=True, horizon=1.0).to_dict()
    assert d["tau"] is None and d["never_hit"] and d["after_horizon"]


@given(paths(kind="linear"), ALPHAS, st.floats(0.05, 40))
def test_linear_agreement(p, a, t):
    assert hitting_time(p, t, a).tau == hitting_time_continuous(p, t, a).tau


@given(paths(), ALPHAS, st.floats(0.05, 40))
def test_case_tag_and_hit_within_horizon(p, a, t):
    h = hitting_time(p, t, a)
    x0 = p.scalar_values[0]
    assert (h.case is HitCase.AT_START) == (h.level == x0)
    if h.case is HitCase.AT_START:
        assert h.tau == 0
    # the quantile is attained by the running extremum no later than t
    assert not h.never_hit
    assert h.tau <= t


@given(paths(kind="step"), ALPHAS, st.floats(0.05, 40))
def test_step_running_sup_reaches_level_at_tau(p, a, t):
    h = hitting_time(p, t, a)
    if h.case is not HitCase.ABOVE_START:
        return
    assert running_sup(p, h.tau) >= h.level
    for b in p.breakpoints[p.breakpoints < h.tau]:
        assert running_sup(p, b) < h.level


@given(paths(), st.lists(st.floats(-5, 5), min_size=2, max_size=12))
def test_up_passage_nondecreasing_left_continuous(p, nus):
    nus = sorted(n for n in nus if p.scalar_values[0] < n <= p.scalar_values.max())
    taus = [first_passage_up(p, n) for n in nus]
    assert all(x <= y for x, y in zip(taus, taus[1:]))
    v = p.scalar_values
    for n in nus:
        below = n - 1e-9
        assume(below > v[0])
        assert first_passage_up(p, below) <= first_passage_up(p, n)
        # a knot value in [below, n) can be a local maximum, where the passage time jumps;
        # otherwise the crossing segment moves by at most (n - below) / slope
        if not np.any((v >= below) & (v < n)) and p.is_continuous:
            slopes = np.abs(np.diff(v) / np.diff(p.breakpoints))
            bound = (n - below) / slopes[slopes > 0].min()
            assert first_passage_up(p, n) - first_passage_up(p, below) <= bound * (1 + 1e-9) + 1e-12


@given(paths(kind="step"), st.floats(-5, 5))
def test_up_passage_left_continuous_for_steps(p, nu):
    v = p.scalar_values
    assume(v[0] < nu <= v.max())
    below = np.nextafter(nu, -np.inf)
    assume(not np.any((v >= below) & (v < nu)))
    assert first_passage_up(p, below) == first_passage_up(p, nu)


@given(paths(), st.lists(st.floats(-5, 5), min_size=2, max_size=12))
def test_down_passage_nonincreasing_right_continuous(p, nus):
    v = p.scalar_values
    nus = sorted(n for n in nus if v.min() <= n < v[0])
    taus = [first_passage_down(p, n) for n in nus]
    assert all(x >= y for x, y in zip(taus, taus[1:]))
    for n in nus:
        above = np.nextafter(n, np.inf)
        if above < v[0]:
            # right continuity: nu slightly above gives the same passage up to interpolation
            assert abs(first_passage_down(p, above) - first_passage_down(p, n)) < 1e-6 or p.interpolation.value == "step"


@pytest.mark.parametrize("eps", [1e-1, 1e-2, 1e-3, 1e-4])
def test_tau_stable_under_small_perturbations(eps):
    # conditions: M != x0, F continuous and strictly increasing, tau at a proper crossing
    rng = np.random.default_rng(11)
    base = CadlagPath.linear([0, 0.3, 0.6, 1.0], [0, 1.0, -0.5, 0.4])
    h = hitting_time(base, 1, 0.6)
    assert h.case is HitCase.ABOVE_START
    F = occupation_cdf(base, 1)
    assert F.is_continuous
    errs = []
    for _ in range(20):
        warp = np.sort(rng.uniform(-eps, eps, size=2)) * 0.1
        bp = np.array([0, 0.3 + warp[0], 0.6 + warp[1], 1.0])
        vals = base.scalar_values + rng.uniform(-eps, eps, size=4)
        vals[0] = 0.0
        h2 = hitting_time(CadlagPath.linear(bp, vals), 1, 0.6)
        errs.append(abs(h2.tau - h.tau))
    assert max(errs) <= 20 * eps


def test_step_level_attained_by_horizon_on_random_paths():
    rng = np.random.default_rng(5)
    for _ in range(300):
        k = int(rng.integers(1, 10))
        p = CadlagPath.step(np.concatenate(([0], np.cumsum(rng.uniform(0.1, 1, k)))), rng.normal(size=k + 1))
        t = float(rng.uniform(0.1, 12))
        h = hitting_time(p, t, float(rng.uniform(0.01, 0.99)))
        assert running_inf(p, t) <= h.level <= running_sup(p, t)
        assert h.tau <= t and not h.never_hit
        assert quantile(p, t, 0.5).value == hitting_time(p, t, 0.5).level
