import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from hyperquantile import ValidationError
from hyperquantile.stats import Sample, ks_one_sample, ks_two_sample, largest_atom, mc_mean

finite = st.floats(-1e6, 1e6, allow_nan=False)
samples = st.lists(finite, min_size=1, max_size=60)


def test_sample_sorted_and_ecdf():
    s = Sample([3.0, 1.0, 2.0, 2.0])
    assert s.values.tolist() == [1, 2, 2, 3] and s.n == 4
    assert s.ecdf(2.0) == 0.75 and s.ecdf(0.5) == 0.0
    with pytest.raises(ValidationError):
        Sample([])
    with pytest.raises(ValidationError):
        Sample([1.0, np.nan])


@pytest.mark.parametrize("seed", range(5))
def test_one_sample_matches_scipy(seed):
    x = np.random.default_rng(seed).normal(size=500)
    D, thr = ks_one_sample(x, sps.norm.cdf)
    assert D == pytest.approx(sps.kstest(x, "norm").statistic, abs=1e-15)
    assert thr(0.05) == pytest.approx(1.358 / np.sqrt(500))


@pytest.mark.parametrize("seed", range(5))
def test_two_sample_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=300), rng.normal(0.1, size=450).round(1)
    r = ks_two_sample(a, b)
    assert r.D == pytest.approx(sps.ks_2samp(a, b).statistic, abs=1e-15)
    assert r.n_eff == pytest.approx(300 * 450 / 750)


@pytest.mark.parametrize("c", [-1.0, 0.0, 0.7])
def test_constant_sample(c):
    r = ks_one_sample(np.full(20, c), sps.norm.cdf)
    assert r.D >= 1 - sps.norm.cdf(c)
    assert r.D == pytest.approx(max(1 - sps.norm.cdf(c), sps.norm.cdf(c)))


def test_three_point_sample_against_its_own_steps():
    s = Sample([1.0, 2.0, 3.0])
    # the right-continuous ecdf itself leaves only the left-limit gap, one full step
    assert ks_one_sample(s, s.ecdf).D == pytest.approx(1 / 3)
    # the midpoint of each step halves it
    mid = lambda x: np.searchsorted(s.values, x, side="left") / 3 + 1 / 6 * np.isin(x, s.values)
    assert ks_one_sample(s, mid).D == pytest.approx(1 / 6)


def test_ties_use_both_gaps():
    x = np.array([0.0, 0.0, 0.0, 1.0])
    r = ks_one_sample(x, lambda v: np.where(np.asarray(v) >= 0, 0.5, 0.0))
    # F_n(0-) = 0 vs 0.5 and F_n(0) = 0.75 vs 0.5
    assert r.D == pytest.approx(0.5)


def test_two_sample_trivial_cases():
    a = np.arange(10.0)
    assert ks_two_sample(a, a).D == 0.0
    assert ks_two_sample(a, a + 100).D == 1.0


@given(samples, samples)
def test_two_sample_symmetric_and_bounded(a, b):
    d1, d2 = ks_two_sample(a, b).D, ks_two_sample(b, a).D
    assert d1 == d2 and 0 <= d1 <= 1


@given(samples)
def test_one_sample_invariant_under_increasing_maps(x):
    x = np.asarray(x) / 1e6
    D = ks_one_sample(x, sps.norm.cdf).D
    Dt = ks_one_sample(np.exp(x), lambda y: sps.norm.cdf(np.log(y))).D
    assert 0 <= D <= 1
    assert Dt == pytest.approx(D, abs=1e-12)


def test_largest_atom_cases():
    assert largest_atom([1.0, 2.0, 3.0, 4.0]) == (1.0, 0.25)
    assert largest_atom(np.full(7, 2.5)) == (2.5, 1.0)
    v, f = largest_atom([0.0, 1.0, 1.0, 2.0, 1.0])
    assert v == 1.0 and f == pytest.approx(0.6)


def test_mc_mean():
    e = mc_mean([1.0, 2.0, 3.0, 4.0])
    assert e.mean == 2.5 and e.se == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert e.within(2.55, 0.1) and not e.within(2.7, 0.1)
    with pytest.raises(ValidationError):
        mc_mean([1.0])


def test_unknown_level_rejected():
    with pytest.raises(ValidationError):
        ks_one_sample([0.1, 0.2], sps.uniform.cdf).threshold_at(0.2)


def test_calibration_one_sample():
    rng = np.random.default_rng(20240602)
    passes = sum(ks_one_sample(rng.uniform(size=10_000), sps.uniform.cdf).passes(0.01) for _ in range(100))
    assert passes >= 98


def test_calibration_two_sample():
    rng = np.random.default_rng(20240603)
    passes = sum(
        ks_two_sample(rng.uniform(size=10_000), rng.uniform(size=10_000)).passes(0.01) for _ in range(100)
    )
    assert passes >= 98
