import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import paths
from hyperquantile import ValidationError
from hyperquantile.paths import CadlagPath, jump_times, load_path, project, running_inf, running_sup, save_path


def test_rejects_bad_breakpoints():
    with pytest.raises(ValidationError):
        CadlagPath.step([0, 1, 1], [0, 1, 2])
    with pytest.raises(ValidationError):
        CadlagPath.step([0.5, 1], [0, 1])
    with pytest.raises(ValidationError):
        CadlagPath.step([0, 1], [0, 1, 2])
    with pytest.raises(ValidationError):
        CadlagPath.linear([0, 1], [0, np.nan])


def test_cadlag_evaluation_and_constant_extension():
    p = CadlagPath.step([0, 1, 2], [0, 1, -1])
    assert p(0.999) == 0 and p(1.0) == 1 and p(5.0) == -1
    assert p.left_limit(1.0) == 0 and p.left_limit(2.0) == 1
    q = CadlagPath.linear([0, 2], [0, 1])
    assert q(1.0) == 0.5 and q(3.0) == 1.0


def test_project_examples():
    const = CadlagPath.step([0, 1], [[1, 1], [1, 1]])
    assert np.all(project(const, [2, 3]).scalar_values == 5)
    assert np.all(project(const, [0, 0]).scalar_values == 0)
    lin = CadlagPath.linear([0, 1], [[0, 0], [1, -1]])
    z = project(lin, [1, 1])
    assert np.all(z.scalar_values == 0) and z.interpolation is lin.interpolation
    with pytest.raises(ValidationError):
        project(lin, [1, 1, 1])


def test_running_extrema_examples():
    x = CadlagPath.linear([0, 1], [0, 1])
    assert running_sup(x, 0.7) == pytest.approx(0.7) and running_inf(x, 0.7) == 0
    s = CadlagPath.step([0, 1, 2], [0, 1, 1])
    assert running_sup(s, 1) == 1 and running_inf(s, 1) == 0
    d = CadlagPath.step([0, 1], [0, -2])
    assert running_sup(d, 0.5) == 0 and running_inf(d, 0.5) == 0


def test_jump_times_examples():
    assert jump_times(CadlagPath.linear([0, 1], [0, 3])).size == 0
    assert jump_times(CadlagPath.step([0, 1, 2], [0, 1, 1])).tolist() == [1.0]
    assert jump_times(CadlagPath.step([0, 1, 2], [0, 1, -1])).tolist() == [1.0, 2.0]


def test_json_round_trip(tmp_path):
    p = CadlagPath.linear([0, 0.5, 2], [[0, 1], [2, 3], [-1, 0]])
    f = tmp_path / "p.json"
    save_path(p, f)
    q = load_path(f)
    assert q.interpolation is p.interpolation
    assert np.array_equal(q.values, p.values) and np.array_equal(q.breakpoints, p.breakpoints)
    assert json.loads(f.read_text())["interpolation"] == "linear"


def test_load_rejects_malformed(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text('{"breakpoints": [0, 1]}')
    with pytest.raises(ValidationError):
        load_path(f)


@st.composite
def multi_paths(draw):
    k = draw(st.integers(1, 8))
    d = draw(st.integers(1, 3))
    bp = np.concatenate(([0.0], np.cumsum(draw(st.lists(st.floats(0.1, 1), min_size=k, max_size=k)))))
    vals = np.asarray(draw(st.lists(st.floats(-3, 3), min_size=(k + 1) * d, max_size=(k + 1) * d))).reshape(k + 1, d)
    return CadlagPath(bp, vals, draw(st.sampled_from(["step", "linear"])))


@given(multi_paths(), st.floats(-2, 2), st.floats(-2, 2), st.data())
def test_project_is_linear(p, a, b, data):
    d = p.dimension
    g1 = np.asarray(data.draw(st.lists(st.floats(-2, 2), min_size=d, max_size=d)))
    g2 = np.asarray(data.draw(st.lists(st.floats(-2, 2), min_size=d, max_size=d)))
    lhs = project(p, a * g1 + b * g2).scalar_values
    rhs = a * project(p, g1).scalar_values + b * project(p, g2).scalar_values
    assert np.allclose(lhs, rhs, atol=1e-9)


@given(paths(), st.lists(st.floats(0, 30), min_size=2, max_size=6))
def test_running_extrema_monotone_in_t(p, ts):
    ts = sorted(ts)
    sups = [running_sup(p, t) for t in ts]
    infs = [running_inf(p, t) for t in ts]
    assert all(a <= b for a, b in zip(sups, sups[1:]))
    assert all(a >= b for a, b in zip(infs, infs[1:]))


@given(paths(kind="step"), st.floats(0, 30))
def test_step_running_sup_is_max_of_visited_values(p, t):
    v = p.scalar_values[p.breakpoints <= t]
    assert running_sup(p, t) == v.max()


@settings(max_examples=50)
@given(multi_paths(), st.data())
def test_projected_jumps_within_coordinate_jumps(p, data):
    if p.interpolation.value == "linear":
        return
    d = p.dimension
    g = np.asarray(data.draw(st.lists(st.floats(-2, 2), min_size=d, max_size=d)))
    coord = set()
    for j in range(d):
        coord |= set(jump_times(CadlagPath.step(p.breakpoints, p.values[:, j])).tolist())
    assert set(jump_times(project(p, g)).tolist()) <= coord
