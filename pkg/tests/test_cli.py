import json
import subprocess
import sys

import pytest

from hyperquantile.cli import main
from hyperquantile.paths import CadlagPath, save_path


@pytest.fixture
def ident(tmp_path):
    p = tmp_path / "p.json"
    save_path(CadlagPath.linear([0, 1], [0, 1]), p)
    return str(p)


@pytest.fixture(autouse=True)
def _env(tmp_path, monkeypatch):
    monkeypatch.setenv("HYPERQUANTILE_CACHE", str(tmp_path / "cache"))
    monkeypatch.delenv("QP_SEED", raising=False)


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_quantile_identity(capsys, ident):
    code, out, _ = call(capsys, "quantile", "--path-file", ident, "--t", "1", "--alpha", "0.5")
    d = json.loads(out)
    assert code == 0 and d["value"] == 0.5 and d["schema_version"] == 1
    assert d["bounds"] == [0.0, 1.0]


def test_alpha_out_of_range(capsys, ident):
    code, out, err = call(capsys, "quantile", "--path-file", ident, "--t", "1", "--alpha", "1.5")
    e = json.loads(err)
    assert code == 2 and out == ""
    assert e["type"] == "validation" and "alpha out of (0,1)" in e["error"]


def test_tau(capsys, ident):
    code, out, _ = call(capsys, "tau", "--path-file", ident, "--t", "1", "--alpha", "0.25")
    d = json.loads(out)
    assert code == 0 and d["tau"] == pytest.approx(0.25) and d["case"] == "above_start"


@pytest.mark.parametrize(
    "argv",
    [
        ["quantile", "--path-file", "/nonexistent.json", "--t", "1", "--alpha", "0.5"],
        ["quantile", "--t", "1", "--alpha", "0.5"],
        ["gen", "--kind", "walk", "--bogus"],
        ["gen", "--kind", "walk", "--threads", "0"],
        ["experiment", "--kind", "nope"],
        ["law", "--tau-mean", "2"],
        ["law", "--sigma", "0"],
    ],
)
def test_validation_errors_exit_2(capsys, argv):
    code, _, err = call(capsys, *argv)
    assert code == 2 and json.loads(err)["type"] == "validation"


def test_gen_roundtrip(capsys, tmp_path):
    out = tmp_path / "w.json"
    code, _, _ = call(capsys, "gen", "--kind", "walk", "--n", "20", "--seed", "3", "--out", str(out))
    assert code == 0
    d = json.loads(out.read_text())
    p = CadlagPath.from_dict(d)
    assert p.breakpoints.size == 21
    code, again, _ = call(capsys, "gen", "--kind", "walk", "--n", "20", "--seed", "3")
    assert json.loads(again) == d


def test_qp_seed_overrides(capsys, monkeypatch):
    _, a, _ = call(capsys, "gen", "--kind", "bm", "--n", "10", "--seed", "1")
    monkeypatch.setenv("QP_SEED", "1")
    _, b, _ = call(capsys, "gen", "--kind", "bm", "--n", "10", "--seed", "99")
    assert a == b
    monkeypatch.setenv("QP_SEED", "x")
    code, _, _ = call(capsys, "gen", "--kind", "bm", "--n", "10")
    assert code == 2


def test_law(capsys):
    code, out, _ = call(capsys, "law", "--alpha", "0.75")
    assert code == 0 and json.loads(out)["mean"] == pytest.approx(0.29204601854)
    _, out, _ = call(capsys, "law", "--tau-mean", "0.5")
    assert json.loads(out)["tau_mean_positive"] == pytest.approx(0.0908450569)
    _, out, _ = call(capsys, "law", "--alpha", "0.5", "--cdf-at", "0")
    assert json.loads(out)["cdf"] == pytest.approx(0.5)


def test_j1(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save_path(CadlagPath.step([0, 1], [0, 1]), a)
    save_path(CadlagPath.step([0, 1.1], [0, 1]), b)
    code, out, _ = call(capsys, "j1", "--a", str(a), "--b", str(b), "--n-max", "3")
    d = json.loads(out)
    assert code == 0 and len(d["per_N"]) == 3
    assert d["per_N"][2] == pytest.approx(0.0953101798)


def test_experiment_byte_identical(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n_list": [10, 20], "N": 1000, "median_seeds": 2, "median_N": 100, "seed": 4}))
    outs = []
    for i in range(2):
        out, csvf = tmp_path / f"r{i}.json", tmp_path / f"r{i}.csv"
        code, _, _ = call(capsys, "experiment", "--kind", "marginal", "--config", str(cfg),
                          "--no-timestamp", "--threads", "1", "--out", str(out), "--csv", str(csvf))
        assert code == 0
        outs.append((out.read_bytes(), csvf.read_bytes()))
    assert outs[0] == outs[1]
    d = json.loads(outs[0][0])
    assert d["schema_version"] == 1 and "timestamp" not in d
    assert outs[0][1].startswith(b"n,N,statistic,threshold,pass,name,schema_version\n")


def test_experiment_timestamp_present_by_default(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"cpp_paths": 50}))
    code, out, _ = call(capsys, "experiment", "--kind", "counterexample", "--config", str(cfg), "--threads", "1")
    assert code == 0 and "timestamp" in json.loads(out)


def test_console_entry_point(ident):
    r = subprocess.run(
        [sys.executable, "-m", "hyperquantile", "quantile", "--path-file", ident, "--t", "1", "--alpha", "0.5"],
        capture_output=True, text=True, check=False,
    )
    assert r.returncode == 0 and json.loads(r.stdout)["value"] == 0.5
