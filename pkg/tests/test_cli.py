import csv
import io
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crofton.cli import emit_theorem_table, main
from crofton.config import ConfigError, ExperimentConfig, input_hash, make_body


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# -- coefficient table -------------------------------------------------------

def test_table_flat_single_entry():
    rows = [r for r in _rows(emit_theorem_table(1, 2)) if r["n"] == "2" and r["sigma"] == "0.0"]
    assert [(r["j"], float(r["c_j_real"])) for r in rows] == [("0", 1.0)]


def test_table_sphere_second_coefficient():
    rows = [r for r in _rows(emit_theorem_table(1, 3)) if r["n"] == "3" and r["sigma"] == "1.0"]
    assert [float(r["c_j_real"]) for r in rows] == pytest.approx([1.0, -1 / (2 * math.pi)], rel=1e-12)


def test_table_flat_rows_have_one_nonzero():
    rows = _rows(emit_theorem_table(4, 8))
    for r in rows:
        if r["sigma"] == "0.0":
            assert (float(r["c_j_real"]) != 0) == (r["j"] == "0")
        assert float(r["c_j_imag"]) == 0


def test_table_bounds():
    with pytest.raises(ValueError):
        emit_theorem_table(3, 2)
    with pytest.raises(ValueError):
        emit_theorem_table(1, 11)


# -- config ------------------------------------------------------------------

finite = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), p=st.integers(2, 5), q=st.integers(0, 3), k=st.integers(1, 3),
       N=st.integers(1, 10**7), theta=st.floats(0.01, 1.5), eps=st.lists(st.floats(0.001, 1), min_size=3,
                                                                      max_size=6, unique=True))
def test_config_round_trip(seed, p, q, k, N, theta, eps):
    cfg = ExperimentConfig(kind="sweep", seed=seed, body={"name": "band", "theta": theta}, p=p, q=q,
                           k=k, N=N, eps=sorted(eps, reverse=True))
    cfg.validate()
    back = ExperimentConfig.loads(cfg.dumps())
    assert back == cfg
    assert input_hash(back) == input_hash(cfg)


def test_hash_changes_with_seed():
    a = ExperimentConfig(kind="coeffs", k=1, n=3, sigma=1.0, seed=1)
    b = ExperimentConfig(kind="coeffs", k=1, n=3, sigma=1.0, seed=2)
    assert input_hash(a) != input_hash(b)


@pytest.mark.parametrize("data", [
    {"kind": "mc-sphere", "p": 3, "k": 1, "body": {"name": "cap", "radius": 1.0}},
    {"kind": "coeffs", "k": 1, "n": 3, "sigma": 1.0, "colour": "red"},
    {"kind": "coeffs", "k": 1, "n": 3, "sigma": 1.0, "schema": 99},
    {"kind": "sweep", "seed": 1, "p": 2, "q": 1, "k": 1, "body": {"name": "equator"}, "eps": [0.1, 0.2, 0.05]},
    {"kind": "mc-flat", "seed": 1, "p": 2, "k": 1, "body": {"name": "circle"}},
    {"kind": "table", "k_max": 2, "n_max": 1},
    {"kind": "nonsense"},
])
def test_invalid_configs_rejected(data):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(data)


def test_make_body_errors():
    with pytest.raises(ConfigError):
        make_body({"name": "band"}, 3)
    with pytest.raises(ConfigError):
        make_body({"name": "torus"}, 3)


# -- command line ------------------------------------------------------------

def _report(path):
    return json.loads((path / "report.json").read_text())


def test_coeffs_command(tmp_path, capsys):
    assert main(["coeffs", "--k", "1", "--n", "3", "--sigma", "1", "--output", str(tmp_path)]) == 0
    rep = _report(tmp_path)
    assert [r["c_j_real"] for r in rep["results"]] == pytest.approx([1.0, -1 / (2 * math.pi)])
    assert (tmp_path / "coeffs.csv").exists()
    assert "c_j_real" in capsys.readouterr().out


def test_table_command(tmp_path):
    assert main(["table", "--k-max", "2", "--n-max", "4", "--output", str(tmp_path), "--quiet"]) == 0
    assert (tmp_path / "theorem_table.csv").read_text() == emit_theorem_table(2, 4)


def test_mc_sphere_reports_are_byte_identical(tmp_path):
    args = ["mc-sphere", "--body", "cap", "--radius", "1.0", "--p", "3", "--k", "1", "--N", "20000",
            "--seed", "5", "--quiet"]
    assert main(args + ["--output", str(tmp_path / "a")]) == 0
    assert main(args + ["--workers", "1", "--output", str(tmp_path / "b")]) == 0
    a, b = _report(tmp_path / "a"), _report(tmp_path / "b")
    assert a["results"] == b["results"]
    assert main(args + ["--output", str(tmp_path / "c")]) == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "c" / "report.json").read_bytes()
    assert "wall_seconds" in json.loads((tmp_path / "a" / "timing.json").read_text())


def test_mc_flat_command(tmp_path):
    assert main(["mc-flat", "--body", "circle", "--p", "2", "--k", "1", "--N", "20000", "--seed", "3",
                 "--output", str(tmp_path), "--quiet"]) == 0
    (res,) = _report(tmp_path)["results"]
    assert abs(res["value_re"] - 2 * math.pi) < 5 * res["stderr"]


def test_sweep_command_from_config(tmp_path):
    cfg = {"kind": "sweep", "seed": 2, "space": "pseudosphere", "p": 2, "q": 1, "k": 1,
           "body": {"name": "band", "theta": 0.5}, "eps": [0.2, 0.1, 0.05], "N": 20000}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["sweep", "--config", str(path), "--output", str(tmp_path / "out"), "--quiet"]) == 0
    rows = _rows((tmp_path / "out" / "sweep.csv").read_text())
    assert [float(r["epsilon"]) for r in rows] == [0.2, 0.1, 0.05]
    assert "extrapolated_re" in _report(tmp_path / "out")["results"][-1]


def test_verify_exit_codes(tmp_path):
    assert main(["verify", "--suite", "coeffs", "--output", str(tmp_path / "ok"), "--quiet"]) == 0
    cfg = {"kind": "verify", "suite": "normalization",
           "tolerances": {"check_normalization": {"N": 2000, "n_se": 1e-9}}}
    path = tmp_path / "strict.json"
    path.write_text(json.dumps(cfg))
    assert main(["verify", "--config", str(path), "--output", str(tmp_path / "bad"), "--quiet"]) == 1
    assert _report(tmp_path / "bad")["passed"] is False


@pytest.mark.parametrize("argv", [
    ["mc-sphere", "--body", "cap", "--radius", "1", "--p", "3", "--k", "1"],
    ["mc-sphere", "--body", "band", "--p", "3", "--k", "1", "--seed", "1"],
    ["sweep", "--body", "equator", "--p", "2", "--q", "1", "--k", "1", "--seed", "1", "--eps", "0.1,0.2,0.05"],
    ["verify", "--config", "/nonexistent/cfg.json"],
])
def test_error_exit_code(argv, tmp_path, capsys):
    assert main(argv + ["--output", str(tmp_path)]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_verify_unknown_override(tmp_path):
    cfg = {"kind": "verify", "suite": "coeffs", "tolerances": {"check_nothing": {}}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["verify", "--config", str(path), "--output", str(tmp_path / "o")]) == 2
