import json
import math

import numpy as np
import pytest

from excursia.cli import main


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def read_csv(path):
    meta = []
    rows = []
    header = None
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            meta.append(line)
        elif header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    return meta, header, rows


def test_validate_json_keys(capsys):
    code, payload = run_json(capsys, ["validate", "--model", "shifted_gaussian(alpha=2)"])
    assert code == 0
    rep = payload["report"]
    for key in ["verdict", "monotone", "nonnegative", "integrable", "tail_class", "tail_rate", "first_violation_t"]:
        assert key in rep
    assert rep["verdict"] == "invalid_oscillating"
    assert payload["metadata"]["config"]["tmax"] == 50.0  # defaults echoed


def test_sample_refusal_exit_code(capsys):
    code = main(["sample", "--model", "shifted_gaussian(alpha=2)", "--what", "excursion", "--n", "10"])
    out = capsys.readouterr().out
    assert code == 2
    payload = json.loads(out)
    assert payload["report"]["verdict"] == "invalid_oscillating"


def test_sample_text_and_binary(tmp_path, capsys):
    txt = tmp_path / "vals.txt"
    code = main(["sample", "--model", "diffusion(d=2)", "--what", "divisor", "--n", "64", "--seed", "3", "--output", str(txt)])
    assert code == 0
    vals = np.array([float(x) for x in txt.read_text().split()])
    assert vals.size == 64 and np.all(vals > 0)

    binf = tmp_path / "vals.bin"
    code = main(["sample", "--model", "diffusion(d=2)", "--what", "divisor", "--n", "64", "--seed", "3", "--binary", "--output", str(binf)])
    assert code == 0
    bvals = np.frombuffer(binf.read_bytes(), dtype="<f8")
    assert np.allclose(bvals, vals, rtol=0, atol=0)
    capsys.readouterr()


def test_sample_byte_identical_across_runs(tmp_path, capsys):
    f1, f2 = tmp_path / "a.txt", tmp_path / "b.txt"
    argv = ["sample", "--model", "matern(nu=2.5)", "--what", "excursion", "--n", "200", "--seed", "9", "--streams", "4"]
    assert main(argv + ["--output", str(f1)]) == 0
    assert main(argv + ["--output", str(f2)]) == 0
    assert f1.read_bytes() == f2.read_bytes()
    capsys.readouterr()


def test_e0_curve_rows(tmp_path, capsys):
    out = tmp_path / "e0.csv"
    assert main(["e0", "--what", "e0", "--model", "diffusion(d=2)", "--tmin", "0", "--tmax", "1", "--step", "0.5", "--output", str(out)]) == 0
    meta, header, rows = read_csv(out)
    assert header == ["t", "value", "log_value"]
    assert rows[0] == ["0", "1", "0"]
    assert any("config" in m for m in meta)

    rcl = tmp_path / "rcl.csv"
    t_star = 2.0 * np.arccosh(2.0)
    assert main(["e0", "--what", "rcl", "--model", "diffusion(d=2)", "--tmin", str(t_star), "--tmax", str(t_star), "--step", "1", "--output", str(rcl)]) == 0
    _, _, rrows = read_csv(rcl)
    assert float(rrows[0][1]) == pytest.approx(1.0 / 3.0, rel=1e-10)
    capsys.readouterr()


def test_survival_mc_curve_monotone(tmp_path, capsys):
    out = tmp_path / "mc.csv"
    assert main(["e0", "--what", "survival_mc", "--model", "diffusion(d=2)", "--tmin", "0", "--tmax", "20", "--step", "1", "--n", "20000", "--seed", "4", "--output", str(out)]) == 0
    _, header, rows = read_csv(out)
    assert header == ["t", "value", "log_value", "se"]
    logs = [float(r[2]) for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(logs, logs[1:]))
    capsys.readouterr()


def test_pole_json(capsys):
    code, payload = run_json(capsys, ["pole", "--model", "diffusion(d=2)"])
    assert code == 0
    assert payload["method"] == "pole"
    assert payload["theta"] == pytest.approx(0.1862, abs=1e-3)
    assert len(payload["bracket"]) == 2
    assert payload["residual"] <= 1e-9
    assert payload["reference"]["pole"] == 0.1862


def test_pole_refusal_and_numerical_failure(capsys):
    assert main(["pole", "--model", "shifted_gaussian(alpha=2)"]) == 2
    capsys.readouterr()
    assert main(["pole", "--model", "generalized_laplace(alpha=1)"]) == 2
    capsys.readouterr()


def test_persistency_json(capsys):
    code, payload = run_json(
        capsys,
        ["persistency", "--model", "diffusion(d=2)", "--n", "4000", "--k", "400", "--reps", "3", "--seed", "5", "--method", "both", "--threads", "2"],
    )
    assert code == 0
    methods = {e["method"] for e in payload["estimates"]}
    assert methods == {"tail_regression", "pole"}
    mc = next(e for e in payload["estimates"] if e["method"] == "tail_regression")
    for key in ["theta", "half_width", "n", "k", "reps", "seed"]:
        assert key in mc
    assert payload["reference"]["exceedance"] == 0.1858


def test_switch_csv(tmp_path, capsys):
    out = tmp_path / "switch.csv"
    assert main(["switch", "--dist", "exp:1.0", "--mode", "origin", "--horizon", "3", "--n", "20000", "--grid", "0.5:2.0:0.5", "--seed", "6", "--output", str(out)]) == 0
    _, header, rows = read_csv(out)
    assert header == ["t", "E_hat", "R_hat", "SE"]
    assert len(rows) == 4
    e_at_1 = float(rows[1][1])
    assert e_at_1 == pytest.approx(math.exp(-2.0), abs=0.02)

    out2 = tmp_path / "switch_stat.csv"
    assert main(["switch", "--dist", "exp:1.0", "--mode", "stationary", "--horizon", "3", "--n", "20000", "--grid", "0.5:2.0:0.5", "--seed", "6", "--output", str(out2)]) == 0
    _, _, rows2 = read_csv(out2)
    r_at_1 = float(rows2[1][2])
    assert r_at_1 == pytest.approx(math.exp(-2.0), abs=0.02)
    capsys.readouterr()


def test_switch_divisor_distribution(tmp_path, capsys):
    out = tmp_path / "switch_div.csv"
    code = main(["switch", "--dist", "divisor:diffusion(d=2)", "--mode", "stationary", "--horizon", "4", "--n", "4000", "--grid", "1:3:1", "--seed", "2", "--output", str(out)])
    assert code == 0
    _, header, rows = read_csv(out)
    assert header == ["t", "E_hat", "R_hat", "SE"]
    assert len(rows) == 3
    assert all(abs(float(r[1])) < 0.06 for r in rows)  # stationary mean ~ 0
    capsys.readouterr()


def test_reproduce_table2_small(tmp_path, capsys):
    out = tmp_path / "table2.csv"
    code = main(["reproduce", "table2", "--n", "4000", "--reps", "2", "--seed", "7", "--dmax", "2", "--k-divisor", "400", "--k-iia", "400", "--output", str(out)])
    assert code == 0
    _, header, rows = read_csv(out)
    assert header == ["d", "divisor_theta", "divisor_ref", "iia_theta", "iia_ref", "pole_theta"]
    assert len(rows) == 2
    d2 = rows[1]
    assert float(d2[2]) == 0.496  # published constant, not computed
    assert float(d2[4]) == 0.1858
    assert float(d2[5]) == pytest.approx(0.18621, abs=1e-4)
    capsys.readouterr()


def test_models_listing(capsys):
    code, payload = run_json(capsys, ["models"])
    assert code == 0
    names = " ".join(m["name"] for m in payload["models"])
    for frag in ["diffusion", "random_acceleration", "shifted_gaussian", "matern", "generalized_laplace"]:
        assert frag in names


def test_usage_errors_exit_one(capsys):
    assert main(["sample", "--model", "not_a_model", "--n", "5"]) == 1
    capsys.readouterr()
    assert main(["frobnicate"]) == 1
    capsys.readouterr()
    assert main(["switch", "--dist", "weird:1"]) == 1
    capsys.readouterr()


def test_threads_env_fallback(capsys, monkeypatch):
    monkeypatch.setenv("EXCURSIA_THREADS", "2")
    code, payload = run_json(capsys, ["persistency", "--model", "random_acceleration", "--n", "2000", "--k", "200", "--reps", "2", "--seed", "8"])
    assert code == 0
    assert payload["estimates"][0]["theta"] > 0
