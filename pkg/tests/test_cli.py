import csv
import io
import json
import subprocess
import sys

import pytest

from ipsw.cli import INFLATION_COLUMNS, SIMULATE_COLUMNS, SWEEP_COLUMNS, fmt, json_value, main
from ipsw.scenarios import serialize_spec, toy_dgp


@pytest.fixture
def toy_cfg(tmp_path):
    path = tmp_path / "toy.toml"
    path.write_text(serialize_spec(toy_dgp()))
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_theory_json(toy_cfg, tmp_path):
    out = tmp_path / "t.json"
    assert main(["theory", "--config", str(toy_cfg), "--n", "150", "--m", "inf",
                 "--est", "semi_oracle", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    (rep,) = doc["reports"]
    assert rep["estimator_tag"] == "IPSW_SEMI" and rep["m"] == "inf" and rep["regime_lambda"] == "inf"
    assert rep["asymptotic_variance"] == pytest.approx(37.96)
    assert rep["variance_bound"] == pytest.approx(2 * 37.96 / 151 + 0.75**150 * 32.1)
    assert doc["constants"]["v_so"] == pytest.approx(37.96)
    manifest = json.loads((tmp_path / "t.manifest.json").read_text())
    assert set(manifest) == {"command_line", "config_hash", "seed", "tool_version", "timestamp", "outputs"}
    assert manifest["outputs"] == [str(out)]


def test_exit_codes(toy_cfg, tmp_path, capsys):
    assert main(["theory", "--config", str(tmp_path / "missing.toml"), "--n", "5"]) == 1
    assert "missing.toml" in capsys.readouterr().err
    assert main(["theory", "--config", str(toy_cfg), "--n", "5", "--m", "inf", "--est", "ipsw_est"]) == 2
    assert main(["simulate", "--config", str(toy_cfg), "--n", "5", "--m", "5", "--reps", "0"]) == 2
    assert main(["sweep", "--config", str(toy_cfg), "--n-grid", "", "--ratio", "1"]) == 2
    assert main(["simulate", "--config", str(toy_cfg), "--n", "5", "--est", "bogus"]) == 2
    assert main(["simulate", "--config", str(toy_cfg), "--n", "5", "--m", "0"]) == 2
    assert main(["simulate", "--config", str(toy_cfg), "--n", "5", "--adjust", "minimal"]) == 2
    assert main(["scenario", "nowhere", "simulate", "--n", "5"]) == 2
    err = capsys.readouterr().err
    assert "toy-extended" in err
    assert main(["simulate"]) == 2
    bad = tmp_path / "bad.toml"
    bad.write_text("[[strata]]\np_R = 1.0\n")
    assert main(["simulate", "--config", str(bad), "--n", "5"]) == 2


def test_simulate_csv_and_determinism(toy_cfg, tmp_path):
    args = ["simulate", "--config", str(toy_cfg), "--n", "150", "--m", "1000", "--reps", "1000",
            "--seed", "42", "--est", "ht,dm,ipsw_est,ipsw_est_pihat"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--workers", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == ",".join(SIMULATE_COLUMNS)
    rows = read_csv(a)
    assert [r["estimator"] for r in rows] == ["ht", "dm", "ipsw_est", "ipsw_est_pihat"]
    for r in rows[2:]:
        assert abs(float(r["mean"]) - 5.1) < 4 * float(r["mc_se"])


def test_simulate_to_stdout(toy_cfg, capsys):
    assert main(["simulate", "--config", str(toy_cfg), "--n", "20", "--reps", "1", "--est", "semi_oracle"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == ",".join(SIMULATE_COLUMNS)
    assert out[1].split(",")[3] == "NA"


def test_sweep_outputs(toy_cfg, tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--config", str(toy_cfg), "--n-grid", "50,100", "--ratio", "10",
                 "--reps", "200", "--seed", "1", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert out.read_text().splitlines()[0] == ",".join(SWEEP_COLUMNS)
    est = [r for r in rows if r["estimator"] == "ipsw_est"]
    assert len(est) == 2 and all(float(r["theory_asymptote"]) == pytest.approx(38.989) for r in est)
    doc = json.loads((tmp_path / "s.json").read_text())
    assert doc["regime"] == {"ratio": 10.0} and len(doc["rows"]) == 4
    out2 = tmp_path / "inf.csv"
    assert main(["sweep", "--config", str(toy_cfg), "--n-grid", "50", "--ratio", "inf",
                 "--reps", "50", "--out", str(out2)]) == 0
    assert {r["m"] for r in read_csv(out2)} == {"inf"}
    assert json.loads((tmp_path / "inf.json").read_text())["regime"] == {"ratio": "inf"}


def test_inflation_outputs(toy_cfg, tmp_path):
    out = tmp_path / "i.csv"
    assert main(["inflation", "--config", str(toy_cfg), "--shifts", "0,0.4,0.8", "--reps", "300",
                 "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == ",".join(INFLATION_COLUMNS)
    rows = read_csv(out)
    theory = [float(r["theory_factor"]) for r in rows]
    assert theory[0] == 1.0 and theory == sorted(theory)
    assert main(["inflation", "--config", str(toy_cfg), "--shifts", "1.5", "--reps", "10"]) == 2
    assert main(["inflation", "--config", str(toy_cfg), "--shifts", "0.5", "--est", "ipsw_est_pihat"]) == 2


def test_scenario_dispatch_identity(tmp_path):
    a = tmp_path / "scen.csv"
    flags = ["--n", "150", "--m", "1000", "--reps", "1000", "--seed", "7"]
    assert main(["scenario", "toy", "simulate", *flags, "--out", str(a)]) == 0
    cfg = tmp_path / "scen.config.toml"
    assert cfg.exists()
    b = tmp_path / "direct.csv"
    assert main(["simulate", "--config", str(cfg), *flags, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_scenario_overrides(tmp_path):
    out = tmp_path / "t.json"
    assert main(["scenario", "toy", "--set", "tau1=20", "theory", "--n", "10", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["constants"]["true_ate"] == pytest.approx(0.7 * 3 + 0.3 * 20)
    assert main(["scenario", "toy", "--set", "p_R1=3", "theory", "--n", "10"]) == 2
    assert main(["scenario", "toy", "--set", "oops", "theory", "--n", "10"]) == 2


def test_scenario_extended_inflation(tmp_path):
    out = tmp_path / "i.csv"
    assert main(["scenario", "toy-extended", "--set", "extended.balanced=false", "inflation",
                 "--shifts", "0,0.5", "--reps", "200", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert float(rows[1]["theory_factor"]) == pytest.approx(1 + 0.25 * (1 / 0.25 - 1))


def test_semi_synthetic_adjust(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["scenario", "semi-synthetic", "simulate", "--n", "500", "--m", "1000", "--reps", "20",
                 "--adjust", "minimal+glasgow", "--est", "ipsw_est_pihat", "--out", str(out)]) == 0
    assert len(read_csv(out)) == 1
    assert main(["scenario", "semi-synthetic", "simulate", "--n", "500", "--reps", "5",
                 "--adjust", "minimal+nothing"]) == 2


def test_formatting_helpers():
    assert fmt(None) == "NA" and fmt(float("nan")) == "NA" and fmt(float("inf")) == "inf"
    assert fmt(0.1) == "0.1" and fmt(3) == "3"
    assert json_value({"a": float("inf"), "b": [float("nan")]}) == {"a": "inf", "b": [None]}


def test_module_entry_point(toy_cfg):
    res = subprocess.run([sys.executable, "-m", "ipsw", "theory", "--config", str(toy_cfg), "--n", "3"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "v_so" in json.loads(res.stdout)["constants"]
