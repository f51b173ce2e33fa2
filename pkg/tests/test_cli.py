import json
import math
import subprocess
import sys

import pytest

from qcatastrophe.cli import load_config, main


def run_cli(capsysbinary, *argv):
    code = main(list(argv))
    out = capsysbinary.readouterr()
    return code, out.out.decode(), out.err.decode()


def test_sweep_csv(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "sweep", "--model", "cusp", "--mu", "40", "--param", "A",
                           "--min", "-2", "--max", "2", "--steps", "9", "--format", "csv", "--resolution", "0.04")
    rows = out.splitlines()
    assert code == 0
    assert rows[0] == "model,mu,param_name,param,entropy_bits,method"
    assert len(rows) == 10
    assert all(r.startswith("cusp,40,A,") and r.endswith(",numeric") for r in rows[1:])


def test_asymptote_molar(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "asymptote", "--model", "molar", "--param", "gamma",
                           "--min", "0.2", "--max", "3", "--steps", "100")
    assert code == 0
    d = json.loads(out)
    pts = [(p["param"], p["entropy_bits"]) for p in d["points"]]
    assert all(s == 1.0 for g, s in pts if g > 1)
    below = [s for g, s in pts if g < 1]
    assert all(b > a for a, b in zip(below, below[1:]))


def test_molar_theta_rejected(capsysbinary):
    code, out, err = run_cli(capsysbinary, "asymptote", "--model", "molar", "--theta", "1.0",
                             "--param", "gamma", "--min", "0.2", "--max", "3")
    assert code != 0 and out == ""
    record = json.loads(err)
    assert record["key"] == "theta"


@pytest.mark.parametrize("argv, key", [
    (["sweep", "--model", "cusp", "--param", "A", "--min", "0", "--max", "1"], "mu"),
    (["sweep", "--model", "cusp", "--mu", "10", "--param", "A", "--min", "1", "--max", "0"], "range_min"),
    (["sweep", "--model", "cusp", "--mu", "10", "--param", "A", "--min", "0", "--max", "1", "--steps", "1"], "steps"),
    (["sweep", "--model", "cusp", "--mu", "nan", "--param", "A", "--min", "0", "--max", "1"], "mu"),
    (["asymptote", "--model", "cusp", "--param", "gamma", "--min", "0", "--max", "1"], "param"),
    (["asymptote", "--model", "cusp", "--set", "gamma=2", "--param", "A", "--min", "0", "--max", "1"], "gamma"),
    (["fixed-points", "--model", "bogus"], "argv"),
])
def test_invalid_configs(capsysbinary, argv, key):
    code, _, err = run_cli(capsysbinary, *argv)
    assert code == 2
    assert json.loads(err)["key"] == key


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"model": "butterfly", "param": "A2", "min": 1.01, "max": 1.3,
                               "steps": 4, "format": "csv", "params": {"A4": -2.0}}))
    c = load_config(["asymptote", "--config", str(cfg), "--steps", "7", "--set", "A4=-3"])
    assert c.steps == 7 and c.range_min == 1.01 and c.format == "csv"
    assert c.params == {"A4": -3.0}
    assert c.template()["A4"] == -3.0


def test_default_parameters():
    c = load_config(["asymptote", "--model", "butterfly", "--param", "A2", "--min", "0", "--max", "1"])
    t = c.template()
    assert t["A4"] == pytest.approx(-4 / math.sqrt(3)) and t.theta == pytest.approx(math.pi / 2)
    assert load_config(["fixed-points", "--model", "molar"]).template()["A"] == -1.0


def test_fixed_points_json(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "fixed-points", "--model", "cusp", "--set", "A=-1", "--mu", "4")
    d = json.loads(out)
    stable = sorted(fp["location"][0] for fp in d["fixed_points"] if fp["stable"])
    assert code == 0 and stable == pytest.approx([-2.0, 2.0])


def test_deterministic_output(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"o{i}.csv"
        assert main(["sweep", "--model", "cusp", "--mu", "20", "--param", "A", "--min", "-1", "--max", "1",
                     "--steps", "5", "--format", "csv", "--resolution", "0.04", "--output", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_unwritable_output(capsysbinary, tmp_path):
    code, _, err = run_cli(capsysbinary, "asymptote", "--model", "cusp", "--param", "A", "--min", "0.5",
                           "--max", "1", "--steps", "2", "--output", str(tmp_path / "missing" / "x.json"))
    assert code != 0 and json.loads(err)["error"]


def test_validate_exit_status(capsysbinary, monkeypatch):
    from qcatastrophe import validation
    code, out, _ = run_cli(capsysbinary, "validate", "--only", "1,3")
    assert code == 0 and out.count("[PASS]") == 2
    monkeypatch.setattr(validation, "CHECKS", [(99, "always fails", lambda: (False, "no"), False)])
    code, out, _ = run_cli(capsysbinary, "validate")
    assert code == 1 and "[FAIL] 99" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qcatastrophe.cli", "validate", "--only", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "[PASS]  1" in proc.stdout


def test_scaling_json(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "scaling", "--model", "cusp", "--mu-list", "20,40,70")
    assert code == 0
    d = json.loads(out)
    assert [p["mu"] for p in d["peaks"]] == [20.0, 40.0, 70.0]
    assert all(p["param_star"] < 0 for p in d["peaks"])
    assert set(d["fit"]) == {"form", "c0", "c1", "residual_rms", "mu_values"}


def test_scaling_unbracketed_peak_reports_mu(capsysbinary):
    # at mu = 10 the cusp entropy has no interior maximum in the window
    code, _, err = run_cli(capsysbinary, "scaling", "--model", "cusp", "--mu-list", "10,20,40")
    record = json.loads(err)
    assert code == 1 and record["error"] == "PeakNotBracketedError" and "mu=10" in record["message"]
