import io
import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from phigeom import cli

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
BERN = str(CONFIGS / "bernoulli_exp.json")
KAN = str(CONFIGS / "kaniadakis_m4.json")


def run(*argv):
    out = io.StringIO()
    code = cli.run(list(argv), stdout=out)
    return code, out.getvalue()


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_metric_bernoulli():
    code, text = run("metric", "--config", BERN)
    assert code == 0
    assert json.loads(text)["results"][0]["g"] == [[0.25]]


def test_divergence_reports_kl_in_reading_order():
    code, text = run("divergence", "--config", BERN)
    payload = json.loads(text)
    assert code == 0
    assert payload["value"] == pytest.approx(0.5108256, abs=1e-7)
    assert payload["u0_kind"] == "ones"
    assert payload["phi"] == {"kind": "exponential"}


def test_output_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("christoffel", "--config", KAN, "--output", str(a))[0] == 0
    assert run("christoffel", "--config", KAN, "--output", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_theta_and_alpha_overrides():
    code, text = run("christoffel", "--config", KAN, "--theta", "0.1,0.2", "--alpha", "0.5")
    entry = json.loads(text)["results"]
    assert code == 0 and len(entry) == 1
    assert entry[0]["theta"] == [0.1, 0.2]
    assert entry[0]["alpha"][0]["alpha"] == 0.5


def test_curvature_plus1_flat():
    code, text = run("curvature", "--config", KAN, "--alpha", "1")
    assert code == 0
    assert all(r["max_abs"] <= 1e-4 for r in json.loads(text)["results"])


def test_geodesic_csv():
    code, text = run("geodesic", "--config", BERN, "--format", "csv")
    lines = text.strip().splitlines()
    assert code == 0
    assert lines[0] == "t,theta_0,v_0"
    assert len(lines) == 52


def test_natgrad_reaches_target():
    code, text = run("natgrad", "--config", BERN)
    payload = json.loads(text)
    assert code == 0
    # target (0.8, 0.2) from center (0.5, 0.5) along e_0: theta* = log 4
    assert payload["theta"][0] == pytest.approx(np.log(4.0), abs=1e-9)
    assert payload["steps"] <= 200


def test_transport_closed_form_diagnostics():
    code, text = run("transport", "--config", KAN)
    out = json.loads(text)
    assert code == 0
    assert out["closed_form"]["ode_gap"] <= 1e-5
    assert out["closed_form"]["span_residual"] <= 1e-10
    d = out["diagnostics"]
    assert d["dual_pairing_after"] == pytest.approx(d["dual_pairing_before"], abs=1e-5)


def test_validate_phi_ok():
    code, text = run("validate-phi", "--config", KAN)
    assert code == 0
    assert json.loads(text)["passed"] is True


def test_check_all_passes_on_kaniadakis(capsys):
    code, text = run("check-all", "--config", KAN)
    payload = json.loads(text)
    assert code == 0 and payload["passed"] and payload["seed"] == 0
    assert "PASS" in capsys.readouterr().err


def test_check_all_seed_from_config(tmp_path):
    cfg = json.loads(Path(KAN).read_text())
    cfg["seed"] = 7
    cfg["check"] = {"points": 1, "pairs": 50}
    code, text = run("check-all", "--config", write_config(tmp_path, cfg))
    assert code == 0 and json.loads(text)["seed"] == 7


def test_check_all_failure_exits_3(tmp_path, monkeypatch):
    from phigeom import checks

    monkeypatch.setattr(checks, "run_battery",
                        lambda *a, **k: [checks.CheckResult("forced", 1.0, 0.0, False)])
    assert run("check-all", "--config", KAN)[0] == 3


@pytest.mark.parametrize("mutate", [
    lambda c: c.update(extra=1),
    lambda c: c.pop("schema"),
    lambda c: c["family"].update(bogus=[1]),
    lambda c: c["phi"].update(kind="tsallis"),
    lambda c: c["phi"].update(kappa=1.5),
    lambda c: c["family"].update(center=[0.3, 0.3, 0.3, 0.3]),
    lambda c: c["family"].update(directions=[[1, 0, 0, 0], [2, 0, 0, 0]]),
    lambda c: c["family"].update(center={"csv": "missing.csv"}),
], ids=["unknown-key", "no-schema", "nested-key", "bad-kind", "bad-kappa", "bad-mass", "rank", "missing-csv"])
def test_config_errors_exit_1(tmp_path, mutate):
    cfg = json.loads(Path(KAN).read_text())
    mutate(cfg)
    assert run("metric", "--config", write_config(tmp_path, cfg))[0] == 1


def test_missing_config_and_csv_misuse(tmp_path):
    assert run("metric", "--config", str(tmp_path / "nope.json"))[0] == 1
    assert run("metric", "--config", KAN, "--format", "csv")[0] == 1
    assert run("metric", "--config", KAN, "--theta", "0.1")[0] == 1


def test_density_from_csv(tmp_path):
    (tmp_path / "center.csv").write_text("0.1\n0.2\n0.3\n0.4\n")
    cfg = json.loads(Path(KAN).read_text())
    cfg["family"]["center"] = {"csv": "center.csv"}
    _, inline = run("metric", "--config", KAN)
    code, from_csv = run("metric", "--config", write_config(tmp_path, cfg))
    assert code == 0 and from_csv == inline


def test_numerical_failure_exits_2():
    code, text = run("metric", "--config", BERN, "--theta", "1e7")
    assert code == 2
    assert json.loads(text)["error"] == "UnboundedNormalizerError"


def test_validate_phi_failure_exits_3(tmp_path):
    cfg = json.loads(Path(KAN).read_text())
    cfg["validate"] = {"grid": [0.0, 1.0, 2.0], "tol": -1.0}
    code, text = run("validate-phi", "--config", write_config(tmp_path, cfg))
    assert code == 3 and json.loads(text)["passed"] is False


@pytest.mark.skipif(shutil.which("phigeom") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["phigeom", "metric", "--config", BERN], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"][0]["g"] == [[0.25]]


def test_module_entry():
    proc = subprocess.run([sys.executable, "-m", "phigeom.cli", "divergence", "--config", BERN],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["value"] == pytest.approx(0.5108256, abs=1e-7)
