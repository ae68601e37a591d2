import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from phonon_herald.cli import DEFAULTS, ConfigError, main, resolve_config
from phonon_herald.timetag import HEADER

DESK = ["--set", "montecarlo.p=0.05", "--set", "montecarlo.eta_S=0.5",
        "--set", "montecarlo.eta_read=0.3", "--set", "montecarlo.pi_0=0",
        "--set", "montecarlo.pi_AS=0", "--set", "montecarlo.repetitions=400000"]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(lines))))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    return header, body


def test_defaults_follow_reference_parameters():
    cfg = resolve_config()
    assert cfg["decay"]["tau_m"] == 3.9
    assert cfg["decay"]["nbar_bath"] == 1.5e-3
    assert cfg["decay"]["alpha0"] == 0.08
    assert cfg["herald"]["eta_S"] == 0.1 and cfg["herald"]["pi_0"] == 7.5e-7
    assert cfg["power"]["eta_AS"] == 0.019 and cfg["power"]["pi_AS"] == 3.1e-5
    assert cfg["montecarlo"]["eta_read"] == 0.019


def test_resolve_config_rejects_bad_input():
    with pytest.raises(ConfigError):
        resolve_config({"decay": {"tau": 3.9}})
    with pytest.raises(ConfigError):
        resolve_config({"nonsense": {}})
    with pytest.raises(ConfigError):
        resolve_config({"montecarlo": {"repetitions": 1.5}})
    with pytest.raises(ConfigError):
        resolve_config(overrides=["decay.tau_m"])
    assert resolve_config(overrides=["decay.tau_m=4"])["decay"]["tau_m"] == 4
    # defaults are not mutated by resolution
    resolve_config({"decay": {"delays": [1.0]}})
    assert len(DEFAULTS["decay"]["delays"]) == 41


def test_herald(capsys):
    code, out, _ = run(["herald"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["scenario"] == "herald"
    assert rep["report"]["three_level"]["P"][1] == pytest.approx(0.9842, abs=1e-4)
    assert rep["report"]["signal_to_dark"] == pytest.approx(2106.7, rel=1e-4)


def test_decay_scan_table(capsys):
    code, out, _ = run(["decay-scan"], capsys)
    assert code == 0
    header, body = table(out)
    assert header == ["t_ps", "alpha_model", "g2_SAS_model", "P0", "P1", "P2"]
    assert body[0, 1] == pytest.approx(0.08)
    assert body[0, 2] == pytest.approx(30.0)
    assert np.all(np.diff(body[:, 1]) > 0)
    assert np.all(body[:, 3:].sum(axis=1) <= 1 + 1e-12)


def test_decay_scan_single_point(capsys):
    code, out, _ = run(["decay-scan", "--set", "decay.delays=[0]"], capsys)
    _, body = table(out)
    assert body.shape[0] == 1 and body[0, 1] == pytest.approx(0.08)


def test_decay_scan_synthetic_fit(capsys):
    code, out, _ = run(["decay-scan", "--set", "decay.synthetic_noise=0.05", "--seed", "3"],
                       capsys)
    fit = json.loads([ln for ln in out.splitlines() if ln.startswith("# fit: ")][0][7:])
    assert fit["params"]["tau"] == pytest.approx(3.9, rel=0.1)


def test_power_scan(capsys):
    code, out, _ = run(["power-scan"], capsys)
    header, body = table(out)
    assert header == ["energy_pJ", "p", "n_S", "alpha0", "g2_SAS"]
    assert body[0, 3] == pytest.approx(0.06, abs=0.005)
    assert np.all(np.diff(body[:, 3]) > 0)
    slope = np.polyfit(np.log(body[:, 0]), np.log(body[:, 4] - 1), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.1)


@pytest.mark.parametrize("scenario,extra", [
    ("decay-scan", ["--set", "decay.synthetic_noise=0.05"]),
    ("power-scan", []),
    ("herald", []),
    ("montecarlo", DESK),
])
def test_rerun_from_output_is_bit_identical(tmp_path, scenario, extra):
    first = tmp_path / "first"
    second = tmp_path / "second"
    assert main([scenario, "--out", str(first)] + extra) == 0
    assert main([scenario, "--config", str(first), "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_montecarlo_to_analyze_pipeline(tmp_path, capsys):
    stream = tmp_path / "run.tt"
    code, out, _ = run(["montecarlo", "--seed", "9", "--stream", str(stream)] + DESK, capsys)
    assert code == 0
    mc = json.loads(out)["report"]
    assert stream.read_text().startswith(HEADER + "\n")
    code, out, _ = run(["analyze", str(stream)], capsys)
    assert code == 0
    an = json.loads(out)["report"]
    assert an["alpha"]["value"] == mc["alpha"]["value"]
    assert an["alpha"]["stderr"] == mc["alpha"]["stderr"]
    assert 0 < an["alpha_histogram"]["value"] < 1


def test_analyze_thermal_stokes_file(tmp_path, capsys):
    stream = tmp_path / "stokes.tt"
    code, _, _ = run(["montecarlo", "--stream", str(stream), "--set", "montecarlo.p=0.1",
                      "--set", "montecarlo.eta_S=0.5", "--set", "montecarlo.pi_0=0",
                      "--set", "montecarlo.repetitions=2000000",
                      "--set", "montecarlo.hbt_source=\"stokes\""], capsys)
    assert code == 0
    code, out, _ = run(["analyze", str(stream)], capsys)
    g = json.loads(out)["report"]["g2_D1_D2"]
    assert abs(g["value"] - 2.0) <= 3 * g["stderr"]
    assert g["stderr"] < 0.1


def test_analyze_empty_file(tmp_path, capsys):
    path = tmp_path / "empty.tt"
    path.write_text(HEADER + "\n")
    code, out, err = run(["analyze", str(path)], capsys)
    assert code == 1 and out == ""
    msg = json.loads(err)
    assert "no data" in msg["message"]


def test_analyze_malformed_file(tmp_path, capsys):
    path = tmp_path / "bad.tt"
    path.write_text(HEADER + "\n1,S\nfoo\n")
    code, _, err = run(["analyze", str(path)], capsys)
    assert code == 1
    msg = json.loads(err)
    assert msg["error"] == "TimeTagFormatError" and ":3:" in msg["message"]


def test_config_errors_exit_2(tmp_path, capsys):
    code, _, err = run(["herald", "--set", "herald.bogus=1"], capsys)
    assert code == 2 and json.loads(err)["error"] == "ConfigError"
    cfgfile = tmp_path / "c.json"
    cfgfile.write_text("{not json")
    code, _, err = run(["power-scan", "--config", str(cfgfile)], capsys)
    assert code == 2
    code, _, err = run(["analyze"], capsys)
    assert code == 2
    code, _, err = run(["power-scan", "--set", "power.energies=[]"], capsys)
    assert code == 2


def test_domain_errors_exit_1(capsys):
    code, _, err = run(["herald", "--set", "herald.p=1.5"], capsys)
    assert code == 1
    assert json.loads(err)["error"] == "DomainError"


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "phonon_herald", "power-scan",
                          "--set", "power.energies=[20]"], capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.startswith("# config: ")
