import json
from pathlib import Path

import pytest

from mmwsync.cli import main
from mmwsync.config import CONFIG_DEFAULTS, load_config, parse_override, scenarios_from
from mmwsync.pss import ConfigError

TINY = {
    "n_dim": 96, "n_slot": 6, "n_sig": 2, "n_pss": 2,
    "w_sig_hz": 1e6, "t_sig_s": 4e-5,
    "bs_rows": 4, "bs_cols": 2, "ue_rows": 2, "ue_cols": 2,
    "frontend": "analog",
    "snr_db": [-20, 0], "trials": 150, "calib_trials": 5000,
}


def write_tiny(tmp_path, extra=None) -> Path:
    cfg = dict(TINY)
    cfg.update(extra or {})
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(cfg))
    return path


def test_load_config_defaults_and_file(tmp_path):
    params = load_config(None, [])
    assert params["w_tot_hz"] == 1e9
    params = load_config(write_tiny(tmp_path), [])
    assert params["n_slot"] == 6
    assert params["w_tot_hz"] == 1e9


def test_load_config_unknown_key(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"w_tot_ghz": 1}))
    with pytest.raises(ConfigError):
        load_config(path, [])


def test_override_forms():
    assert parse_override("bits=2") == ("bits", 2)
    assert parse_override("frontend.bits=2") == ("bits", 2)
    assert parse_override("frontend.kind=analog") == ("frontend", "analog")
    assert parse_override("channel.mode=multipath") == ("channel", "multipath")
    assert parse_override("tx.mode=random") == ("tx_mode", "random")
    assert parse_override("snr_db=[-10,-5]") == ("snr_db", [-10, -5])
    with pytest.raises(ConfigError):
        parse_override("nonsense=1")
    with pytest.raises(ConfigError):
        parse_override("justakey")


def test_scenarios_list(tmp_path):
    params = load_config(write_tiny(tmp_path, {
        "scenarios": [{"frontend": "analog"}, {"frontend": "digital", "tx_mode": "random"}],
    }), [])
    scens = scenarios_from(params)
    assert [s.scenario_id for s in scens] == [
        "omni-analog-single-nslot6", "random-digital-single-nslot6"]


def test_cmd_run_happy_path(tmp_path, monkeypatch):
    monkeypatch.setenv("SIM_CALIB_DIR", str(tmp_path / "calib"))
    out = tmp_path / "out"
    rc = main(["run", "--config", str(write_tiny(tmp_path)), "--out", str(out),
               "--seed", "7"])
    assert rc == 0
    csv = out / "omni-analog-single-nslot6.csv"
    assert csv.exists()
    body = csv.read_text().strip().split("\n")
    assert len(body) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 7
    assert manifest["curves"][0]["threshold"]["t_star"] > 0
    assert manifest["config"]["trials"] == 150


def test_cmd_run_missing_config(tmp_path, capsys):
    rc = main(["run", "--config", str(tmp_path / "nope.json")])
    assert rc == 2
    assert "nope.json" in capsys.readouterr().err


def test_cmd_run_override_echoed(tmp_path, monkeypatch):
    monkeypatch.setenv("SIM_CALIB_DIR", str(tmp_path / "calib"))
    out = tmp_path / "out"
    rc = main(["run", "--config", str(write_tiny(tmp_path)), "--out", str(out),
               "--override", "frontend.bits=2", "--override", "trials=100"])
    assert rc == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert {"bits": 2} in manifest["overrides"]
    assert manifest["config"]["bits"] == 2
    assert manifest["trials"] == 100


def test_cmd_run_bad_override_exit_code(tmp_path):
    rc = main(["run", "--config", str(write_tiny(tmp_path)),
               "--override", "warp.speed=9"])
    assert rc == 2


def test_cmd_calibrate(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SIM_CALIB_DIR", str(tmp_path / "calib"))
    rc = main(["calibrate", "--config", str(write_tiny(tmp_path))])
    assert rc == 0
    assert "t_star=" in capsys.readouterr().out
    assert (tmp_path / "calib" / "thresholds.json").exists()


def test_cmd_figures_small(tmp_path, monkeypatch):
    monkeypatch.setenv("SIM_CALIB_DIR", str(tmp_path / "calib"))
    out = tmp_path / "figs"
    rc = main(["figures", "--which", "3", "--config", str(write_tiny(tmp_path)),
               "--out", str(out), "--trials", "60"])
    assert rc == 0
    csv_lines = (out / "fig3.csv").read_text().strip().split("\n")
    series = {line.split(",")[0] for line in csv_lines[1:]}
    assert len(series) == 5          # omni/random x analog/digital + quantized
    dat = (out / "fig3_plot.dat").read_text().strip().split("\n")
    assert dat[0].startswith("# snr_data_db")
    assert dat[0].rstrip().endswith("rate_target_db")
    # the rate-target marker column carries the -17.6 dB reference
    assert dat[1].split()[-1] == "-17.5747"
    manifest = json.loads((out / "fig3_manifest.json").read_text())
    assert len(manifest["curves"]) == 5


def test_cmd_figures_unknown_id(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["figures", "--which", "9", "--config", str(write_tiny(tmp_path))])
    assert exc.value.code == 2


def test_cmd_validate(capsys):
    rc = main(["validate"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "pass" in out and "FAIL" not in out


def test_cmd_validate_injected_fault(capsys):
    rc = main(["validate", "--inject-fault"])
    assert rc != 0
    assert "FAIL" in capsys.readouterr().out
