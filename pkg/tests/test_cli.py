import json

import pytest

from fourlevel.cli import main
from fourlevel.config import validate_config
from fourlevel.presets import load_preset
from fourlevel.runner import (
    SWEEP_COLUMNS,
    TRAJECTORY_HEADER,
    run_experiment,
    run_sweep,
    trajectory_csv,
)


def small_fig3_config(**overrides):
    raw = load_preset("fig3").to_dict()
    raw["propagation"]["t_end"] = 100.0
    raw["propagation"]["n_times"] = 2001
    raw.update(overrides)
    return validate_config(raw)


def test_trajectory_csv_header_and_roundtrip():
    config = small_fig3_config()
    result = run_experiment(config)
    text = trajectory_csv(result.trajectory)
    lines = text.splitlines()
    assert lines[0] == TRAJECTORY_HEADER
    assert (
        TRAJECTORY_HEADER
        == "t,pop_g1,pop_g2,pop_e1,pop_e2,coh_g_re,coh_g_im,coh_g_abs,coh_e_re,coh_e_im,coh_e_abs"
    )
    # shortest-representation floats must round-trip exactly
    first = lines[1].split(",")
    assert float(first[1]) == result.trajectory.states[0, 0]


def test_run_experiment_writes_bundle_and_is_deterministic(tmp_path):
    config = small_fig3_config()
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    run_experiment(config, out_a)
    run_experiment(config, out_b)
    for name in ("trajectory.csv", "metrics.json", "manifest.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    manifest = json.loads((out_a / "manifest.json").read_text())
    assert manifest["config"] == config.to_dict()
    assert "version" in manifest


def test_single_point_sweep_matches_run_experiment(tmp_path):
    raw = load_preset("fig3").to_dict()
    raw["propagation"]["n_times"] = 2001
    raw["sweep"] = {"path": "system.delta_e", "values": [0.0]}
    config = validate_config(raw)
    rows = run_sweep(config, tmp_path)
    assert len(rows) == 1
    row = rows[0]
    assert row["status"] == "ok"
    point = config.with_value("system.delta_e", 0.0)
    metrics = run_experiment(point).metrics
    entry = metrics["oscillations"]["pop_g1"]
    assert float(row["amplitude"]) == entry["amplitude"]
    assert int(row["n_extrema"]) == entry["n_extrema"]


def test_sweep_parallelism_is_byte_identical(tmp_path):
    raw = load_preset("fig3").to_dict()
    raw["propagation"]["n_times"] = 2001
    raw["sweep"] = {"path": "system.delta_e", "values": [0.0, 0.5, 1.0]}
    config = validate_config(raw)
    out1, out2 = tmp_path / "serial", tmp_path / "parallel"
    run_sweep(config, out1, jobs=1)
    run_sweep(config, out2, jobs=2)
    assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()
    assert (out1 / "manifest.json").read_bytes() == (out2 / "manifest.json").read_bytes()


def test_sweep_records_point_failures_in_row(tmp_path):
    raw = load_preset("fig3").to_dict()
    raw["propagation"]["n_times"] = 2001
    raw["sweep"] = {"path": "system.delta_e", "values": [0.5, -1.0]}
    config = validate_config(raw)
    rows = run_sweep(config, tmp_path)
    assert rows[0]["status"] == "ok"
    assert rows[1]["status"] == "error"
    assert rows[1]["error"]
    text = (tmp_path / "sweep.csv").read_text()
    assert text.splitlines()[0] == ",".join(SWEEP_COLUMNS)


def test_cli_simulate_and_exit_codes(tmp_path, capsys):
    config_file = tmp_path / "run.json"
    raw = load_preset("fig3").to_dict()
    raw["propagation"]["n_times"] = 501
    config_file.write_text(json.dumps(raw))
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(config_file), "--out", str(out)]) == 0
    assert (out / "trajectory.csv").exists()

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["simulate", "--config", str(bad), "--out", str(out)]) == 1
    captured = capsys.readouterr()
    assert "config error" in captured.err

    missing = tmp_path / "missing.json"
    assert main(["simulate", "--config", str(missing), "--out", str(out)]) == 1


def test_cli_preset_with_overlay(tmp_path):
    overlay = tmp_path / "overlay.json"
    overlay.write_text(json.dumps({"propagation": {"n_times": 301}}))
    out = tmp_path / "out"
    code = main(
        ["simulate", "--preset", "fig3", "--config", str(overlay), "--out", str(out)]
    )
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["propagation"]["n_times"] == 301
    assert manifest["config"]["system"]["gamma"] == [[1.5, 1.5], [0.5, 0.5]]


def test_cli_steady_state(capsys):
    assert main(["steady-state", "--preset", "figS4"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["unique"] is True
    assert doc["coh_g_abs"] > 1e-4


def test_cli_ubiquity(tmp_path, capsys):
    dipoles = tmp_path / "dipoles.json"
    dipoles.write_text(json.dumps({"dipoles": [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]}))
    assert main(["ubiquity", "--dipoles", str(dipoles)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["all_mutually_orthogonal"] is False
    assert doc["max_abs_alignment"] == pytest.approx(1 / 3, abs=1e-12)

    zero = tmp_path / "zero.json"
    zero.write_text(json.dumps([[1, 0, 0], [0, 0, 0]]))
    assert main(["ubiquity", "--dipoles", str(zero)]) == 1

    assert main(["ubiquity", "--dipoles", str(tmp_path / "nope.json")]) == 3


def test_cli_field(tmp_path, capsys):
    config_file = tmp_path / "field.json"
    raw = load_preset("fig3").to_dict()
    raw["field"] = {
        "tau_c": 1.0,
        "n_realizations": 400,
        "seed": 5,
        "separations": [0.0, 1.0, 10.0],
        "tau_p": [0.01, 10.0],
    }
    config_file.write_text(json.dumps(raw))
    out = tmp_path / "field_out"
    assert main(["field", "--config", str(config_file), "--out", str(out)]) == 0
    vis = (out / "visibility.csv").read_text().splitlines()
    assert vis[0] == "separation_over_tau_c,visibility,stderr"
    assert len(vis) == 4
    pulses = (out / "pulses.csv").read_text().splitlines()
    assert pulses[0] == "tau_p_over_tau_c,coherence,stderr"


def test_cli_io_error_exit_code(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("file, not a directory")
    config_file = tmp_path / "run.json"
    raw = load_preset("fig3").to_dict()
    raw["propagation"]["n_times"] = 101
    config_file.write_text(json.dumps(raw))
    code = main(
        ["simulate", "--config", str(config_file), "--out", str(blocker / "sub")]
    )
    assert code == 3


def test_cli_requires_config_or_preset():
    assert main(["steady-state"]) == 1
