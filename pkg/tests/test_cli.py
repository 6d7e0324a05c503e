"""End-to-end command line behaviour: bundles, overrides, exit codes."""

import json

import pytest

from vetsim.cli import main
from vetsim.scenario import CSV_COLUMNS, preset

BUNDLE_FILES = (
    "config_echo.json",
    "trajectory.csv",
    "summary.json",
    "plots/trajectory_xy.svg",
    "plots/distance_vs_time.svg",
    "plots/velocity_vs_time.svg",
    "plots/tether_state_vs_time.svg",
)


def run_cli(*args):
    return main(list(args))


def test_run_writes_a_complete_bundle(tmp_path, capsys):
    out = tmp_path / "bundle"
    code = run_cli("run", "--preset", "nominal", "--set", "duration=5", "--out", str(out))
    assert code == 0
    for rel in BUNDLE_FILES:
        assert (out / rel).is_file(), rel
    summary = json.loads((out / "summary.json").read_text())
    assert summary["scenario"] == "nominal"
    assert summary["mode"] == "vet"
    assert "max_projected_distance" in summary
    header = (out / "trajectory.csv").read_text().splitlines()[0]
    assert header == ",".join(CSV_COLUMNS)
    assert "run complete" in capsys.readouterr().out


def test_repeated_runs_are_byte_identical(tmp_path, capsys):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        assert run_cli(
            "run", "--preset", "nominal", "--set", "duration=5", "--out", str(out)
        ) == 0
    assert (out_a / "trajectory.csv").read_bytes() == (out_b / "trajectory.csv").read_bytes()
    assert (out_a / "summary.json").read_bytes() == (out_b / "summary.json").read_bytes()
    for rel in BUNDLE_FILES[3:]:
        assert (out_a / rel).read_bytes() == (out_b / rel).read_bytes()


def test_overrides_reach_the_echoed_config(tmp_path, capsys):
    out = tmp_path / "bundle"
    code = run_cli(
        "run", "--preset", "nominal",
        "--set", "duration=2",
        "--set", "vet.k_psi=0.7",
        "--seed", "9",
        "--mode", "baseline",
        "--out", str(out),
    )
    assert code == 0
    echo = json.loads((out / "config_echo.json").read_text())
    assert echo["duration"] == 2
    assert echo["vet"]["k_psi"] == 0.7
    assert echo["seed"] == 9
    assert echo["mode"] == "baseline"


def test_config_file_round_trip(tmp_path, capsys):
    cfg_path = tmp_path / "scenario.json"
    data = preset("nominal").to_dict()
    data["duration"] = 3.0
    cfg_path.write_text(json.dumps(data))
    out = tmp_path / "bundle"
    assert run_cli("run", "--config", str(cfg_path), "--out", str(out)) == 0
    echo = json.loads((out / "config_echo.json").read_text())
    assert echo == json.loads((out / "config_echo.json").read_text())
    assert echo["duration"] == 3.0


def test_unknown_override_key_fails_cleanly(tmp_path, capsys):
    out = tmp_path / "bundle"
    code = run_cli("run", "--preset", "nominal", "--set", "bogus.key=1", "--out", str(out))
    assert code == 2
    assert not out.exists()  # no partial files
    assert "config error" in capsys.readouterr().err


def test_malformed_config_file_fails_cleanly(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    out = tmp_path / "bundle"
    assert run_cli("run", "--config", str(bad), "--out", str(out)) == 2
    assert not out.exists()

    incomplete = tmp_path / "incomplete.json"
    incomplete.write_text(json.dumps({"name": "x"}))
    assert run_cli("run", "--config", str(incomplete), "--out", str(out)) == 2


def test_unknown_preset_is_an_argparse_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli("run", "--preset", "nope", "--out", str(tmp_path))
    assert exc.value.code == 2


def test_simulation_failure_maps_to_exit_three(tmp_path, capsys):
    out = tmp_path / "bundle"
    pitch_over = (
        '[{"force": [0.0, 0.0, 0.0], "torque": [0.0, 5.0, 0.0],'
        ' "t_start": 0.0, "t_end": 15.0}]'
    )
    code = run_cli(
        "run", "--preset", "nominal",
        "--set", "duration=15",
        "--set", f"perturbations={pitch_over}",
        "--out", str(out),
    )
    assert code == 3
    assert not out.exists()
    assert "simulation failed" in capsys.readouterr().err


def test_compare_writes_both_bundles_and_the_delta(tmp_path, capsys):
    out = tmp_path / "cmp"
    code = run_cli(
        "compare", "--preset", "perturbation_sim",
        "--set", "duration=20",
        "--threshold", "0.6",
        "--out", str(out),
    )
    assert code == 0
    for mode in ("vet", "baseline"):
        for rel in BUNDLE_FILES:
            assert (out / mode / rel).is_file(), (mode, rel)
    assert (out / "distance_overlay.svg").is_file()
    delta = json.loads((out / "compare.json").read_text())
    assert set(delta) >= {"vet", "baseline", "baseline_lost_los", "vet_lost_los"}
    assert delta["vet"]["mode"] == "vet"
    assert delta["baseline"]["mode"] == "baseline"


def test_plot_regenerates_identical_svgs(tmp_path, capsys):
    src = tmp_path / "bundle"
    assert run_cli("run", "--preset", "nominal", "--set", "duration=4", "--out", str(src)) == 0
    dst = tmp_path / "replot"
    assert run_cli("plot", "--run", str(src), "--out", str(dst)) == 0
    for rel in BUNDLE_FILES[3:]:
        assert (src / rel).read_bytes() == (dst / rel).read_bytes()


def test_plot_can_select_a_single_kind(tmp_path, capsys):
    src = tmp_path / "bundle"
    assert run_cli("run", "--preset", "nominal", "--set", "duration=2", "--out", str(src)) == 0
    dst = tmp_path / "one"
    assert run_cli(
        "plot", "--run", str(src), "--kind", "distance_vs_time", "--out", str(dst)
    ) == 0
    assert (dst / "plots/distance_vs_time.svg").is_file()
    assert not (dst / "plots/trajectory_xy.svg").exists()


def test_plot_accepts_a_header_only_csv(tmp_path, capsys):
    rundir = tmp_path / "empty"
    rundir.mkdir()
    (rundir / "config_echo.json").write_text(json.dumps(preset("nominal").to_dict()))
    (rundir / "trajectory.csv").write_text(",".join(CSV_COLUMNS) + "\n")
    assert run_cli("plot", "--run", str(rundir)) == 0
    svg = (rundir / "plots/distance_vs_time.svg").read_text()
    assert svg.startswith("<svg") or "<svg" in svg


def test_plot_rejects_a_missing_bundle(tmp_path, capsys):
    assert run_cli("plot", "--run", str(tmp_path / "nowhere")) == 2


def test_env_var_sets_the_default_output_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("VET_SIM_OUT", str(tmp_path / "envout"))
    assert run_cli("run", "--preset", "nominal", "--set", "duration=1") == 0
    assert (tmp_path / "envout" / "summary.json").is_file()


def test_default_output_dir_is_runs(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("VET_SIM_OUT", raising=False)
    monkeypatch.chdir(tmp_path)
    assert run_cli("run", "--preset", "nominal", "--set", "duration=1") == 0
    assert (tmp_path / "runs" / "summary.json").is_file()
