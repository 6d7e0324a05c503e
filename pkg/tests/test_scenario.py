"""Planners, configuration round trips and the closed-loop run."""

import math

import numpy as np
import pytest

from vetsim.frames import GimbalSingularity, Pose3
from vetsim.scenario import (
    CSV_COLUMNS,
    ConfigError,
    InvalidBounds,
    Lawnmower,
    PRESET_NAMES,
    ScenarioConfig,
    UnknownPreset,
    lawnmower_path,
    log_from_csv,
    planner_step,
    preset,
    run,
)
from vetsim.vehicle import Disturbance
from vetsim.perception import DropoutModel


def short(name, duration, **tweaks):
    cfg = preset(name)
    cfg.duration = duration
    for key, value in tweaks.items():
        setattr(cfg, key, value)
    cfg.validate()
    return cfg


# --- lawnmower planner ----------------------------------------------------------

def test_lawnmower_lane_count_anchor():
    spec = Lawnmower(0.0, 3.6, 0.0, 2.4, 0.6)
    points = lawnmower_path(spec)
    assert len(points) == 10  # 5 lanes, 2 waypoints each
    lanes = sorted({p[1] for p in points})
    np.testing.assert_allclose(lanes, [0.0, 0.6, 1.2, 1.8, 2.4])


def test_two_lane_box_is_an_s_shape():
    points = lawnmower_path(Lawnmower(0.0, 1.0, 0.0, 0.5, 0.5))
    assert points == (
        (0.0, 0.0, 0.0),
        (1.0, 0.0, 0.0),
        (1.0, 0.5, math.pi),
        (0.0, 0.5, math.pi),
    )


def test_wide_spacing_degenerates_to_one_lane():
    points = lawnmower_path(Lawnmower(0.0, 1.0, 0.0, 0.4, 0.6))
    assert len(points) == 2
    assert all(p[1] == 0.0 for p in points)


def test_heading_faces_along_each_lane():
    points = lawnmower_path(Lawnmower(0.0, 2.0, 0.0, 1.2, 0.6))
    assert [p[2] for p in points] == [0.0, 0.0, math.pi, math.pi, 0.0, 0.0]


def test_lawnmower_rejects_degenerate_areas():
    with pytest.raises(InvalidBounds):
        lawnmower_path(Lawnmower(1.0, 1.0, 0.0, 1.0, 0.5))
    with pytest.raises(InvalidBounds):
        lawnmower_path(Lawnmower(0.0, 1.0, 2.0, 1.0, 0.5))


# --- waypoint sequencing ----------------------------------------------------------

def test_planner_advances_inside_the_capture_radius():
    wps = ((0.1, 0.0, 0.0), (1.0, 0.0, 0.5))
    target, index = planner_step(Pose3(0.0, 0.0, 0.0), wps, 0.15)
    assert index == 1
    assert (target.x_d, target.y_d, target.psi_d) == (1.0, 0.0, 0.5)


def test_planner_holds_position_before_capture():
    wps = ((1.0, 0.0, 0.0),)
    target, index = planner_step(Pose3(0.0, 0.0, 0.0), wps, 0.15)
    assert index == 0
    assert target.x_d == 1.0


def test_planner_holds_the_terminal_waypoint():
    wps = ((0.0, 0.0, 0.0), (1.0, 0.0, 0.3))
    target, index = planner_step(Pose3(1.0, 0.01, 0.0), wps, 0.15, index=1)
    assert index == 2  # captured, counted once
    assert target.x_d == 1.0
    target, index = planner_step(Pose3(1.0, 0.0, 0.0), wps, 0.15, index=index)
    assert index == 2
    assert target.x_d == 1.0 and target.psi_d == 0.3


def test_planner_with_no_waypoints_holds_the_current_pose():
    target, index = planner_step(Pose3(0.4, -0.2, 0.9), (), 0.15)
    assert index == 0
    assert (target.x_d, target.y_d, target.psi_d) == (0.4, -0.2, 0.9)


# --- configuration -----------------------------------------------------------------

def test_presets_are_known_and_validated():
    assert PRESET_NAMES == (
        "navigation_real",
        "navigation_sim",
        "nominal",
        "perturbation_real",
        "perturbation_sim",
    )
    for name in PRESET_NAMES:
        cfg = preset(name)
        cfg.validate()
        assert cfg.name == name


def test_unknown_preset_raises():
    with pytest.raises(UnknownPreset):
        preset("freestyle")


def test_config_round_trips_through_plain_data():
    for name in PRESET_NAMES:
        cfg = preset(name)
        again = ScenarioConfig.from_dict(cfg.to_dict())
        assert again == cfg, name


def test_config_rejects_unknown_and_missing_keys():
    data = preset("nominal").to_dict()
    data["extra"] = 1
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict(data)
    data = preset("nominal").to_dict()
    del data["dt"]
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict(data)


def test_validate_rejects_bad_fields():
    cfg = preset("nominal")
    cfg.mode = "teleport"
    with pytest.raises(ConfigError):
        cfg.validate()

    cfg = preset("nominal")
    cfg.dt = 0.5
    with pytest.raises(ConfigError):
        cfg.validate()

    cfg = preset("nominal")
    cfg.tank_max = (cfg.tank_min[0], 2.66, 0.0)
    with pytest.raises(ConfigError):
        cfg.validate()

    cfg = preset("nominal")
    cfg.initial_pose_u = (99.0, 0.0, -1.0, 0.0, 0.0, 0.0)
    with pytest.raises(ConfigError):
        cfg.validate()


def test_preset_objects_are_independent():
    a = preset("nominal")
    a.duration = 1.0
    assert preset("nominal").duration != 1.0


# --- the run loop ----------------------------------------------------------------------

def test_zero_duration_yields_a_single_record():
    log = run(short("nominal", 0.0))
    assert len(log) == 1
    assert log.t[0] == 0.0


def test_records_are_evenly_spaced():
    cfg = short("nominal", 3.0)
    log = run(cfg)
    assert len(log) == 151
    np.testing.assert_allclose(np.diff(log.t), cfg.dt, atol=1e-12)


def test_same_seed_is_bit_identical():
    cfg_a = short("perturbation_sim", 16.0)
    cfg_b = short("perturbation_sim", 16.0)
    assert run(cfg_a).to_csv_text() == run(cfg_b).to_csv_text()


def test_random_dropout_is_seed_deterministic():
    cfg_a = short("nominal", 5.0, dropout=DropoutModel(random_rate=0.3, seed=0))
    cfg_b = short("nominal", 5.0, dropout=DropoutModel(random_rate=0.3, seed=0))
    text_a = run(cfg_a).to_csv_text()
    assert text_a == run(cfg_b).to_csv_text()
    assert sum(not d for d in run(cfg_a).detected_us) > 10


def test_csv_header_is_frozen():
    golden = (
        "t,xU,yU,zU,phiU,thetaU,psiU,xS,yS,psiS,"
        "uU_sub_x,uU_sub_y,uU_sub_z,uU_sub_phi,uU_sub_theta,uU_sub_psi,"
        "uU_xi_x,uU_xi_y,uU_xi_z,uU_xi_phi,uU_xi_theta,uU_xi_psi,"
        "uS_sub_x,uS_sub_y,uS_sub_psi,uS_xi_x,uS_xi_y,uS_xi_psi,"
        "detectedUS,detectedSU,regionUS,regionSU,xiUS,xiSU,projDist,eventFlags"
    )
    assert ",".join(CSV_COLUMNS) == golden
    log = run(short("nominal", 0.0))
    assert log.to_csv_text().splitlines()[0] == golden


def test_log_round_trips_through_csv():
    cfg = short("perturbation_sim", 16.0)
    log = run(cfg)
    again = log_from_csv(log.to_csv_text(), cfg)
    assert len(again) == len(log)
    np.testing.assert_allclose(again.pose_u, log.pose_u, atol=1e-9)
    np.testing.assert_allclose(again.pose_s, log.pose_s, atol=1e-9)
    np.testing.assert_allclose(again.proj_dist, log.proj_dist, atol=1e-9)
    np.testing.assert_array_equal(again.detected_us, log.detected_us)
    assert again.region_us == log.region_us
    assert again.event_flags == log.event_flags
    # event text survives exactly; timestamps carry 12 significant digits
    assert [f for _, f in again.events] == [f for _, f in log.events]
    np.testing.assert_allclose(
        [t for t, _ in again.events], [t for t, _ in log.events], atol=1e-9
    )
    assert again.waypoints_captured == log.waypoints_captured
    assert again.waypoints_total == log.waypoints_total
    # totals are reconstructed from the logged split commands
    np.testing.assert_allclose(again.u_total_u, log.u_total_u, atol=1e-9)


def test_log_from_csv_rejects_foreign_headers():
    cfg = short("nominal", 0.0)
    with pytest.raises(ConfigError):
        log_from_csv("a,b,c\n1,2,3\n", cfg)


def test_log_from_csv_accepts_a_header_only_file():
    cfg = short("nominal", 0.0)
    log = log_from_csv(",".join(CSV_COLUMNS) + "\n", cfg)
    assert len(log) == 0


def test_perturbation_window_is_flagged_and_applied():
    cfg = short("perturbation_sim", 16.0)
    log = run(cfg)
    flat = [f for flags in log.event_flags for f in flags.split(";") if f]
    assert "perturb_start" in flat and "perturb_end" in flat
    start = next(t for t, f in log.events if f == "perturb_start")
    assert start == pytest.approx(cfg.perturbations[0].t_start, abs=cfg.dt)
    # the push moves the underwater robot backwards along x
    k0 = int(round(start / cfg.dt))
    assert log.pose_u[min(k0 + 100, len(log) - 1), 0] < log.pose_u[k0, 0]


def test_scheduled_dropout_blanks_detection_and_is_flagged():
    cfg = short("nominal", 4.0, dropout=DropoutModel(scheduled_windows=((1.0, 2.0),)))
    log = run(cfg)
    flat = [f for flags in log.event_flags for f in flags.split(";") if f]
    assert "dropout_start" in flat and "dropout_end" in flat
    inside = (log.t >= 1.0) & (log.t <= 2.0)
    assert not log.detected_us[inside].any()
    # the surface camera is unaffected by the underwater camera's blackout
    assert log.detected_su[inside].all()


def test_waypoint_capture_flags_match_the_counter():
    cfg = short("navigation_sim", 120.0)
    log = run(cfg)
    flat = [f for flags in log.event_flags for f in flags.split(";") if f]
    assert flat.count("waypoint_capture") == log.waypoints_captured
    assert log.waypoints_total == 8
    assert log.waypoints_captured >= 4


def test_wall_clamp_keeps_the_pair_inside_and_is_flagged():
    cfg = short(
        "nominal",
        20.0,
        tank_min=(-0.5, -0.5, -2.0),
        tank_max=(0.45, 0.45, 0.0),
    )
    log = run(cfg)
    flat = [f for flags in log.event_flags for f in flags.split(";") if f]
    assert "wall_clamp_s" in flat
    assert np.all(log.pose_s[:, 0] <= 0.45 + 1e-12)
    assert np.all(log.pose_u[:, 0] <= 0.45 + 1e-12)


def test_nominal_run_stays_inside_the_tank():
    cfg = short("nominal", 30.0)
    log = run(cfg)
    for axis in range(3):
        assert np.all(log.pose_u[:, axis] >= cfg.tank_min[axis] - 1e-9)
        assert np.all(log.pose_u[:, axis] <= cfg.tank_max[axis] + 1e-9)
    for axis in range(2):
        assert np.all(log.pose_s[:, axis] >= cfg.tank_min[axis] - 1e-9)
        assert np.all(log.pose_s[:, axis] <= cfg.tank_max[axis] + 1e-9)
    flat = [f for flags in log.event_flags for f in flags.split(";") if f]
    assert "wall_clamp_u" not in flat and "wall_clamp_s" not in flat


def test_runaway_attitude_propagates_the_gimbal_error():
    cfg = short(
        "nominal",
        15.0,
        perturbations=(Disturbance((0.0, 0.0, 0.0), (0.0, 5.0, 0.0), 0.0, 15.0),),
    )
    with pytest.raises(GimbalSingularity):
        run(cfg)


def test_baseline_mode_never_moves_the_leader_sideways():
    cfg = short("nominal", 10.0, mode="baseline")
    log = run(cfg)
    # the leader's tether command stays identically zero in baseline mode
    np.testing.assert_array_equal(log.u_xi_s, 0.0)
