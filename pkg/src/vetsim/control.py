"""Controllers: per-robot sub-tasks, the virtual elastic tether, a baseline.

The tether law turns the other robot's tag position in the camera image into
a camera-frame velocity command. It is elastic: zero at the image centre, a
weak proportional pull inside the safe box, proportional plus derivative in
the elastic band, and a maximal pull toward the tag inside the danger margin.
Pixel errors are normalised by the image half-extents so gains are
commensurate with the command bound.

Both robots run the law on their own camera; with the mirrored mounts this
produces world-frame commands that are anti-parallel, so the pair behaves as
if joined by a spring. Losing detection holds the last command with an
exponential decay (half-life 0.5 s) instead of cutting it, which bridges
momentary blackouts.

The conventional baseline is one-way: only the follower reacts, with a single
uniform proportional gain over the whole image and a zero command on
detection loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .frames import Pose3, Pose6, RigidTransform, rotation_body_to_world, wrap_angle
from .perception import (
    CameraModel,
    RegionLabel,
    TagObservation,
    classify_region,
    elastic_penetration,
    tag_geometry,
)
from .vehicle import VehicleParams, saturate


@dataclass(frozen=True)
class PdGains:
    """Per-axis proportional and derivative gains."""

    kp: tuple
    kd: tuple

    def __post_init__(self) -> None:
        if len(self.kp) != len(self.kd):
            raise ValueError("kp and kd must have the same length")
        if len(self.kp) not in (3, 6):
            raise ValueError("gains are per-axis vectors of length 3 or 6")


def underwater_pd(kp: float, kd: float) -> PdGains:
    """Depth/roll/pitch PD gains with the x, y, yaw entries pinned to zero."""
    return PdGains((0.0, 0.0, kp, kp, kp, 0.0), (0.0, 0.0, kd, kd, kd, 0.0))


def surface_pd(kp: float, kd: float) -> PdGains:
    return PdGains((kp, kp, kp), (kd, kd, kd))


@dataclass(frozen=True)
class SubTaskTarget:
    """Constant references for the per-robot sub-tasks.

    The underwater robot regulates depth, roll and pitch; the surface robot
    tracks a planar waypoint. One type carries both groups so the planner can
    emit a single object.
    """

    z_d: float = 0.0
    phi_d: float = 0.0
    theta_d: float = 0.0
    x_d: float = 0.0
    y_d: float = 0.0
    psi_d: float = 0.0


@dataclass(frozen=True)
class DepthAttitudeState:
    """The underwater robot's own sensed state: depth and attitude only.

    This is everything its controller is allowed to know beyond its camera;
    there is no channel carrying the surface robot's pose.
    """

    z: float
    phi: float
    theta: float
    dz: float = 0.0
    dphi: float = 0.0
    dtheta: float = 0.0


def subtask_control_underwater(
    measured: DepthAttitudeState, target: SubTaskTarget, gains: PdGains
) -> np.ndarray:
    """PD on depth, roll and pitch; x, y and yaw outputs are exactly zero."""
    if len(gains.kp) != 6:
        raise ValueError("underwater sub-task needs 6-axis gains")
    for idx in (0, 1, 5):
        if gains.kp[idx] != 0.0 or gains.kd[idx] != 0.0:
            raise ValueError("x, y and yaw gains must be exactly zero")
    err = np.zeros(6)
    err[2] = target.z_d - measured.z
    err[3] = wrap_angle(target.phi_d - measured.phi)
    err[4] = wrap_angle(target.theta_d - measured.theta)
    derr = np.zeros(6)
    derr[2] = -measured.dz
    derr[3] = -measured.dphi
    derr[4] = -measured.dtheta
    return np.asarray(gains.kp) * err + np.asarray(gains.kd) * derr


def subtask_control_surface(
    pose: Pose3,
    world_velocity: np.ndarray,
    target: SubTaskTarget,
    gains: PdGains,
    speed_limit: float | None = None,
) -> np.ndarray:
    """Planar PD toward the waypoint, expressed in the body frame.

    The position error is formed in the world frame and rotated into the
    body frame (commands are body-frame velocity-valued). world_velocity is
    (x_dot, y_dot, psi_dot).
    """
    if len(gains.kp) != 3:
        raise ValueError("surface sub-task needs 3-axis gains")
    vel = np.asarray(world_velocity, dtype=float)
    ex = target.x_d - pose.x
    ey = target.y_d - pose.y
    ux_w = gains.kp[0] * ex - gains.kd[0] * vel[0]
    uy_w = gains.kp[1] * ey - gains.kd[1] * vel[1]
    c, s = math.cos(pose.psi), math.sin(pose.psi)
    ux = c * ux_w + s * uy_w
    uy = -s * ux_w + c * uy_w
    upsi = gains.kp[2] * wrap_angle(target.psi_d - pose.psi) - gains.kd[2] * vel[2]
    if speed_limit is not None:
        ux = min(max(ux, -speed_limit), speed_limit)
        uy = min(max(uy, -speed_limit), speed_limit)
    return np.array([ux, uy, upsi])


@dataclass(frozen=True)
class VetGains:
    """Elastic tether gains and limits.

    k_safe_p / k_elastic_p / k_elastic_d act on pixel errors normalised by
    the image half-extents; k_psi acts on the relative yaw in radians.
    u_max_* bound the camera-frame linear command. yield_fraction sets how
    deep into the elastic band the leader's own task fades to zero;
    hold_half_life is the decay of the held command after detection loss;
    rate_time_constant low-passes the tag centre velocity estimate.
    """

    k_safe_p: float = 0.5
    k_elastic_p: float = 1.0
    k_elastic_d: float = 0.15
    k_psi: float = 0.5
    u_max_x: float = 0.1
    u_max_y: float = 0.1
    yield_fraction: float = 0.2
    hold_half_life: float = 0.5
    rate_time_constant: float = 0.1

    def __post_init__(self) -> None:
        if self.k_safe_p < 0 or self.k_elastic_p < 0 or self.k_elastic_d < 0:
            raise ValueError("tether gains must be non-negative")
        if self.k_safe_p >= self.k_elastic_p:
            raise ValueError("safe gain must be below the elastic gain")
        if self.u_max_x <= 0 or self.u_max_y <= 0:
            raise ValueError("command bounds must be positive")
        if not 0.0 < self.yield_fraction <= 1.0:
            raise ValueError("yield_fraction must be in (0, 1]")
        if self.hold_half_life <= 0 or self.rate_time_constant < 0:
            raise ValueError("hold half-life must be positive")


@dataclass(frozen=True)
class VetCommand:
    """Camera-frame tether output: (u_x, u_y, u_psi) plus bookkeeping.

    subtask_weight is the leader-side fade factor derived from the region
    (1 in safe, ramping to 0 inside the elastic band); followers ignore it.
    """

    u: np.ndarray
    region: RegionLabel | None
    detected: bool
    subtask_weight: float = 1.0


@dataclass(frozen=True)
class VetFilterState:
    """Per-controller memory: centre history, rate filter, held command."""

    last_center: tuple | None = None
    last_time: float | None = None
    rate: tuple = (0.0, 0.0)
    held_command: tuple = (0.0, 0.0, 0.0)
    held_weight: float = 1.0

    @staticmethod
    def initial() -> "VetFilterState":
        return VetFilterState()


def vet_law(
    obs: TagObservation,
    state: VetFilterState,
    gains: VetGains,
    cam: CameraModel,
) -> tuple:
    """One tick of the elastic tether law; returns (VetCommand, new state).

    Detected: command from the region law on the normalised centre offset,
    clipped per axis to u_max. Undetected: the held command decays with the
    configured half-life, reaching ~6% within two seconds at the default.
    """
    if not obs.detected:
        if state.last_time is None:
            factor = 0.0
            dt = 0.0
        else:
            dt = max(obs.timestamp - state.last_time, 0.0)
            factor = 0.5 ** (dt / gains.hold_half_life)
        cmd = np.asarray(state.held_command, dtype=float) * factor
        weight = 1.0 - (1.0 - state.held_weight) * factor
        new_state = replace(
            state,
            last_center=None,
            last_time=obs.timestamp,
            rate=(0.0, 0.0),
            held_command=tuple(cmd),
            held_weight=weight,
        )
        return VetCommand(cmd, None, False, weight), new_state

    center, l_bar, h_bar = tag_geometry(obs)
    region = classify_region(center, l_bar, h_bar, cam)
    half_w = cam.width / 2.0
    half_v = cam.height / 2.0
    err = np.array([(center[0] - half_w) / half_w, (center[1] - half_v) / half_v])

    rate = np.asarray(state.rate, dtype=float)
    if state.last_center is not None and state.last_time is not None:
        dt = obs.timestamp - state.last_time
        if dt > 0.0:
            raw = np.array(
                [
                    (center[0] - state.last_center[0]) / half_w,
                    (center[1] - state.last_center[1]) / half_v,
                ]
            ) / dt
            alpha = dt / (gains.rate_time_constant + dt)
            rate = rate + alpha * (raw - rate)
    else:
        rate = np.zeros(2)

    if region is RegionLabel.SAFE:
        uxy = gains.k_safe_p * err
    elif region is RegionLabel.ELASTIC:
        uxy = gains.k_elastic_p * err + gains.k_elastic_d * rate
    else:
        norm = float(np.linalg.norm(err))
        direction = err / norm if norm > 1e-12 else np.zeros(2)
        uxy = np.array([gains.u_max_x, gains.u_max_y]) * direction
    ux = min(max(float(uxy[0]), -gains.u_max_x), gains.u_max_x)
    uy = min(max(float(uxy[1]), -gains.u_max_y), gains.u_max_y)
    upsi = gains.k_psi * obs.camera_yaw
    cmd = np.array([ux, uy, upsi])

    penetration = elastic_penetration(center, l_bar, h_bar, cam)
    weight = min(max(1.0 - penetration / gains.yield_fraction, 0.0), 1.0)

    new_state = VetFilterState(
        last_center=(float(center[0]), float(center[1])),
        last_time=obs.timestamp,
        rate=(float(rate[0]), float(rate[1])),
        held_command=(ux, uy, upsi),
        held_weight=weight,
    )
    return VetCommand(cmd, region, True, weight), new_state


def baseline_ibvs(
    obs: TagObservation, gains: VetGains, cam: CameraModel
) -> tuple:
    """One-way visual servo: follower command plus the leader's (zero) input.

    Uniform proportional gain over the whole image, no region logic, no
    derivative term; detection loss commands zero immediately.
    """
    leader_input = np.zeros(3)
    if not obs.detected:
        return np.zeros(3), leader_input
    center, _, _ = tag_geometry(obs)
    half_w = cam.width / 2.0
    half_v = cam.height / 2.0
    ex = (center[0] - half_w) / half_w
    ey = (center[1] - half_v) / half_v
    ux = min(max(gains.k_elastic_p * ex, -gains.u_max_x), gains.u_max_x)
    uy = min(max(gains.k_elastic_p * ey, -gains.u_max_y), gains.u_max_y)
    upsi = gains.k_psi * obs.camera_yaw
    return np.array([ux, uy, upsi]), leader_input


def camera_to_body(cmd: np.ndarray, mount: RigidTransform, dof: int) -> np.ndarray:
    """Map a camera-frame command (u_x, u_y, u_psi) into body-frame axes.

    The linear part rotates as a vector and keeps only the surge/sway
    components; the yaw part rotates as an axis and keeps only the body-z
    component. The heave, roll and pitch rows are structurally zero: those
    axes belong to the sub-task controller.
    """
    cmd = np.asarray(cmd, dtype=float)
    if cmd.shape != (3,):
        raise ValueError("camera-frame command is (u_x, u_y, u_psi)")
    linear = mount.rotation @ np.array([cmd[0], cmd[1], 0.0])
    angular = mount.rotation @ np.array([0.0, 0.0, cmd[2]])
    if dof == 6:
        return np.array([linear[0], linear[1], 0.0, 0.0, 0.0, angular[2]])
    if dof == 3:
        return np.array([linear[0], linear[1], angular[2]])
    raise ValueError("dof must be 3 or 6")


def combined_control(
    subtask_u: np.ndarray,
    xi_u: np.ndarray,
    params: VehicleParams,
    subtask_weight: float = 1.0,
) -> np.ndarray:
    """Sum the sub-task and tether commands and saturate per axis.

    subtask_weight scales the sub-task's linear components; it implements
    the leader's task priority (full sub-task while the tag is safe, fading
    to tether-only as the tag nears the border). Callers that do not use
    priority leave it at 1, which reduces to a plain sum.
    """
    subtask_u = np.asarray(subtask_u, dtype=float)
    xi_u = np.asarray(xi_u, dtype=float)
    if subtask_u.shape != xi_u.shape or subtask_u.shape != (params.dof,):
        raise ValueError("command vectors must both match the vehicle dof")
    weighted = subtask_u.copy()
    n_lin = 2 if params.dof == 3 else 3
    weighted[:n_lin] *= subtask_weight
    return saturate(weighted + xi_u, params)


def check_connectivity(
    camera_mount_u: RigidTransform,
    tag_mount_u: RigidTransform,
    camera_mount_s: RigidTransform,
    tag_mount_s: RigidTransform,
    pose_u: Pose6,
    pose_s: Pose3,
) -> float:
    """Residual of the mounting balance that lets both tether commands
    vanish at the same relative pose.

    Rotates each robot's camera-to-tag offset into the world frame and
    returns the norm of their sum; below 1e-6 m the mounting certifies the
    coupled laws share a common equilibrium.
    """
    rot_u = rotation_body_to_world(pose_u.attitude)
    rot_s = rotation_body_to_world(pose_s.lifted().attitude)
    offset_u = camera_mount_u.translation - tag_mount_u.translation
    offset_s = camera_mount_s.translation - tag_mount_s.translation
    return float(np.linalg.norm(rot_u @ offset_u + rot_s @ offset_s))
