"""Rigid-body dynamics for the two vehicles.

Both robots follow the same marine-craft model in body coordinates,

    M nu_dot + C(nu) nu + D(nu) nu = tau + rotated world disturbance,

with a diagonal mass matrix M, the standard skew-symmetric Coriolis matrix
built from M, and damping D(nu) = diag(d_lin) + diag(d_quad * |nu|). The
underwater robot uses the full 6-DoF form (surge, sway, heave, roll, pitch,
yaw); the surface robot uses the planar 3-DoF form (surge, sway, yaw).

Integration is semi-implicit Euler at a fixed step: the velocity update
solves (M + dt*(C + D)) nu' = M nu + dt * tau_total with C and D frozen at
the current velocity, which keeps the step passive for any non-negative
damping and stable under stiff damping; the pose then integrates with the
new velocity. Commands are velocity-valued; thrust allocation scales them
by a constant gain so the steady-state speed approximately equals the
commanded value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import (
    EulerAngles,
    Pose3,
    Pose6,
    euler_rate_transform,
    rotation_body_to_world,
    surface_jacobian,
    wrap_angle,
)


class DimensionMismatch(ValueError):
    """Vector length does not match the vehicle's degree-of-freedom count."""


@dataclass(frozen=True)
class VehicleParams:
    """Diagonal model parameters; length 6 (underwater) or 3 (surface).

    mass               diagonal of M (kg, kg m^2)
    damping_linear     linear damping coefficients (N s/m, N m s/rad)
    damping_quadratic  quadratic damping coefficients
    thrust_gain        command-to-wrench diagonal gain
    velocity_bound_linear   per-component command clip and the norm bound
                            enforced on the linear body velocity (m/s)
    velocity_bound_angular  per-component command clip for angular axes (rad/s)
    """

    mass: tuple
    damping_linear: tuple
    damping_quadratic: tuple
    thrust_gain: tuple
    velocity_bound_linear: float
    velocity_bound_angular: float

    def __post_init__(self) -> None:
        n = len(self.mass)
        if n not in (3, 6):
            raise ValueError("vehicle model supports 3 or 6 degrees of freedom")
        for name in ("damping_linear", "damping_quadratic", "thrust_gain"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} must have {n} entries")
        if any(m <= 0 for m in self.mass):
            raise ValueError("mass entries must be positive")
        if any(d < 0 for d in self.damping_linear + self.damping_quadratic):
            raise ValueError("damping entries must be non-negative")
        if self.velocity_bound_linear <= 0 or self.velocity_bound_angular <= 0:
            raise ValueError("velocity bounds must be positive")

    @property
    def dof(self) -> int:
        return len(self.mass)


@dataclass(frozen=True)
class Disturbance:
    """Constant world-frame wrench active over a closed time window."""

    force: tuple
    torque: tuple = (0.0, 0.0, 0.0)
    t_start: float = 0.0
    t_end: float = 0.0

    def __post_init__(self) -> None:
        if len(self.force) != 3 or len(self.torque) != 3:
            raise ValueError("disturbance force and torque are 3-vectors")
        if self.t_end < self.t_start:
            raise ValueError("disturbance window must have t_end >= t_start")

    def active(self, t: float) -> bool:
        return self.t_start <= t <= self.t_end


def _check_dof(u: np.ndarray, params: VehicleParams) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (params.dof,):
        raise DimensionMismatch(
            f"expected a {params.dof}-vector, got shape {u.shape}"
        )
    return u


def allocate_thrust(u: np.ndarray, params: VehicleParams) -> np.ndarray:
    """Map a command vector to a body wrench through the diagonal gain."""
    u = _check_dof(u, params)
    return np.asarray(params.thrust_gain, dtype=float) * u


def coriolis_matrix(nu: np.ndarray, params: VehicleParams) -> np.ndarray:
    """Skew-symmetric Coriolis/centripetal matrix for the diagonal mass."""
    nu = _check_dof(nu, params)
    m = np.asarray(params.mass, dtype=float)
    if params.dof == 3:
        mu, mv = m[0] * nu[0], m[1] * nu[1]
        return np.array(
            [
                [0.0, 0.0, -mv],
                [0.0, 0.0, mu],
                [mv, -mu, 0.0],
            ]
        )
    a = m[:3] * nu[:3]  # momentum of the linear axes
    b = m[3:] * nu[3:]  # angular momentum
    c = np.zeros((6, 6))
    c[0, 4], c[0, 5] = a[2], -a[1]
    c[1, 3], c[1, 5] = -a[2], a[0]
    c[2, 3], c[2, 4] = a[1], -a[0]
    c[3, 1], c[3, 2] = a[2], -a[1]
    c[4, 0], c[4, 2] = -a[2], a[0]
    c[5, 0], c[5, 1] = a[1], -a[0]
    c[3, 4], c[3, 5] = b[2], -b[1]
    c[4, 3], c[4, 5] = -b[2], b[0]
    c[5, 3], c[5, 4] = b[1], -b[0]
    return c


def damping_force(nu: np.ndarray, params: VehicleParams) -> np.ndarray:
    """D(nu) nu with linear plus quadratic (|nu_i| nu_i) terms."""
    nu = _check_dof(nu, params)
    d_lin = np.asarray(params.damping_linear, dtype=float)
    d_quad = np.asarray(params.damping_quadratic, dtype=float)
    return (d_lin + d_quad * np.abs(nu)) * nu


def saturate(u: np.ndarray, params: VehicleParams) -> np.ndarray:
    """Clip each command component to its per-axis bound."""
    u = _check_dof(u, params)
    lin = params.velocity_bound_linear
    ang = params.velocity_bound_angular
    n_lin = 2 if params.dof == 3 else 3
    out = u.copy()
    out[:n_lin] = np.clip(out[:n_lin], -lin, lin)
    out[n_lin:] = np.clip(out[n_lin:], -ang, ang)
    return out


def clip_norm(vec: np.ndarray, bound: float) -> np.ndarray:
    """Scale a vector down so its Euclidean norm is <= bound, exactly."""
    out = np.asarray(vec, dtype=float).copy()
    norm = float(np.linalg.norm(out))
    # One rescale can land a few ulp above the bound; repeat until it holds.
    for _ in range(4):
        if norm <= bound or norm == 0.0:
            return out
        out *= bound / norm
        norm = float(np.linalg.norm(out))
    out *= 1.0 - 1e-15
    return out


class VehicleModel:
    """Precomputed arrays for one vehicle, with the integration step."""

    def __init__(self, params: VehicleParams):
        self.params = params
        self.dof = params.dof
        self._mass = np.asarray(params.mass, dtype=float)
        self._m_diag = np.diag(self._mass)
        self._d_lin = np.asarray(params.damping_linear, dtype=float)
        self._d_quad = np.asarray(params.damping_quadratic, dtype=float)
        self._gain = np.asarray(params.thrust_gain, dtype=float)
        self._n_lin = 2 if self.dof == 3 else 3

    def allocate(self, u: np.ndarray) -> np.ndarray:
        return self._gain * u

    def step(
        self,
        pose: Pose6 | Pose3,
        nu: np.ndarray,
        tau: np.ndarray,
        dt: float,
        world_force: np.ndarray | None = None,
        world_torque: np.ndarray | None = None,
    ):
        """Advance one step; returns (new_pose, new_body_velocity)."""
        nu = _check_dof(nu, self.params)
        tau = _check_dof(tau, self.params)
        if self.dof == 6:
            return self._step6(pose, nu, tau, dt, world_force, world_torque)
        return self._step3(pose, nu, tau, dt, world_force, world_torque)

    def _solve_velocity(self, nu, tau_total, dt):
        h = coriolis_matrix(nu, self.params)
        h[np.diag_indices_from(h)] += self._d_lin + self._d_quad * np.abs(nu)
        a = self._m_diag + dt * h
        nu_new = np.linalg.solve(a, self._mass * nu + dt * tau_total)
        nu_new[: self._n_lin] = clip_norm(
            nu_new[: self._n_lin], self.params.velocity_bound_linear
        )
        return nu_new

    def _step6(self, pose: Pose6, nu, tau, dt, world_force, world_torque):
        rot = rotation_body_to_world(pose.attitude)
        t_euler = euler_rate_transform(pose.attitude)
        tau_total = tau.copy()
        if world_force is not None:
            tau_total[:3] += rot.T @ np.asarray(world_force, dtype=float)
        if world_torque is not None:
            tau_total[3:] += rot.T @ np.asarray(world_torque, dtype=float)
        nu_new = self._solve_velocity(nu, tau_total, dt)
        position = pose.position() + dt * (rot @ nu_new[:3])
        rates = t_euler @ nu_new[3:]
        att = pose.attitude
        new_att = EulerAngles(
            wrap_angle(att.phi + dt * rates[0]),
            wrap_angle(att.theta + dt * rates[1]),
            wrap_angle(att.psi + dt * rates[2]),
        )
        new_pose = Pose6(position[0], position[1], position[2], new_att)
        return new_pose, nu_new

    def _step3(self, pose: Pose3, nu, tau, dt, world_force, world_torque):
        jac = surface_jacobian(pose.psi)
        tau_total = tau.copy()
        if world_force is not None or world_torque is not None:
            wrench = np.zeros(3)
            if world_force is not None:
                wrench[:2] = np.asarray(world_force, dtype=float)[:2]
            if world_torque is not None:
                wrench[2] = float(np.asarray(world_torque, dtype=float)[2])
            tau_total += jac.T @ wrench
        nu_new = self._solve_velocity(nu, tau_total, dt)
        rates = jac @ nu_new
        new_pose = Pose3(
            pose.x + dt * rates[0],
            pose.y + dt * rates[1],
            wrap_angle(pose.psi + dt * rates[2]),
        )
        return new_pose, nu_new


def step(
    pose: Pose6 | Pose3,
    nu: np.ndarray,
    tau: np.ndarray,
    params: VehicleParams,
    dt: float,
    disturbance: Disturbance | None = None,
    t: float = 0.0,
):
    """One integration step; applies the disturbance if its window covers t."""
    force = torque = None
    if disturbance is not None and disturbance.active(t):
        force = np.asarray(disturbance.force, dtype=float)
        torque = np.asarray(disturbance.torque, dtype=float)
    return VehicleModel(params).step(pose, nu, tau, dt, force, torque)
