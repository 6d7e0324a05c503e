"""Simulated tag perception.

Each robot carries one square fiducial tag and one camera. The camera is a
pinhole with the optical axis along its +z, image x to the right (width axis)
and image y down (height axis):

    u = f * X / Z + W / 2,   v = f * Y / Z + V / 2.

A tag is detected when all four corners project with positive depth inside
the image rectangle. Mounts are sensor poses expressed in the body frame, so
`mount.rotation` maps camera/tag coordinates into body coordinates.

Image regions partition the frame around the detected tag: a safe box at the
centre sized by the mean tag side length, an elastic band outside it, and a
danger margin near the image border sized by the mean tag diagonal.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .frames import Pose3, Pose6, RigidTransform, compose, transform_from_pose, wrap_angle


class NotDetected(ValueError):
    """Operation needs a detected tag observation."""


class RegionLabel(enum.Enum):
    SAFE = "safe"
    ELASTIC = "elastic"
    DANGER = "danger"


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera rigidly mounted on a robot body."""

    width: int
    height: int
    focal_length: float
    mount: RigidTransform

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0 or self.focal_length <= 0:
            raise ValueError("camera dimensions and focal length must be positive")

    @property
    def center(self) -> tuple:
        return (self.width / 2.0, self.height / 2.0)


@dataclass(frozen=True)
class TagModel:
    """Square tag of a given side length mounted on a robot body."""

    side: float
    mount: RigidTransform

    def __post_init__(self) -> None:
        if self.side <= 0:
            raise ValueError("tag side must be positive")

    def corners_local(self) -> np.ndarray:
        """Corners a, b, c, d counter-clockwise from top-left, z = 0.

        The a->b edge runs along the tag's +x axis (its centreline).
        """
        h = self.side / 2.0
        return np.array(
            [
                [-h, -h, 0.0],
                [h, -h, 0.0],
                [h, h, 0.0],
                [-h, h, 0.0],
            ]
        )


@dataclass(frozen=True)
class TagObservation:
    """Projected tag corners plus the relative yaw about the optical axis."""

    corners: np.ndarray  # (4, 2) pixel coordinates, rows a, b, c, d
    camera_yaw: float
    timestamp: float
    detected: bool


@dataclass(frozen=True)
class TetherState:
    """Pixel offset of the tag centre from the image centre."""

    xi: float
    center: tuple


@dataclass(frozen=True)
class DropoutModel:
    """Scheduled blackout windows plus an independent per-tick drop rate."""

    scheduled_windows: tuple = ()
    random_rate: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.random_rate < 1.0:
            raise ValueError("random_rate must be in [0, 1)")
        last_end = -math.inf
        for window in self.scheduled_windows:
            if len(window) != 2 or window[1] < window[0]:
                raise ValueError("each window must be (t_start, t_end) with t_end >= t_start")
            if window[0] < last_end:
                raise ValueError("windows must be ordered and non-overlapping")
            last_end = window[1]

    def scheduled(self, t: float) -> bool:
        return any(t0 <= t <= t1 for t0, t1 in self.scheduled_windows)


_MIN_DEPTH = 1e-9


def project_tag(
    observer_pose: Pose6 | Pose3,
    target_pose: Pose6 | Pose3,
    cam: CameraModel,
    tag: TagModel,
    t: float,
) -> TagObservation:
    """Project the target robot's tag into the observer's camera.

    The relative yaw is the rotation of the tag's +x axis about the optical
    axis, measured in image coordinates; it is exact regardless of where the
    tag sits in the frame.
    """
    world_from_cam = compose(transform_from_pose(observer_pose), cam.mount)
    world_from_tag = compose(transform_from_pose(target_pose), tag.mount)
    rot_cam_tag = world_from_cam.rotation.T @ world_from_tag.rotation
    t_cam_tag = world_from_cam.rotation.T @ (
        world_from_tag.translation - world_from_cam.translation
    )

    corners_cam = tag.corners_local() @ rot_cam_tag.T + t_cam_tag
    depths = corners_cam[:, 2]
    if np.any(np.abs(depths) < _MIN_DEPTH):
        return TagObservation(np.zeros((4, 2)), 0.0, t, False)

    pixels = np.empty((4, 2))
    pixels[:, 0] = cam.focal_length * corners_cam[:, 0] / depths + cam.width / 2.0
    pixels[:, 1] = cam.focal_length * corners_cam[:, 1] / depths + cam.height / 2.0

    in_front = bool(np.all(depths > 0.0))
    in_frame = bool(
        np.all((pixels[:, 0] >= 0.0) & (pixels[:, 0] <= cam.width))
        and np.all((pixels[:, 1] >= 0.0) & (pixels[:, 1] <= cam.height))
    )
    axis = rot_cam_tag[:, 0]  # tag +x expressed in camera coordinates
    yaw = wrap_angle(math.atan2(float(axis[1]), float(axis[0])))
    return TagObservation(pixels, yaw, t, in_front and in_frame)


def tag_geometry(obs: TagObservation) -> tuple:
    """Centre, mean side length and mean diagonal of the projected tag.

    Returns ((cx, cy), l_bar, h_bar) in pixels.
    """
    if not obs.detected:
        raise NotDetected("tag geometry needs a detected observation")
    corners = obs.corners
    ax, ay = float(corners[0, 0]), float(corners[0, 1])
    bx, by = float(corners[1, 0]), float(corners[1, 1])
    cx, cy = float(corners[2, 0]), float(corners[2, 1])
    dx, dy = float(corners[3, 0]), float(corners[3, 1])
    center = ((ax + bx + cx + dx) / 4.0, (ay + by + cy + dy) / 4.0)
    l_bar = (
        math.hypot(ax - bx, ay - by)
        + math.hypot(bx - cx, by - cy)
        + math.hypot(cx - dx, cy - dy)
        + math.hypot(ax - dx, ay - dy)
    ) / 4.0
    h_bar = (math.hypot(ax - cx, ay - cy) + math.hypot(bx - dx, by - dy)) / 2.0
    return center, l_bar, h_bar


def classify_region(center, l_bar: float, h_bar: float, cam: CameraModel) -> RegionLabel:
    """Label the tag centre as safe, elastic or danger.

    Safe is the open box of half-width l_bar/2 around the image centre;
    elastic is the open box h_bar clear of every border, minus safe; danger
    is everything else. Every pixel receives exactly one label.
    """
    x, y = float(center[0]), float(center[1])
    w, v = float(cam.width), float(cam.height)
    if (w - l_bar) / 2.0 < x < (w + l_bar) / 2.0 and (v - l_bar) / 2.0 < y < (v + l_bar) / 2.0:
        return RegionLabel.SAFE
    if h_bar < x < w - h_bar and h_bar < y < v - h_bar:
        return RegionLabel.ELASTIC
    return RegionLabel.DANGER


def elastic_penetration(center, l_bar: float, h_bar: float, cam: CameraModel) -> float:
    """How far the tag centre sits into the elastic band, per axis maximum.

    0 inside the safe box, 1 at the danger boundary, above 1 inside danger.
    Used by the control layer to fade the leader's own task out as the tag
    drifts toward the border.
    """
    x, y = float(center[0]), float(center[1])
    w, v = float(cam.width), float(cam.height)
    penetrations = []
    for value, extent in ((x, w), (y, v)):
        safe_lo = (extent - l_bar) / 2.0
        safe_hi = (extent + l_bar) / 2.0
        span = safe_lo - h_bar  # distance from the safe edge to the danger edge
        depth = max(safe_lo - value, value - safe_hi, 0.0)
        if depth == 0.0:
            penetrations.append(0.0)
        elif span <= 0.0:
            penetrations.append(math.inf)
        else:
            penetrations.append(depth / span)
    return max(penetrations)


def tether_state(obs: TagObservation, cam: CameraModel) -> TetherState:
    """Distance in pixels between the tag centre and the image centre."""
    center, _, _ = tag_geometry(obs)
    cx, cy = cam.center
    xi = math.hypot(center[0] - cx, center[1] - cy)
    return TetherState(xi, center)


def apply_dropout(
    obs: TagObservation,
    model: DropoutModel | None,
    t: float,
    rng: np.random.Generator,
) -> TagObservation:
    """Force the observation undetected during blackouts.

    Corners are left untouched; only the detected flag is cleared. The
    random draw consumes exactly one uniform sample per call while
    random_rate > 0, so a fixed seed reproduces the same drop sequence.
    """
    if model is None:
        return obs
    dropped = model.scheduled(t)
    if model.random_rate > 0.0:
        dropped = bool(rng.random() < model.random_rate) or dropped
    if dropped and obs.detected:
        return replace(obs, detected=False)
    return obs
