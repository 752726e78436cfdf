"""Deterministic detector stand-in.

Objects are reported as percepts when they are visible from the current
viewpoint and their base detectability clears the applicable confidence
threshold.  The simulator models false negatives only: it never invents
objects and copies category/color from ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

from .scene import Color, Rect, Scene, SceneObject, Vec3, normalize_category

VIEWPOINT_STEP_DEG = 45.0
MAX_VIEWPOINT_CHANGES = 7  # one full circle in 45-degree steps
LOWERED_THRESHOLD = 0.3
DEFAULT_THRESHOLD = 0.7
DEFAULT_OCCLUSION_TOLERANCE_DEG = 5.0


@dataclass(frozen=True)
class Viewpoint:
    """Camera placement on a circle around the table center.

    Azimuth 0 puts the camera at the robot's home position (negative y side
    of the table, looking along +y); azimuth grows counterclockwise seen
    from above.
    """

    azimuth_deg: float
    distance_m: float = 1.0
    height_m: float = 0.6

    def __post_init__(self) -> None:
        if self.distance_m <= 0.0 or self.height_m <= 0.0:
            raise ValueError("viewpoint distance and height must be positive")
        object.__setattr__(self, "azimuth_deg", self.azimuth_deg % 360.0)


@dataclass(frozen=True)
class DetectorConfig:
    default_threshold: float = DEFAULT_THRESHOLD
    per_category_threshold: Mapping[str, float] = field(default_factory=dict)
    occlusion_tolerance_deg: float = DEFAULT_OCCLUSION_TOLERANCE_DEG

    def __post_init__(self) -> None:
        for name, value in [("default_threshold", self.default_threshold)] + list(
            self.per_category_threshold.items()
        ):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"threshold {name!r} must be in [0, 1], got {value}")
        if self.occlusion_tolerance_deg < 0.0:
            raise ValueError("occlusion_tolerance_deg must be >= 0")

    def threshold_for(self, category: str) -> float:
        return self.per_category_threshold.get(normalize_category(category), self.default_threshold)


@dataclass(frozen=True)
class Percept:
    """One detector report.  ``object_id`` is a provenance link only;

    grounding never consults ground truth through it."""

    object_id: str
    category: str
    color: Color
    position: Vec3
    extent: Vec3
    confidence: float


def _cos_deg(deg: float) -> float:
    d = deg % 360.0
    if d == 0.0:
        return 1.0
    if d == 90.0:
        return 0.0
    if d == 180.0:
        return -1.0
    if d == 270.0:
        return 0.0
    return math.cos(math.radians(d))


def _sin_deg(deg: float) -> float:
    return _cos_deg(deg - 90.0)


def camera_xy(vp: Viewpoint, bounds: Rect) -> tuple[float, float]:
    """Horizontal camera position for a viewpoint orbiting the table center."""
    cx, cy = bounds.center
    phi = vp.azimuth_deg - 90.0
    return (cx + vp.distance_m * _cos_deg(phi), cy + vp.distance_m * _sin_deg(phi))


def view_axes(vp: Viewpoint, bounds: Rect) -> tuple[tuple[float, float], tuple[float, float]]:
    """(forward, right) unit vectors of the camera frame, table plane only.

    Forward points from the camera toward the table center; right completes
    a right-handed frame seen from above.
    """
    phi = vp.azimuth_deg - 90.0
    forward = (-_cos_deg(phi), -_sin_deg(phi))
    right = (forward[1], -forward[0])
    return forward, right


def _angle_between_deg(ax: float, ay: float, bx: float, by: float) -> float:
    na = math.hypot(ax, ay)
    nb = math.hypot(bx, by)
    if na == 0.0 or nb == 0.0:
        return 0.0
    c = (ax * bx + ay * by) / (na * nb)
    return math.degrees(math.acos(max(-1.0, min(1.0, c))))


def visibility(
    obj: SceneObject,
    vp: Viewpoint,
    scene: Scene,
    tolerance_deg: float = DEFAULT_OCCLUSION_TOLERANCE_DEG,
) -> bool:
    """Whether ``obj`` is unoccluded from ``vp``.

    An object is hidden when some other object at least as tall stands
    between the camera and it: nearer to the camera, and within
    ``tolerance_deg`` of the camera-to-object ray (table-plane geometry).
    """
    cam_x, cam_y = camera_xy(vp, scene.table_bounds)
    to_obj = (obj.position[0] - cam_x, obj.position[1] - cam_y)
    dist_obj = math.hypot(*to_obj)
    if dist_obj < 1e-12:
        return True
    for other in scene.objects:
        if other.id == obj.id or other.extent[2] < obj.extent[2]:
            continue
        to_other = (other.position[0] - cam_x, other.position[1] - cam_y)
        if math.hypot(*to_other) >= dist_obj:
            continue
        if _angle_between_deg(*to_obj, *to_other) <= tolerance_deg:
            return False
    return True


def detect(scene: Scene, vp: Viewpoint, cfg: DetectorConfig) -> list[Percept]:
    """Deterministic detection pass, output sorted by object id.

    A visible object is reported iff its base detectability meets the
    threshold for its category; occluded objects are suppressed entirely.
    """
    percepts: list[Percept] = []
    for obj in sorted(scene.objects, key=lambda o: o.id):
        if not visibility(obj, vp, scene, cfg.occlusion_tolerance_deg):
            continue
        confidence = obj.base_detectability  # visibility factor is 1.0 when visible
        if confidence >= cfg.threshold_for(obj.category):
            percepts.append(
                Percept(obj.id, obj.category, obj.color, obj.position, obj.extent, confidence)
            )
    return percepts


def lower_threshold(cfg: DetectorConfig, category: str) -> DetectorConfig:
    """Copy of ``cfg`` with the category's threshold dropped to the floor.

    Never raises an already-lower threshold; applying twice equals applying
    once.
    """
    key = normalize_category(category)
    lowered = min(cfg.threshold_for(key), LOWERED_THRESHOLD)
    per_category = dict(cfg.per_category_threshold)
    per_category[key] = lowered
    return replace(cfg, per_category_threshold=per_category)


def next_viewpoint(vp: Viewpoint) -> Viewpoint:
    """Advance the camera one 45-degree step around the table."""
    return replace(vp, azimuth_deg=(vp.azimuth_deg + VIEWPOINT_STEP_DEG) % 360.0)
