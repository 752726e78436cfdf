"""Ground-truth scene model: table geometry, objects, attributes, and scene I/O.

A scene is a set of rigid objects standing on a rectangular table, expressed
in a robot-centric frame: x to the robot's right, y away from the robot,
z up.  Positions are box centers; extents are axis-aligned (width, depth,
height).  All lengths are meters.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import IO, Iterable, Sequence, Union


class Color(str, Enum):
    """Closed color vocabulary for object attributes."""

    BLACK = "black"
    BLUE = "blue"
    GREEN = "green"
    ORANGE = "orange"
    PINK = "pink"
    PURPLE = "purple"
    RED = "red"
    WHITE = "white"
    YELLOW = "yellow"


class SizeClass(str, Enum):
    SMALL = "small"
    MEDIUM = "medium"
    BIG = "big"


# Absolute volume cutoffs used when an object has fewer than
# MIN_MATES_FOR_QUANTILES same-category companions (cubic meters).
SMALL_MAX_VOLUME = 250e-6
BIG_MIN_VOLUME = 1500e-6
MIN_MATES_FOR_QUANTILES = 3

# Authored scenes may not stack objects arbitrarily: two footprints may
# overlap by at most this fraction of the smaller one.
MAX_FOOTPRINT_OVERLAP = 0.25

Vec3 = tuple[float, float, float]


class SceneError(Exception):
    """Base class for scene loading and validation failures."""

    def __init__(self, message: str, object_id: str | None = None, field: str | None = None):
        super().__init__(message)
        self.object_id = object_id
        self.field = field


class SchemaError(SceneError):
    """The scene document is structurally malformed."""


class InvariantError(SceneError):
    """The scene document is well-formed but violates a scene invariant."""


@dataclass(frozen=True)
class Rect:
    """Axis-aligned table rectangle in the x/y plane."""

    lo: tuple[float, float]
    hi: tuple[float, float]

    @property
    def center(self) -> tuple[float, float]:
        return ((self.lo[0] + self.hi[0]) / 2.0, (self.lo[1] + self.hi[1]) / 2.0)

    @property
    def diagonal(self) -> float:
        return math.hypot(self.hi[0] - self.lo[0], self.hi[1] - self.lo[1])


@dataclass(frozen=True)
class SceneObject:
    """One ground-truth object.

    ``base_detectability`` is the confidence the simulated detector reports
    for this object when it is unoccluded; it must lie in [0, 1].
    """

    id: str
    category: str
    color: Color
    position: Vec3
    extent: Vec3
    base_detectability: float

    @property
    def volume(self) -> float:
        w, d, h = self.extent
        return w * d * h

    @property
    def footprint(self) -> tuple[float, float, float, float]:
        """(x0, y0, x1, y1) of the object's table-plane bounding box."""
        x, y, _ = self.position
        w, d, _ = self.extent
        return (x - w / 2.0, y - d / 2.0, x + w / 2.0, y + d / 2.0)

    @property
    def bottom_z(self) -> float:
        return self.position[2] - self.extent[2] / 2.0

    @property
    def top_z(self) -> float:
        return self.position[2] + self.extent[2] / 2.0


@dataclass(frozen=True)
class Scene:
    id: str
    objects: tuple[SceneObject, ...]
    table_bounds: Rect

    def object_by_id(self, object_id: str) -> SceneObject:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise KeyError(object_id)


def _load_synonyms() -> dict[str, str]:
    with resources.files("tabletalk.data").joinpath("synonyms.json").open("r") as fh:
        table = json.load(fh)
    return {str(k).lower(): str(v).lower() for k, v in table.items()}


_SYNONYMS: dict[str, str] | None = None


def normalize_category(word: str) -> str:
    """Map a category word to its canonical form via the synonym table."""
    global _SYNONYMS
    if _SYNONYMS is None:
        _SYNONYMS = _load_synonyms()
    w = word.strip().lower()
    return _SYNONYMS.get(w, w)


def _footprint_overlap_fraction(a: SceneObject, b: SceneObject) -> float:
    ax0, ay0, ax1, ay1 = a.footprint
    bx0, by0, bx1, by1 = b.footprint
    w = min(ax1, bx1) - max(ax0, bx0)
    d = min(ay1, by1) - max(ay0, by0)
    if w <= 0.0 or d <= 0.0:
        return 0.0
    inter = w * d
    smaller = min((ax1 - ax0) * (ay1 - ay0), (bx1 - bx0) * (by1 - by0))
    return inter / smaller


def _require(cond: bool, exc: SceneError) -> None:
    if not cond:
        raise exc


def _as_number(value: object, what: str, object_id: str | None = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{what} must be a number, got {value!r}", object_id, what)
    if not math.isfinite(value):
        raise SchemaError(f"{what} must be finite, got {value!r}", object_id, what)
    return float(value)


def _as_vector(value: object, length: int, what: str, object_id: str | None = None) -> tuple[float, ...]:
    if not isinstance(value, list) or len(value) != length:
        raise SchemaError(f"{what} must be a list of {length} numbers", object_id, what)
    return tuple(_as_number(v, what, object_id) for v in value)


def _as_string(value: object, what: str, object_id: str | None = None) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"{what} must be a string, got {value!r}", object_id, what)
    return value


def _check_keys(doc: dict, allowed: set[str], required: set[str], where: str, object_id: str | None = None) -> None:
    missing = required - doc.keys()
    if missing:
        raise SchemaError(f"{where} missing field(s): {', '.join(sorted(missing))}", object_id, sorted(missing)[0])
    unknown = doc.keys() - allowed
    if unknown:
        raise SchemaError(f"{where} has unknown field(s): {', '.join(sorted(unknown))}", object_id, sorted(unknown)[0])


def _parse_object(doc: object) -> SceneObject:
    if not isinstance(doc, dict):
        raise SchemaError("object entry must be a JSON object")
    fields = {"id", "category", "color", "position", "extent", "base_detectability"}
    oid = doc.get("id")
    oid = _as_string(oid, "id") if oid is not None else None
    _check_keys(doc, fields, fields, f"object {oid!r}", oid)

    category = _as_string(doc["category"], "category", oid).strip().lower()
    _require(bool(category), InvariantError(f"object {oid!r}: category must be nonempty", oid, "category"))

    color_raw = _as_string(doc["color"], "color", oid).strip().lower()
    try:
        color = Color(color_raw)
    except ValueError:
        raise InvariantError(
            f"object {oid!r}: color {color_raw!r} is not one of {[c.value for c in Color]}", oid, "color"
        ) from None

    position = _as_vector(doc["position"], 3, "position", oid)
    extent = _as_vector(doc["extent"], 3, "extent", oid)
    _require(
        all(e > 0.0 for e in extent),
        InvariantError(f"object {oid!r}: extent components must be strictly positive", oid, "extent"),
    )
    det = _as_number(doc["base_detectability"], "base_detectability", oid)
    _require(
        0.0 <= det <= 1.0,
        InvariantError(f"object {oid!r}: base_detectability must be in [0, 1]", oid, "base_detectability"),
    )
    return SceneObject(oid, category, color, position, extent, det)


def _reject_constant(token: str) -> float:
    raise SchemaError(f"non-finite number {token!r} not allowed in scene JSON")


def load_scene(source: Union[bytes, str, IO[bytes], IO[str]]) -> Scene:
    """Parse and validate a scene document.

    Accepts raw bytes, a JSON string, or a file-like object.  Raises
    SchemaError for malformed documents and InvariantError for documents
    that violate scene invariants; both carry the offending object id and
    field where applicable.
    """
    if hasattr(source, "read"):
        source = source.read()  # type: ignore[union-attr]
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from None

    if not isinstance(doc, dict):
        raise SchemaError("scene document must be a JSON object")
    _check_keys(doc, {"id", "table_bounds", "objects"}, {"id", "table_bounds", "objects"}, "scene")

    scene_id = _as_string(doc["id"], "id")
    tb = doc["table_bounds"]
    if not isinstance(tb, dict):
        raise SchemaError("table_bounds must be an object with 'min' and 'max'")
    _check_keys(tb, {"min", "max"}, {"min", "max"}, "table_bounds")
    lo = _as_vector(tb["min"], 2, "table_bounds.min")
    hi = _as_vector(tb["max"], 2, "table_bounds.max")
    _require(
        lo[0] < hi[0] and lo[1] < hi[1],
        SchemaError("table_bounds.max must exceed table_bounds.min in both axes"),
    )
    bounds = Rect(lo, hi)

    if not isinstance(doc["objects"], list):
        raise SchemaError("objects must be a list")
    objects = tuple(_parse_object(o) for o in doc["objects"])

    seen: set[str] = set()
    for obj in objects:
        _require(obj.id not in seen, InvariantError(f"duplicate object id {obj.id!r}", obj.id, "id"))
        seen.add(obj.id)

    for obj in objects:
        x0, y0, x1, y1 = obj.footprint
        on_table = x0 >= bounds.lo[0] and y0 >= bounds.lo[1] and x1 <= bounds.hi[0] and y1 <= bounds.hi[1]
        _require(
            on_table,
            InvariantError(f"object {obj.id!r}: footprint extends beyond the table bounds", obj.id, "position"),
        )

    for i, a in enumerate(objects):
        for b in objects[i + 1 :]:
            frac = _footprint_overlap_fraction(a, b)
            _require(
                frac <= MAX_FOOTPRINT_OVERLAP + 1e-12,
                InvariantError(
                    f"objects {a.id!r} and {b.id!r} overlap by {frac:.0%} of the smaller footprint",
                    a.id,
                    "position",
                ),
            )

    return Scene(scene_id, objects, bounds)


def scene_to_dict(scene: Scene) -> dict:
    """Serialize a scene back to the on-disk schema."""
    return {
        "id": scene.id,
        "table_bounds": {"min": list(scene.table_bounds.lo), "max": list(scene.table_bounds.hi)},
        "objects": [
            {
                "id": o.id,
                "category": o.category,
                "color": o.color.value,
                "position": list(o.position),
                "extent": list(o.extent),
                "base_detectability": o.base_detectability,
            }
            for o in scene.objects
        ],
    }


def scene_to_json(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene), indent=2) + "\n"


def absolute_size_class(volume: float) -> SizeClass:
    """Classify a volume by the fixed cutoffs alone."""
    if volume < SMALL_MAX_VOLUME:
        return SizeClass.SMALL
    if volume > BIG_MIN_VOLUME:
        return SizeClass.BIG
    return SizeClass.MEDIUM


def size_class_for_volume(volume: float, mate_volumes: Sequence[float]) -> SizeClass:
    """Classify a volume among its same-category companions.

    With at least MIN_MATES_FOR_QUANTILES companions (the object itself
    included) the lower/upper terciles of the companion volumes decide the
    class; tied volumes share the class of their midpoint rank, so equal
    inputs always get equal classes.  Otherwise absolute cutoffs apply.
    """
    if len(mate_volumes) >= MIN_MATES_FOR_QUANTILES:
        n = len(mate_volumes)
        below = sum(1 for v in mate_volumes if v < volume)
        up_to = sum(1 for v in mate_volumes if v <= volume)
        mid_rank = (below + up_to - 1) / 2.0
        if mid_rank < n / 3.0:
            return SizeClass.SMALL
        if mid_rank >= 2.0 * n / 3.0:
            return SizeClass.BIG
        return SizeClass.MEDIUM
    return absolute_size_class(volume)


def size_class(obj: SceneObject, scene: Scene) -> SizeClass:
    """Size class of ``obj`` relative to its category mates in ``scene``."""
    cat = normalize_category(obj.category)
    mates = [o.volume for o in scene.objects if normalize_category(o.category) == cat]
    return size_class_for_volume(obj.volume, mates)
