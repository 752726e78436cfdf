"""Fuzzy spatial relations, fuzzy shape classes, and the perceived-scene graph.

Directional relations are evaluated in the viewer's frame derived from the
current viewpoint, so rotating the camera changes what counts as "left".
Membership functions are picked for smoothness and exact symmetry:

* direction: max(0, cos theta)^2 against the relation axis
* near:      trapezoid over center distance normalized by the table diagonal,
             full below 0.1, zero above 0.3
* on:        footprint overlap fraction, gated by >= 50% overlap and a
             vertical gap of at most 1 cm
* next_to:   min(near, 1 - on)

``left_of(a, b)`` and ``right_of(b, a)`` use the same arithmetic on mirrored
axes, which makes the antisymmetry exact in floating point, not just
approximate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Protocol, Sequence

from .perception import Percept, Viewpoint, view_axes
from .scene import Rect, SizeClass, Vec3, absolute_size_class, normalize_category

# Geometry constants (meters / unitless fractions).
DEGENERATE_DISPLACEMENT = 1e-3
DIRECTION_POWER = 2
NEAR_FULL_FRACTION = 0.1
NEAR_ZERO_FRACTION = 0.3
ON_MIN_OVERLAP = 0.5
ON_MAX_GAP = 0.01

# Shape membership breakpoints over elongation e = max/min extent and
# flatness f = height / max horizontal extent.
ROUND_ZERO_ELONGATION = 2.0
ELONGATED_START = 2.0
ELONGATED_FULL = 4.0
FLAT_FULL = 0.1
FLAT_ZERO = 0.4


class Relation(str, Enum):
    LEFT_OF = "left_of"
    RIGHT_OF = "right_of"
    IN_FRONT_OF = "in_front_of"
    BEHIND = "behind"
    NEAR = "near"
    ON = "on"
    NEXT_TO = "next_to"


DIRECTIONAL_RELATIONS = (
    Relation.LEFT_OF,
    Relation.RIGHT_OF,
    Relation.IN_FRONT_OF,
    Relation.BEHIND,
)


class Shape(str, Enum):
    ROUND = "round"
    ELONGATED = "elongated"
    FLAT = "flat"
    BOXY = "boxy"


@dataclass(frozen=True)
class ShapeProfile:
    """Fuzzy shape memberships plus the argmax label (ties break in enum order)."""

    label: Shape
    memberships: Mapping[Shape, float]


class _Placed(Protocol):
    position: Vec3
    extent: Vec3


def horizontal_displacement(a: _Placed, b: _Placed) -> tuple[float, float]:
    return (a.position[0] - b.position[0], a.position[1] - b.position[1])


def is_degenerate_pair(a: _Placed, b: _Placed) -> bool:
    """True when the pair is too close for directional relations to apply."""
    return math.hypot(*horizontal_displacement(a, b)) < DEGENERATE_DISPLACEMENT


def _direction_membership(a: _Placed, b: _Placed, axis: tuple[float, float]) -> float:
    dx, dy = horizontal_displacement(a, b)
    norm = math.hypot(dx, dy)
    if norm < DEGENERATE_DISPLACEMENT:
        return 0.0
    cos_theta = (dx * axis[0] + dy * axis[1]) / norm
    return max(0.0, cos_theta) ** DIRECTION_POWER


def _near_membership(a: _Placed, b: _Placed, bounds: Rect) -> float:
    dx, dy = horizontal_displacement(a, b)
    x = math.hypot(dx, dy) / bounds.diagonal
    if x <= NEAR_FULL_FRACTION:
        return 1.0
    if x >= NEAR_ZERO_FRACTION:
        return 0.0
    return (NEAR_ZERO_FRACTION - x) / (NEAR_ZERO_FRACTION - NEAR_FULL_FRACTION)


def _footprint(p: _Placed) -> tuple[float, float, float, float]:
    x, y, _ = p.position
    w, d, _ = p.extent
    return (x - w / 2.0, y - d / 2.0, x + w / 2.0, y + d / 2.0)


def _on_membership(a: _Placed, b: _Placed) -> float:
    """Degree to which ``a`` rests on top of ``b``."""
    ax0, ay0, ax1, ay1 = _footprint(a)
    bx0, by0, bx1, by1 = _footprint(b)
    w = min(ax1, bx1) - max(ax0, bx0)
    d = min(ay1, by1) - max(ay0, by0)
    if w <= 0.0 or d <= 0.0:
        return 0.0
    fraction = (w * d) / ((ax1 - ax0) * (ay1 - ay0))
    a_bottom = a.position[2] - a.extent[2] / 2.0
    b_top = b.position[2] + b.extent[2] / 2.0
    if fraction >= ON_MIN_OVERLAP and abs(a_bottom - b_top) <= ON_MAX_GAP:
        return min(1.0, fraction)
    return 0.0


def relation_membership(a: _Placed, b: _Placed, rel: Relation, vp: Viewpoint, bounds: Rect) -> float:
    """Membership degree in [0, 1] for the ordered pair (a, b).

    Directional pairs closer than 1 mm in the table plane are degenerate and
    score 0; callers can test that condition with ``is_degenerate_pair``.
    """
    forward, right = view_axes(vp, bounds)
    if rel is Relation.LEFT_OF:
        return _direction_membership(a, b, (-right[0], -right[1]))
    if rel is Relation.RIGHT_OF:
        return _direction_membership(a, b, right)
    if rel is Relation.IN_FRONT_OF:
        return _direction_membership(a, b, (-forward[0], -forward[1]))
    if rel is Relation.BEHIND:
        return _direction_membership(a, b, forward)
    if rel is Relation.NEAR:
        return _near_membership(a, b, bounds)
    if rel is Relation.ON:
        return _on_membership(a, b)
    if rel is Relation.NEXT_TO:
        return min(_near_membership(a, b, bounds), 1.0 - _on_membership(a, b))
    raise ValueError(f"unknown relation {rel!r}")


def _ramp_down(x: float, full: float, zero: float) -> float:
    if x <= full:
        return 1.0
    if x >= zero:
        return 0.0
    return (zero - x) / (zero - full)


def shape_class(p: _Placed) -> ShapeProfile:
    """Fuzzy shape of a box extent.

    Rules over elongation e = max/min extent and flatness f = h/max(w, d):
    round peaks at e = 1 and dies at e = 2; elongated ramps up over e in
    [2, 4]; flat ramps down over f in [0.1, 0.4]; boxy is the leftover
    1 - max(others), floored at zero.
    """
    w, d, h = p.extent
    longest = max(w, d, h)
    shortest = min(w, d, h)
    e = longest / shortest
    f = h / max(w, d)

    memberships = {
        Shape.ROUND: max(0.0, (ROUND_ZERO_ELONGATION - e) / (ROUND_ZERO_ELONGATION - 1.0)),
        Shape.ELONGATED: min(1.0, max(0.0, (e - ELONGATED_START) / (ELONGATED_FULL - ELONGATED_START))),
        Shape.FLAT: _ramp_down(f, FLAT_FULL, FLAT_ZERO),
    }
    memberships[Shape.BOXY] = max(0.0, 1.0 - max(memberships.values()))
    label = max(Shape, key=lambda s: (memberships[s], -list(Shape).index(s)))
    return ShapeProfile(label, memberships)


@dataclass(frozen=True)
class GraphNode:
    percept: Percept
    size: SizeClass
    shape: ShapeProfile

    @property
    def id(self) -> str:
        return self.percept.object_id


@dataclass(frozen=True)
class KnowledgeGraph:
    """Dense fuzzy-relation graph over the current percepts.

    Every ordered pair of distinct nodes carries a degree for every
    relation; nodes are ordered by percept id.
    """

    nodes: tuple[GraphNode, ...]
    edges: Mapping[tuple[str, str, Relation], float]

    def node(self, percept_id: str) -> GraphNode:
        for n in self.nodes:
            if n.id == percept_id:
                return n
        raise KeyError(percept_id)

    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    def degree(self, a_id: str, b_id: str, rel: Relation) -> float:
        return self.edges[(a_id, b_id, rel)]


def build_graph(percepts: Sequence[Percept], vp: Viewpoint, bounds: Rect) -> KnowledgeGraph:
    """Annotate percepts with size/shape and compute all pairwise relations.

    Node sizes use the absolute volume cutoffs, never the within-category
    quantiles: a percept's annotations must not change as other percepts
    come and go, or candidate scores could drop when detection grows.
    """
    ids = [p.object_id for p in percepts]
    if len(set(ids)) != len(ids):
        raise ValueError("percept ids must be unique")

    ordered = sorted(percepts, key=lambda p: p.object_id)
    nodes = tuple(
        GraphNode(
            percept=p,
            size=absolute_size_class(p.extent[0] * p.extent[1] * p.extent[2]),
            shape=shape_class(p),
        )
        for p in ordered
    )

    edges: dict[tuple[str, str, Relation], float] = {}
    for a in nodes:
        for b in nodes:
            if a.id == b.id:
                continue
            for rel in Relation:
                edges[(a.id, b.id, rel)] = relation_membership(a.percept, b.percept, rel, vp, bounds)
    return KnowledgeGraph(nodes, edges)


def graph_dump(graph: KnowledgeGraph) -> dict:
    """JSON-ready dump with degrees rounded to 6 decimals (golden-file stable)."""
    nodes = [
        {
            "id": n.id,
            "category": n.percept.category,
            "color": n.percept.color.value,
            "position": list(n.percept.position),
            "extent": list(n.percept.extent),
            "confidence": n.percept.confidence,
            "size": n.size.value,
            "shape": n.shape.label.value,
            "shape_memberships": {s.value: round(m, 6) for s, m in n.shape.memberships.items()},
        }
        for n in graph.nodes
    ]
    edges = [
        {"a": a.id, "b": b.id, "rel": rel.value, "deg": round(graph.degree(a.id, b.id, rel), 6)}
        for a in graph.nodes
        for b in graph.nodes
        if a.id != b.id
        for rel in Relation
    ]
    return {"nodes": nodes, "edges": edges}
