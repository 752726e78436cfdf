"""Shared test utilities: scene builders, seeded generators, brute-force oracle.

The oracle scores referring expressions by exhaustively enumerating every
landmark assignment, deliberately avoiding the recursive max/min evaluation
of the production scorer.
"""

from __future__ import annotations

import itertools
import random

from tabletalk import (
    Color,
    DetectorConfig,
    Percept,
    Rect,
    RefExp,
    Relation,
    Scene,
    SceneObject,
    Shape,
    SizeClass,
    Viewpoint,
    normalize_category,
)
from tabletalk.fuzzy import KnowledgeGraph

TABLE = Rect((-0.5, 0.2), (0.5, 1.2))

CATEGORY_EXTENTS = {
    "cup": (0.08, 0.08, 0.10),
    "book": (0.12, 0.18, 0.04),
    "banana": (0.18, 0.06, 0.05),
    "plate": (0.20, 0.20, 0.03),
    "box": (0.10, 0.10, 0.30),
    "phone": (0.07, 0.15, 0.01),
    "bottle": (0.07, 0.07, 0.25),
    "apple": (0.08, 0.08, 0.08),
}
CATEGORIES = sorted(CATEGORY_EXTENTS)


def make_object(
    object_id: str,
    category: str = "cup",
    color: Color = Color.RED,
    position=(0.0, 0.7, 0.05),
    extent=(0.08, 0.08, 0.10),
    detectability: float = 0.9,
) -> SceneObject:
    return SceneObject(object_id, category, color, tuple(position), tuple(extent), detectability)


def make_scene(objects, scene_id: str = "test", bounds: Rect = TABLE) -> Scene:
    return Scene(scene_id, tuple(objects), bounds)


def percept_of(obj: SceneObject, confidence: float | None = None) -> Percept:
    return Percept(
        obj.id,
        obj.category,
        obj.color,
        obj.position,
        obj.extent,
        obj.base_detectability if confidence is None else confidence,
    )


def random_scene(rng: random.Random, n_objects: int | None = None) -> Scene:
    """Valid-by-construction scene: objects on a 0.2 m grid so footprints never overlap."""
    n = n_objects if n_objects is not None else rng.randint(1, 10)
    cells = [
        (round(-0.4 + 0.2 * i, 10), round(0.3 + 0.2 * j, 10)) for i in range(5) for j in range(5)
    ]
    spots = rng.sample(cells, n)
    objects = []
    for i, (x, y) in enumerate(spots):
        category = rng.choice(CATEGORIES)
        w, d, h = CATEGORY_EXTENTS[category]
        scale = rng.choice([0.6, 0.8, 1.0])
        w, d, h = w * scale, d * scale, h * scale
        objects.append(
            SceneObject(
                id=f"obj{i:02d}",
                category=category,
                color=rng.choice(list(Color)),
                position=(x, y, h / 2.0),
                extent=(w, d, h),
                base_detectability=rng.choice([0.4, 0.5, 0.6, 0.75, 0.9, 1.0]),
            )
        )
    return Scene(f"random_{rng.randint(0, 10**9)}", tuple(objects), TABLE)


def random_viewpoint(rng: random.Random) -> Viewpoint:
    return Viewpoint(
        azimuth_deg=float(rng.randrange(0, 360, 15)),
        distance_m=rng.choice([0.8, 1.0, 1.2, 1.5]),
        height_m=rng.choice([0.4, 0.6, 0.8]),
    )


def random_refexp(rng: random.Random, categories: list[str], depth: int = 0) -> RefExp:
    """Random expression over the given category pool, relation depth <= 2."""
    pool = categories + ["widget"]
    rx = RefExp(
        target_category=rng.choice(pool),
        color=rng.choice(list(Color)) if rng.random() < 0.35 else None,
        size=rng.choice(list(SizeClass)) if rng.random() < 0.25 else None,
        shape=rng.choice(list(Shape)) if rng.random() < 0.25 else None,
    )
    relations = []
    if depth < 2 and rng.random() < (0.6 if depth == 0 else 0.4):
        relations.append((rng.choice(list(Relation)), random_refexp(rng, categories, depth + 1)))
    if depth == 0 and rng.random() < 0.15:
        landmark = random_refexp(rng, categories, 2)  # flat second relation, no further nesting
        relations.append((rng.choice(list(Relation)), landmark))
    return rx if not relations else RefExp(
        rx.target_category,
        color=rx.color,
        size=rx.size,
        shape=rx.shape,
        relations=tuple(relations),
    )


def _attribute_degree(rx: RefExp, graph: KnowledgeGraph, node_id: str) -> float:
    """Category and attribute constraints of one expression at one node."""
    node = graph.node(node_id)
    values = [
        1.0
        if normalize_category(node.percept.category) == normalize_category(rx.target_category)
        else 0.0
    ]
    if rx.color is not None:
        values.append(1.0 if node.percept.color == rx.color else 0.0)
    if rx.size is not None:
        values.append(1.0 if node.size == rx.size else 0.0)
    if rx.shape is not None:
        values.append(node.shape.memberships[rx.shape])
    return min(values)


def oracle_scores(rx: RefExp, graph: KnowledgeGraph) -> list[tuple[str, float]]:
    """Exhaustive reference scorer: max over all full landmark assignments."""
    node_ids = graph.node_ids()

    slots: list[tuple[int | None, Relation, RefExp]] = []

    def collect(expr: RefExp, parent: int | None) -> None:
        for rel, landmark in expr.relations:
            slot_id = len(slots)
            slots.append((parent, rel, landmark))
            collect(landmark, slot_id)

    collect(rx, None)

    results = []
    for root in node_ids:
        if not slots:
            best = _attribute_degree(rx, graph, root)
        else:
            best = 0.0
            for assignment in itertools.product(node_ids, repeat=len(slots)):

                def holder(slot_index: int) -> str:
                    parent = slots[slot_index][0]
                    return root if parent is None else assignment[parent]

                if any(assignment[i] == holder(i) for i in range(len(slots))):
                    continue
                values = [_attribute_degree(rx, graph, root)]
                for i, (_, rel, landmark) in enumerate(slots):
                    values.append(_attribute_degree(landmark, graph, assignment[i]))
                    values.append(graph.degree(holder(i), assignment[i], rel))
                candidate = min(values)
                if candidate > best:
                    best = candidate
        results.append((root, best))
    results.sort(key=lambda pair: (-pair[1], pair[0]))
    return results


def detect_all(scene: Scene, vp: Viewpoint | None = None):
    """Percepts of every object regardless of confidence (threshold 0)."""
    from tabletalk import detect

    vp = vp if vp is not None else Viewpoint(0.0)
    return detect(scene, vp, DetectorConfig(default_threshold=0.0))
