"""tabletalk: grounding referring expressions on simulated table-top scenes.

The package simulates a robot that matches spoken-style object references
("the blue cup left of the banana") against what its detector currently
sees, detects grounding conflicts, and resolves them by lowering detection
thresholds, moving its viewpoint, or asking the human a clarification
question.
"""

from .dialogue import Outcome, Question, Session, SessionState, WrongStateError
from .fuzzy import (
    KnowledgeGraph,
    Relation,
    Shape,
    ShapeProfile,
    build_graph,
    graph_dump,
    relation_membership,
    shape_class,
)
from .grounding import (
    Conflict,
    MatchScore,
    T1NoMatch,
    T2Ambiguous,
    T3Unique,
    classify,
    score_candidates,
)
from .perception import (
    DetectorConfig,
    Percept,
    Viewpoint,
    detect,
    lower_threshold,
    next_viewpoint,
    visibility,
)
from .refexp import ParseError, RefExp, parse, render, tokenize
from .scene import (
    Color,
    InvariantError,
    Rect,
    Scene,
    SceneObject,
    SchemaError,
    SizeClass,
    load_scene,
    normalize_category,
    scene_to_dict,
    scene_to_json,
    size_class,
)

__version__ = "0.1.0"

__all__ = [
    "Color",
    "Conflict",
    "DetectorConfig",
    "InvariantError",
    "KnowledgeGraph",
    "MatchScore",
    "Outcome",
    "ParseError",
    "Percept",
    "Question",
    "Rect",
    "RefExp",
    "Relation",
    "Scene",
    "SceneObject",
    "SchemaError",
    "Session",
    "SessionState",
    "Shape",
    "ShapeProfile",
    "SizeClass",
    "T1NoMatch",
    "T2Ambiguous",
    "T3Unique",
    "Viewpoint",
    "WrongStateError",
    "build_graph",
    "classify",
    "detect",
    "graph_dump",
    "load_scene",
    "lower_threshold",
    "next_viewpoint",
    "normalize_category",
    "parse",
    "relation_membership",
    "render",
    "scene_to_dict",
    "scene_to_json",
    "score_candidates",
    "shape_class",
    "size_class",
    "tokenize",
    "visibility",
]
