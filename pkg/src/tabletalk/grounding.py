"""Match referring expressions against the knowledge graph and classify the outcome.

Scoring is Goedel-style fuzzy logic: constraints combine with min, the
choice of landmark for a relation combines with max.  A candidate's score
is therefore the degree of its weakest constraint under the best possible
landmark assignment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .fuzzy import KnowledgeGraph
from .refexp import RefExp
from .scene import normalize_category

DEFAULT_MATCH_THRESHOLD = 0.5


@dataclass(frozen=True)
class MatchScore:
    percept_id: str
    score: float
    breakdown: Mapping[str, float]


@dataclass(frozen=True)
class T1NoMatch:
    label = "T-1"


@dataclass(frozen=True)
class T2Ambiguous:
    candidate_ids: tuple[str, ...]
    label = "T-2"


@dataclass(frozen=True)
class T3Unique:
    percept_id: str
    label = "T-3"


Conflict = T1NoMatch | T2Ambiguous | T3Unique


def _score_node(rx: RefExp, graph: KnowledgeGraph, node_id: str) -> tuple[float, dict[str, float]]:
    node = graph.node(node_id)
    breakdown: dict[str, float] = {}

    target = normalize_category(rx.target_category)
    breakdown["category"] = 1.0 if normalize_category(node.percept.category) == target else 0.0
    if rx.color is not None:
        breakdown[f"color={rx.color.value}"] = 1.0 if node.percept.color == rx.color else 0.0
    if rx.size is not None:
        breakdown[f"size={rx.size.value}"] = 1.0 if node.size == rx.size else 0.0
    if rx.shape is not None:
        breakdown[f"shape={rx.shape.value}"] = node.shape.memberships[rx.shape]

    for idx, (rel, landmark) in enumerate(rx.relations):
        landmark_scores = {s.percept_id: s.score for s in score_candidates(landmark, graph)}
        best = 0.0
        for other in graph.nodes:
            if other.id == node_id:
                continue
            best = max(best, min(landmark_scores[other.id], graph.degree(node_id, other.id, rel)))
        breakdown[f"rel{idx}:{rel.value}"] = best

    return min(breakdown.values()), breakdown


def score_candidates(rx: RefExp, graph: KnowledgeGraph) -> list[MatchScore]:
    """Score every node, zero-score entries included, sorted by

    (score descending, percept id ascending)."""
    scores = []
    for node in graph.nodes:
        score, breakdown = _score_node(rx, graph, node.id)
        scores.append(MatchScore(node.id, score, breakdown))
    return sorted(scores, key=lambda s: (-s.score, s.percept_id))


def classify(scores: Sequence[MatchScore], tau: float = DEFAULT_MATCH_THRESHOLD) -> Conflict:
    """Partition into no match (T-1), ambiguous (T-2), or unique match (T-3)."""
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"match threshold must be in (0, 1], got {tau}")
    candidates = sorted(s.percept_id for s in scores if s.score >= tau)
    if not candidates:
        return T1NoMatch()
    if len(candidates) == 1:
        return T3Unique(candidates[0])
    return T2Ambiguous(tuple(candidates))
