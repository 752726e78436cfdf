"""Turn-based dialogue controller for grounding conflicts.

One session handles one instruction.  The controller classifies the match
outcome (T-1 no match, T-2 ambiguous, T-3 unique) and resolves conflicts:

* T-1: lower the detection threshold for the target category and rescan;
  a unique match is case C-2, multiple matches are case C-3 and move on to
  clarification.  While no match remains, step the viewpoint 45 degrees and
  rescan, up to 7 steps, keeping the lowered threshold; then fail.
* T-2: ask the human.  The first attribute dimension (color, then size,
  then shape) whose values differ across candidates yields an attribute
  question (case C-1).  When attributes cannot discriminate, each candidate
  is described by its strongest relation to a landmark whose category is
  unique in the graph (spatial question, case C-2).

Sessions are deterministic: transcripts carry logical timestamps, so the
same scene, utterance, and answers always produce byte-identical
transcripts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum

from .fuzzy import KnowledgeGraph, Relation, build_graph
from .grounding import (
    DEFAULT_MATCH_THRESHOLD,
    T1NoMatch,
    T2Ambiguous,
    T3Unique,
    classify,
    score_candidates,
)
from .perception import (
    DetectorConfig,
    MAX_VIEWPOINT_CHANGES,
    Viewpoint,
    detect,
    lower_threshold,
    next_viewpoint,
)
from .refexp import AnswerFragment, ParseError, RefExp, parse, parse_fragment, render
from .scene import Scene, normalize_category

MAX_CLARIFICATION_TURNS = 8
MAX_REASKS_PER_QUESTION = 1

ORDINAL_WORDS = {
    "first": 1,
    "second": 2,
    "third": 3,
    "fourth": 4,
    "fifth": 5,
    "sixth": 6,
    "seventh": 7,
    "eighth": 8,
}

_ATTRIBUTE_DIMENSIONS = ("color", "size", "shape")

# Relation order used when picking spatial descriptors.
_DESCRIPTOR_RELATIONS = tuple(Relation)


class SessionState(str, Enum):
    AWAITING_INSTRUCTION = "awaiting_instruction"
    AWAITING_CLARIFICATION = "awaiting_clarification"
    RESOLVED = "resolved"
    FAILED = "failed"


class WrongStateError(Exception):
    """Operation not valid in the session's current state."""

    def __init__(self, state: SessionState, wanted: SessionState):
        self.state = state
        self.wanted = wanted
        super().__init__(f"session is {state.value}, operation requires {wanted.value}")


@dataclass(frozen=True)
class QuestionOption:
    """One clickable/printable answer with its structured meaning."""

    label: str
    fragment: AnswerFragment


@dataclass(frozen=True)
class Question:
    kind: str  # "attribute" | "spatial"
    case: str  # "C-1" | "C-2"
    text: str
    options: tuple[QuestionOption, ...]
    dimension: str | None = None

    def option_labels(self) -> list[str]:
        return [o.label for o in self.options]


@dataclass(frozen=True)
class Outcome:
    """Result of one user turn, mirroring the HTTP response shape."""

    status: str  # "resolved" | "question" | "failed"
    case: str | None = None
    target: str | None = None
    question: Question | None = None
    reason: str | None = None


class Session:
    """Single-instruction dialogue session over one scene.

    Not thread-safe; callers serialize operations per session.  Distinct
    sessions are independent.
    """

    def __init__(
        self,
        scene: Scene,
        *,
        viewpoint: Viewpoint | None = None,
        detector: DetectorConfig | None = None,
        tau: float = DEFAULT_MATCH_THRESHOLD,
    ):
        self.scene = scene
        self.viewpoint = viewpoint if viewpoint is not None else Viewpoint(0.0)
        self.detector = detector if detector is not None else DetectorConfig()
        self.tau = tau
        self.state = SessionState.AWAITING_INSTRUCTION
        self.active_refexp: RefExp | None = None
        self.candidate_ids: tuple[str, ...] = ()
        self.pending_question: Question | None = None
        self.graph: KnowledgeGraph | None = None
        self.viewpoint_changes = 0
        self.clarification_turns = 0
        self.reasks_used = 0
        self.events: list[dict] = []

    # -- transcript ---------------------------------------------------------

    def _event(self, kind: str, **payload) -> None:
        step = len(self.events) + 1
        entry: dict = {"step": step, "t": float(step - 1), "kind": kind}
        entry.update(payload)
        self.events.append(entry)

    def transcript(self) -> dict:
        return {"scene": self.scene.id, "events": list(self.events)}

    def transcript_json(self) -> str:
        return json.dumps(self.transcript(), indent=2) + "\n"

    # -- turns --------------------------------------------------------------

    def handle_utterance(self, text: str) -> Outcome:
        """Process the initial instruction and run conflict detection/resolution."""
        if self.state is not SessionState.AWAITING_INSTRUCTION:
            raise WrongStateError(self.state, SessionState.AWAITING_INSTRUCTION)
        self._event("utterance", text=text)
        try:
            rx = parse(text)
        except ParseError as err:
            self._event("parse", error=str(err))
            return self._fail(f"parse_error: {err}")
        self._event("parse", refexp=render(rx))
        self.active_refexp = rx

        conflict = self._perceive_and_classify()
        if isinstance(conflict, T3Unique):
            return self._resolve(conflict.percept_id)
        if isinstance(conflict, T1NoMatch):
            return self._resolve_t1()
        return self._begin_clarification(conflict.candidate_ids)

    def handle_answer(self, text: str) -> Outcome:
        """Process a clarification answer against the pending question."""
        if self.state is not SessionState.AWAITING_CLARIFICATION or self.pending_question is None:
            raise WrongStateError(self.state, SessionState.AWAITING_CLARIFICATION)
        self._event("answer", text=text)

        fragment, contradictory = self._interpret_answer(text)
        if fragment is None and not contradictory:
            return self._reask("unparseable_answer")
        if fragment is not None:
            augmented = self._merge_fragment(self.active_refexp, fragment)
            if augmented is None:
                contradictory = True
        if contradictory:
            return self._reask("contradictory_answer")

        scores = score_candidates(augmented, self.graph)
        surviving = {s.percept_id for s in scores if s.score >= self.tau}
        remaining = tuple(cid for cid in self.candidate_ids if cid in surviving)
        if not remaining:
            return self._reask("contradictory_answer")

        self.active_refexp = augmented
        self.candidate_ids = remaining
        if len(remaining) == 1:
            return self._resolve(remaining[0])
        return self._ask_next_question()

    # -- conflict detection -------------------------------------------------

    def _perceive_and_classify(self, case: str | None = None):
        percepts = detect(self.scene, self.viewpoint, self.detector)
        self._event(
            "perception",
            action="detect",
            azimuth_deg=self.viewpoint.azimuth_deg,
            detected=[p.object_id for p in percepts],
        )
        self.graph = build_graph(percepts, self.viewpoint, self.scene.table_bounds)
        scores = score_candidates(self.active_refexp, self.graph)
        conflict = classify(scores, self.tau)
        entry = {
            "conflict": conflict.label,
            "candidates": self._conflict_candidates(conflict),
            "scores": {s.percept_id: round(s.score, 6) for s in scores},
        }
        if case is not None and isinstance(conflict, T2Ambiguous):
            entry["case"] = case
        self._event("classification", **entry)
        return conflict

    @staticmethod
    def _conflict_candidates(conflict) -> list[str]:
        if isinstance(conflict, T3Unique):
            return [conflict.percept_id]
        if isinstance(conflict, T2Ambiguous):
            return list(conflict.candidate_ids)
        return []

    # -- T-1 resolution: perceptual actions ----------------------------------

    def _resolve_t1(self) -> Outcome:
        category = normalize_category(self.active_refexp.target_category)
        self.detector = lower_threshold(self.detector, category)
        self._event(
            "perception",
            action="lower_threshold",
            category=category,
            threshold=self.detector.threshold_for(category),
        )
        conflict = self._perceive_and_classify(case="C-3")
        if isinstance(conflict, T3Unique):
            return self._resolve(conflict.percept_id, case="C-2")
        if isinstance(conflict, T2Ambiguous):
            return self._begin_clarification(conflict.candidate_ids)

        while self.viewpoint_changes < MAX_VIEWPOINT_CHANGES:
            self.viewpoint = next_viewpoint(self.viewpoint)
            self.viewpoint_changes += 1
            self._event(
                "perception",
                action="change_viewpoint",
                azimuth_deg=self.viewpoint.azimuth_deg,
            )
            conflict = self._perceive_and_classify(case="C-3")
            if isinstance(conflict, T3Unique):
                return self._resolve(conflict.percept_id, case="C-2")
            if isinstance(conflict, T2Ambiguous):
                return self._begin_clarification(conflict.candidate_ids)
        return self._fail("not_found")

    # -- T-2 resolution: clarification ---------------------------------------

    def _begin_clarification(self, candidate_ids: tuple[str, ...]) -> Outcome:
        self.candidate_ids = tuple(sorted(candidate_ids))
        return self._ask_next_question()

    def _ask_next_question(self) -> Outcome:
        question = self._build_question()
        if question is None:
            return self._fail("indistinguishable")
        if self.clarification_turns >= MAX_CLARIFICATION_TURNS:
            return self._fail("turn_limit")
        self.clarification_turns += 1
        self.pending_question = question
        self.reasks_used = 0
        self.state = SessionState.AWAITING_CLARIFICATION
        self._event(
            "question",
            case=question.case,
            style=question.kind,
            text=question.text,
            options=question.option_labels(),
        )
        return Outcome(status="question", case=question.case, question=question)

    def _reask(self, reason: str) -> Outcome:
        if self.reasks_used >= MAX_REASKS_PER_QUESTION:
            return self._fail(reason)
        if self.clarification_turns >= MAX_CLARIFICATION_TURNS:
            return self._fail("turn_limit")
        self.reasks_used += 1
        self.clarification_turns += 1
        question = self.pending_question
        self._event(
            "question",
            case=question.case,
            style=question.kind,
            text=question.text,
            options=question.option_labels(),
            repeat=True,
        )
        return Outcome(status="question", case=question.case, question=question)

    def _build_question(self) -> Question | None:
        nodes = [self.graph.node(cid) for cid in self.candidate_ids]
        noun = normalize_category(self.active_refexp.target_category)

        getters = {
            "color": lambda n: n.percept.color.value,
            "size": lambda n: n.size.value,
            "shape": lambda n: n.shape.label.value,
        }
        for dimension in _ATTRIBUTE_DIMENSIONS:
            values = [getters[dimension](n) for n in nodes]
            if len(set(values)) > 1:
                distinct = list(dict.fromkeys(values))
                text = "do you mean " + _join_or([f"the {v}" for v in distinct]) + f" {noun}?"
                options = tuple(
                    QuestionOption(label=v, fragment=_attribute_fragment(dimension, v))
                    for v in distinct
                )
                return Question("attribute", "C-1", text, options, dimension=dimension)

        return self._build_spatial_question(nodes, noun)

    def _build_spatial_question(self, nodes, noun: str) -> Question | None:
        category_counts: dict[str, int] = {}
        for n in self.graph.nodes:
            cat = normalize_category(n.percept.category)
            category_counts[cat] = category_counts.get(cat, 0) + 1

        descriptors: list[tuple[Relation, str]] = []
        for node in nodes:
            best: tuple[float, Relation, str] | None = None
            for rel in _DESCRIPTOR_RELATIONS:
                for other in self.graph.nodes:
                    if other.id == node.id:
                        continue
                    landmark_cat = normalize_category(other.percept.category)
                    if category_counts[landmark_cat] != 1:
                        continue
                    degree = self.graph.degree(node.id, other.id, rel)
                    if best is None or degree > best[0]:
                        best = (degree, rel, landmark_cat)
            if best is None or best[0] <= 0.0:
                return None
            descriptors.append((best[1], best[2]))

        phrases = [f"{RELATION_PHRASES[rel]} the {cat}" for rel, cat in descriptors]
        if len(set(phrases)) != len(phrases):
            return None  # identical descriptors cannot distinguish the candidates

        items = [f"The {noun} {phrases[0]}"] + [f"the one {p}" for p in phrases[1:]]
        text = _join_or(items) + "?"
        options = tuple(
            QuestionOption(
                label=(f"the {noun} {phrases[0]}" if i == 0 else f"the one {phrases[i]}"),
                fragment=AnswerFragment(relations=((descriptors[i][0], RefExp(descriptors[i][1])),)),
            )
            for i in range(len(phrases))
        )
        return Question("spatial", "C-2", text, options)

    # -- answer interpretation -----------------------------------------------

    def _interpret_answer(self, text: str) -> tuple[AnswerFragment | None, bool]:
        """Returns (fragment, contradictory).  fragment None + not contradictory

        means the answer was unparseable."""
        from .refexp import tokenize

        tokens = tokenize(text)
        core = [t for t in tokens if t not in {"the", "one", "option"}]
        if len(core) == 1 and core[0] in ORDINAL_WORDS:
            index = ORDINAL_WORDS[core[0]] - 1
            if index < len(self.pending_question.options):
                return self.pending_question.options[index].fragment, False
            return None, True

        try:
            return parse_fragment(text), False
        except ParseError:
            return None, False

    def _merge_fragment(self, base: RefExp, fragment: AnswerFragment) -> RefExp | None:
        """Augment the active expression with answer constraints.

        Returns None when the answer names a different object category,
        which cannot be reconciled with the instruction.
        """
        if fragment.category is not None and fragment.category not in ("one", "it"):
            if normalize_category(fragment.category) != normalize_category(base.target_category):
                return None
        return replace(
            base,
            color=fragment.color if fragment.color is not None else base.color,
            size=fragment.size if fragment.size is not None else base.size,
            shape=fragment.shape if fragment.shape is not None else base.shape,
            relations=base.relations + fragment.relations,
        )

    # -- terminal outcomes ----------------------------------------------------

    def _resolve(self, percept_id: str, case: str | None = None) -> Outcome:
        self.state = SessionState.RESOLVED
        self.pending_question = None
        self.candidate_ids = (percept_id,)
        entry = {"status": "resolved", "target": percept_id}
        if case is not None:
            entry["case"] = case
        self._event("outcome", **entry)
        return Outcome(status="resolved", case=case, target=percept_id)

    def _fail(self, reason: str) -> Outcome:
        self.state = SessionState.FAILED
        self.pending_question = None
        self._event("outcome", status="failed", reason=reason)
        return Outcome(status="failed", reason=reason)


RELATION_PHRASES = {
    Relation.LEFT_OF: "left of",
    Relation.RIGHT_OF: "right of",
    Relation.IN_FRONT_OF: "in front of",
    Relation.BEHIND: "behind",
    Relation.NEAR: "near",
    Relation.NEXT_TO: "next to",
    Relation.ON: "on",
}


def _attribute_fragment(dimension: str, value: str) -> AnswerFragment:
    from .fuzzy import Shape
    from .scene import Color, SizeClass

    if dimension == "color":
        return AnswerFragment(color=Color(value))
    if dimension == "size":
        return AnswerFragment(size=SizeClass(value))
    return AnswerFragment(shape=Shape(value))


def _join_or(items: list[str]) -> str:
    if len(items) == 1:
        return items[0]
    return ", ".join(items[:-1]) + " or " + items[-1]


def outcome_string(outcome: Outcome) -> str:
    """Canonical one-line form used by scenario scripts."""
    if outcome.status == "resolved":
        return f"resolved:{outcome.target}"
    if outcome.status == "failed":
        return f"failed:{outcome.reason}"
    return "question"
