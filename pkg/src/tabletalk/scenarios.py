"""Scripted dialogue scenarios: load, run, compare against expectations.

A scenario file is a JSON list of entries:

    {"scene": str, "utterance": str, "answers": [str], "expected_outcome": str,
     "name": str (optional)}

``expected_outcome`` uses the canonical outcome strings: ``resolved:<id>``,
``failed:<reason>``, or ``question`` when the script ends with the robot
still asking.
"""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .dialogue import Outcome, Session, outcome_string
from .scene import Scene


class ScenarioError(Exception):
    pass


@dataclass(frozen=True)
class Scenario:
    name: str
    scene_id: str
    utterance: str
    answers: tuple[str, ...]
    expected_outcome: str


@dataclass
class ScenarioResult:
    scenario: Scenario
    actual: str = ""
    session: Session | None = None
    error: str | None = None
    golden_diff: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            self.error is None
            and self.actual == self.scenario.expected_outcome
            and not self.golden_diff
        )


def load_scenarios(path: str | Path) -> list[Scenario]:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, list):
        raise ScenarioError("scenario file must contain a JSON list")
    scenarios = []
    for i, entry in enumerate(doc):
        scenarios.append(_parse_entry(entry, i))
    return scenarios


def _parse_entry(entry: object, index: int) -> Scenario:
    if not isinstance(entry, dict):
        raise ScenarioError(f"scenario #{index + 1} must be an object")
    required = {"scene", "utterance", "answers", "expected_outcome"}
    missing = required - entry.keys()
    if missing:
        raise ScenarioError(f"scenario #{index + 1} missing field(s): {', '.join(sorted(missing))}")
    answers = entry["answers"]
    if not isinstance(answers, list) or not all(isinstance(a, str) for a in answers):
        raise ScenarioError(f"scenario #{index + 1}: answers must be a list of strings")
    name = entry.get("name") or f"scenario_{index + 1:02d}"
    return Scenario(
        name=str(name),
        scene_id=str(entry["scene"]),
        utterance=str(entry["utterance"]),
        answers=tuple(answers),
        expected_outcome=str(entry["expected_outcome"]),
    )


def run_script(scene: Scene, utterance: str, answers: tuple[str, ...]) -> tuple[Session, Outcome]:
    """Drive one session through an utterance and scripted answers."""
    session = Session(scene)
    outcome = session.handle_utterance(utterance)
    for answer in answers:
        if outcome.status != "question":
            break
        outcome = session.handle_answer(answer)
    return session, outcome


def run_scenario(scenario: Scenario, scene: Scene, golden_dir: str | Path | None = None) -> ScenarioResult:
    result = ScenarioResult(scenario)
    try:
        session, outcome = run_script(scene, scenario.utterance, scenario.answers)
    except Exception as err:  # scripted runs should never raise; surface if they do
        result.error = f"{type(err).__name__}: {err}"
        return result
    result.session = session
    result.actual = outcome_string(outcome)
    if golden_dir is not None:
        golden_path = Path(golden_dir) / f"{scenario.name}.transcript.json"
        if not golden_path.exists():
            result.error = f"missing golden transcript {golden_path}"
        else:
            expected = golden_path.read_text()
            actual = session.transcript_json()
            if expected != actual:
                result.golden_diff = list(
                    difflib.unified_diff(
                        expected.splitlines(),
                        actual.splitlines(),
                        fromfile=str(golden_path),
                        tofile="actual",
                        lineterm="",
                    )
                )
    return result
