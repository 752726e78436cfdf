"""Controller state machine: conflict paths, clarification, caps, determinism."""

import pytest

from tabletalk import Color, Session, SessionState, WrongStateError
from tabletalk.scene import load_scene
from helpers import make_object, make_scene

import json
from pathlib import Path

SCENES = Path(__file__).resolve().parent.parent / "scenes"


def scene_from_file(name: str):
    return load_scene((SCENES / f"{name}.json").read_bytes())


def test_unique_match_resolves_directly():
    session = Session(scene_from_file("t3_unique"))
    outcome = session.handle_utterance("give me the cup")
    assert outcome.status == "resolved"
    assert outcome.target == "cup1"
    assert session.state is SessionState.RESOLVED


def test_lowering_threshold_resolves_missed_object():
    session = Session(scene_from_file("t1_lowering"))
    outcome = session.handle_utterance("give me the cup")
    assert (outcome.status, outcome.case, outcome.target) == ("resolved", "C-2", "cup1")
    assert session.detector.threshold_for("cup") == 0.3
    assert session.viewpoint_changes == 0


def test_lowering_can_surface_multiple_matches_then_question():
    session = Session(scene_from_file("t1_multi"))
    outcome = session.handle_utterance("give me the cup")
    assert outcome.status == "question"
    assert outcome.case == "C-1"
    assert outcome.question.text == "do you mean the blue or the red cup?"
    classifications = [e for e in session.events if e["kind"] == "classification"]
    assert classifications[-1].get("case") == "C-3"
    final = session.handle_answer("red")
    assert (final.status, final.target) == ("resolved", "cup2")


def test_viewpoint_changes_reveal_occluded_object():
    session = Session(scene_from_file("t1_viewpoint"))
    outcome = session.handle_utterance("give me the cup")
    assert (outcome.status, outcome.case, outcome.target) == ("resolved", "C-2", "cup1")
    assert session.viewpoint_changes == 2
    assert session.viewpoint.azimuth_deg == 90.0


def test_attribute_question_verbatim_and_answer():
    session = Session(scene_from_file("t2_attribute"))
    outcome = session.handle_utterance("give me the cup")
    assert outcome.question.text == "do you mean the blue or the red cup?"
    assert outcome.question.option_labels() == ["blue", "red"]
    assert session.state is SessionState.AWAITING_CLARIFICATION
    final = session.handle_answer("the blue one")
    assert (final.status, final.target) == ("resolved", "cup1")


def test_spatial_question_verbatim_and_answer():
    session = Session(scene_from_file("t2_spatial"))
    outcome = session.handle_utterance("give me the cup")
    assert outcome.status == "question"
    assert outcome.case == "C-2"
    assert outcome.question.text == "The cup left of the banana or the one behind the book?"
    assert outcome.question.option_labels() == [
        "the cup left of the banana",
        "the one behind the book",
    ]
    final = session.handle_answer("the one behind the book")
    assert (final.status, final.target) == ("resolved", "cup2")


def test_spatial_option_label_click_resolves():
    session = Session(scene_from_file("t2_spatial"))
    outcome = session.handle_utterance("give me the cup")
    final = session.handle_answer(outcome.question.option_labels()[0])
    assert (final.status, final.target) == ("resolved", "cup1")


def test_ordinal_answer_selects_option():
    session = Session(scene_from_file("t2_attribute"))
    session.handle_utterance("give me the cup")
    final = session.handle_answer("the second one")
    assert (final.status, final.target) == ("resolved", "cup2")


def test_out_of_range_ordinal_reasks_then_fails():
    session = Session(scene_from_file("t2_attribute"))
    session.handle_utterance("give me the cup")
    again = session.handle_answer("the fifth one")
    assert again.status == "question"
    final = session.handle_answer("the fifth one")
    assert (final.status, final.reason) == ("failed", "contradictory_answer")


def test_contradictory_answer_reasks_once_then_fails():
    session = Session(scene_from_file("t2_attribute"))
    session.handle_utterance("give me the cup")
    again = session.handle_answer("green")
    assert again.status == "question"
    assert [e for e in session.events if e["kind"] == "question"][-1]["repeat"] is True
    final = session.handle_answer("green")
    assert (final.status, final.reason) == ("failed", "contradictory_answer")
    assert session.state is SessionState.FAILED


def test_unparseable_answer_reasks_once_then_fails():
    session = Session(scene_from_file("t2_attribute"))
    session.handle_utterance("give me the cup")
    again = session.handle_answer("fjord vibrantly quix")
    assert again.status == "question"
    final = session.handle_answer("wibble wobble")
    assert (final.status, final.reason) == ("failed", "unparseable_answer")


def three_cup_scene():
    # absolute size classes: 150 cm^3 small, 1800 cm^3 big, 640 cm^3 medium
    return make_scene(
        [
            make_object("cup1", color=Color.BLUE, position=(-0.3, 0.5, 0.03), extent=(0.05, 0.05, 0.06)),
            make_object("cup2", color=Color.BLUE, position=(0.0, 0.5, 0.09), extent=(0.10, 0.10, 0.18)),
            make_object("cup3", color=Color.RED, position=(0.3, 0.5, 0.05), extent=(0.08, 0.08, 0.10)),
        ],
        scene_id="three_cups",
    )


def test_second_question_on_size_after_color_answer():
    session = Session(three_cup_scene())
    first = session.handle_utterance("give me the cup")
    assert first.question.dimension == "color"
    assert first.question.option_labels() == ["blue", "red"]
    assert set(session.candidate_ids) == {"cup1", "cup2", "cup3"}

    second = session.handle_answer("blue")
    assert second.status == "question"
    assert second.question.dimension == "size"
    assert second.question.option_labels() == ["small", "big"]
    assert set(session.candidate_ids) == {"cup1", "cup2"}

    final = session.handle_answer("big")
    assert (final.status, final.target) == ("resolved", "cup2")


def test_candidate_sets_strictly_shrink_per_informative_answer():
    session = Session(three_cup_scene())
    session.handle_utterance("give me the cup")
    sizes = [len(session.candidate_ids)]
    session.handle_answer("blue")
    sizes.append(len(session.candidate_ids))
    session.handle_answer("big")
    sizes.append(len(session.candidate_ids))
    assert sizes == [3, 2, 1]


def test_indistinguishable_twins_fail():
    scene = make_scene(
        [
            make_object("cup1", position=(-0.2, 0.5, 0.05)),
            make_object("cup2", position=(0.2, 0.5, 0.05)),
        ]
    )
    session = Session(scene)
    outcome = session.handle_utterance("give me the cup")
    assert (outcome.status, outcome.reason) == ("failed", "indistinguishable")


def test_identical_descriptors_fail():
    # both cups sit in front of the single banana with equal degree
    scene = make_scene(
        [
            make_object("cup1", position=(-0.2, 0.5, 0.05)),
            make_object("cup2", position=(0.2, 0.5, 0.05)),
            make_object(
                "banana1", "banana", Color.YELLOW, position=(0.0, 1.0, 0.025), extent=(0.18, 0.06, 0.05)
            ),
        ]
    )
    session = Session(scene)
    outcome = session.handle_utterance("give me the cup")
    assert (outcome.status, outcome.reason) == ("failed", "indistinguishable")


def test_uninformative_answers_hit_turn_limit():
    session = Session(three_cup_scene())
    outcome = session.handle_utterance("give me the cup")
    answers = 0
    while outcome.status == "question":
        outcome = session.handle_answer("the cup")  # restates the instruction, filters nothing
        answers += 1
        assert answers <= 8
    assert (outcome.status, outcome.reason) == ("failed", "turn_limit")
    assert session.clarification_turns <= 8


def test_absent_category_exhausts_viewpoints_then_fails():
    scene = make_scene(
        [make_object("book1", "book", position=(0.0, 0.5, 0.02), extent=(0.12, 0.18, 0.04))]
    )
    session = Session(scene)
    outcome = session.handle_utterance("give me the cup")
    assert (outcome.status, outcome.reason) == ("failed", "not_found")
    assert session.viewpoint_changes == 7
    moves = [e for e in session.events if e.get("action") == "change_viewpoint"]
    assert [m["azimuth_deg"] for m in moves] == [45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0]


def test_parse_failure_skips_conflict_machinery():
    session = Session(scene_from_file("t3_unique"))
    outcome = session.handle_utterance("give give give")
    assert outcome.status == "failed"
    assert outcome.reason.startswith("parse_error")
    assert session.state is SessionState.FAILED
    kinds = {e["kind"] for e in session.events}
    assert "perception" not in kinds
    assert "classification" not in kinds


def test_wrong_state_rejected():
    session = Session(scene_from_file("t3_unique"))
    with pytest.raises(WrongStateError):
        session.handle_answer("blue")
    session.handle_utterance("give me the cup")
    with pytest.raises(WrongStateError):
        session.handle_utterance("give me the cup")


def test_transcripts_are_deterministic():
    def run():
        session = Session(scene_from_file("t2_spatial"))
        session.handle_utterance("give me the cup")
        session.handle_answer("the one behind the book")
        return session.transcript_json()

    assert run() == run()


def test_transcript_steps_numbered_and_timestamped():
    session = Session(scene_from_file("t3_unique"))
    session.handle_utterance("give me the cup")
    transcript = session.transcript()
    assert transcript["scene"] == "t3_unique"
    steps = [e["step"] for e in transcript["events"]]
    assert steps == list(range(1, len(steps) + 1))
    assert [e["t"] for e in transcript["events"]] == [float(s - 1) for s in steps]
    assert json.loads(session.transcript_json()) == transcript
