"""Command-line entry points: serve the API, run scenario scripts, or chat in a REPL."""

from __future__ import annotations

import argparse
import json
import sys

from .dialogue import Session, SessionState
from .scenarios import ScenarioError, load_scenarios, run_scenario
from .store import LibraryError, SceneLibrary


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="tabletalk")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--scenes", default="scenes", metavar="DIR")
    p_serve.add_argument("--host", default="127.0.0.1")

    p_run = sub.add_parser("run", help="run scripted scenarios and report pass/fail")
    p_run.add_argument("--scenarios", required=True, metavar="FILE")
    p_run.add_argument("--golden", default=None, metavar="DIR", help="compare transcripts byte-exact")
    p_run.add_argument("--scenes", default="scenes", metavar="DIR")
    p_run.add_argument("--report-dir", default=None, metavar="DIR", help="write report.csv and scene figures")

    p_repl = sub.add_parser("repl", help="interactive dialogue on one scene")
    p_repl.add_argument("--scene", required=True, metavar="ID")
    p_repl.add_argument("--scenes", default="scenes", metavar="DIR")

    args = parser.parse_args(argv)
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_repl(args)
    except (LibraryError, ScenarioError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    serve(port=args.port, scene_dir=args.scenes, host=args.host)
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    library = SceneLibrary(args.scenes)
    scenarios = load_scenarios(args.scenarios)
    results = []
    for scenario in scenarios:
        if scenario.scene_id not in library:
            from .scenarios import ScenarioResult

            result = ScenarioResult(scenario)
            result.error = f"unknown scene {scenario.scene_id!r}"
        else:
            result = run_scenario(scenario, library.get(scenario.scene_id), args.golden)
        results.append(result)
        mark = "PASS" if result.passed else "FAIL"
        detail = result.actual or result.error or ""
        print(f"[{mark}] {scenario.name}: expected={scenario.expected_outcome} actual={detail}")
        for line in result.golden_diff:
            print(f"    {line}")

    failed = sum(1 for r in results if not r.passed)
    print(f"{len(results) - failed}/{len(results)} scenarios passed")

    if args.report_dir:
        from .report import write_report

        scenes = {sid: library.get(sid) for sid in library.ids()}
        csv_path = write_report(results, scenes, args.report_dir)
        print(f"report written to {csv_path}")

    return 1 if failed else 0


def _print_perceived(session: Session) -> None:
    if session.graph is None:
        print("(no detection pass yet)")
        return
    print(f"{'id':12} {'category':10} {'color':8} {'size':8} {'shape':10} conf")
    for node in session.graph.nodes:
        p = node.percept
        print(
            f"{p.object_id:12} {p.category:10} {p.color.value:8} "
            f"{node.size.value:8} {node.shape.label.value:10} {p.confidence:.2f}"
        )


def _cmd_repl(args: argparse.Namespace) -> int:
    library = SceneLibrary(args.scenes)
    if args.scene not in library:
        print(f"error: unknown scene {args.scene!r}", file=sys.stderr)
        return 2
    scene = library.get(args.scene)
    session = Session(scene)
    print(f"scene {scene.id}: {len(scene.objects)} objects. /perceived /transcript /quit")
    while True:
        prompt = "answer> " if session.state is SessionState.AWAITING_CLARIFICATION else "you> "
        try:
            line = input(prompt).strip()
        except EOFError:
            print()
            return 0
        if not line:
            continue
        if line == "/quit":
            return 0
        if line == "/perceived":
            _print_perceived(session)
            continue
        if line == "/transcript":
            print(json.dumps(session.transcript(), indent=2))
            continue
        if session.state is SessionState.AWAITING_CLARIFICATION:
            outcome = session.handle_answer(line)
        else:
            if session.state is not SessionState.AWAITING_INSTRUCTION:
                session = Session(scene)
            outcome = session.handle_utterance(line)
        if outcome.status == "question":
            print(f"robot: {outcome.question.text}")
            for i, label in enumerate(outcome.question.option_labels(), start=1):
                print(f"       {i}. {label}")
        elif outcome.status == "resolved":
            extra = f" ({outcome.case})" if outcome.case else ""
            print(f"robot: I'll take {outcome.target}.{extra}")
        else:
            print(f"robot: sorry, I give up ({outcome.reason}).")


if __name__ == "__main__":
    raise SystemExit(main())
