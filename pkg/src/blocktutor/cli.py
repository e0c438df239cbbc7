"""Command-line interface: batch evaluation, KB tooling, chooser simulation,
cohort reports and the service runner.

Exit codes follow scripting conventions: 0 success (no violations for
eval), 1 violations found, 2 input or usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analytics import TooFewSamples, cohort_report, format_cohort_report
from .assessment import (
    AssessmentConfig,
    EmptyBankForLesson,
    StudentModel,
    assemble_quiz,
    load_question_bank,
    update_priorities,
)
from .codec import CodecError, parse_exercise, parse_solution
from .engine import evaluate, kb_stats
from .engine.loader import (
    DuplicateRuleId,
    RuleParseError,
    UnboundBindingInCs,
    UnknownCategory,
    load_knowledge_base,
)
from .feedback import FeedbackKind, render_feedback, summarize
from .interpreter import RunLimits, RunStatus, compare_output, run
from .model.typecheck import check_program
from .model.validate import validate_program
from .performance import StudentAverages
from . import resources

_KB_ERRORS = (RuleParseError, DuplicateRuleId, UnknownCategory, UnboundBindingInCs)


def _load_kb(paths):
    if not paths:
        return resources.starter_kb()
    documents = [Path(p).read_text("utf-8") for p in paths]
    return load_knowledge_base(documents, names=[str(p) for p in paths])


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def cmd_eval(args) -> int:
    try:
        kb = _load_kb(args.kb)
    except _KB_ERRORS + (OSError,) as exc:
        return _fail(f"cannot load knowledge base: {exc}")
    try:
        exercise = parse_exercise(Path(args.exercise).read_text("utf-8"),
                                  tag_vocabulary=kb.tag_vocabulary)
    except (CodecError, OSError) as exc:
        return _fail(f"cannot load exercise: {exc}")
    try:
        program = parse_solution(Path(args.solution).read_text("utf-8"))
    except (CodecError, OSError) as exc:
        return _fail(f"cannot load solution: {exc}")

    report = validate_program(program, exercise.allowed_layers)
    if not report.ok:
        for defect in report:
            print(f"defect {defect.kind.value} at {defect.block_id}: {defect.detail}")
        return 2

    violations = evaluate(program, exercise, kb)
    issues = check_program(program)
    kind = FeedbackKind(args.feedback)
    messages = render_feedback(violations, kind, args.level, kb)

    if args.format == "structured":
        payload = {
            "violations": [
                {"constraint_id": v.constraint_id, "category": v.category.value,
                 "bindings": dict(v.bindings)}
                for v in violations],
            "summary": {c.value: n for c, n in summarize(violations).items()},
            "feedback": [m.text for m in messages],
            "type_issues": [
                {"block_id": i.block_id, "attr": i.attr, "message": i.message}
                for i in issues],
        }
        print(json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True))
    else:
        counts = summarize(violations)
        print(f"{len(violations)} violations")
        for category, count in counts.items():
            if count:
                print(f"  {category.value}: {count}")
        for message in messages:
            targets = f" [{', '.join(message.target_block_ids)}]" \
                if message.target_block_ids else ""
            print(f"- {message.text}{targets}")
        for issue in issues:
            print(f"type issue at {issue.block_id}.{issue.attr}: {issue.message}")

    if violations:
        return 1

    if not issues:
        outcome = run(program, RunLimits(stdin_script=tuple(exercise.stdin_script)))
        if args.format != "structured":
            print(f"runtime: {outcome.status.value}, {outcome.steps_used} steps")
            if outcome.stdout:
                print(outcome.stdout.decode("utf-8", "replace"))
            if outcome.status is RunStatus.RUNTIME_ERROR:
                print(f"runtime error at {outcome.error_block_id}: "
                      f"{outcome.error_message}")
        if exercise.expected_stdout is not None:
            match = compare_output(outcome, exercise.expected_stdout)
            if not match.equal:
                print(f"output mismatch at byte {match.first_mismatch_offset}: "
                      f"expected {match.expected_context!r}, "
                      f"got {match.actual_context!r}")
                return 1
    return 0


# ---------------------------------------------------------------------------
# lint-kb / kb-stats
# ---------------------------------------------------------------------------

def cmd_lint_kb(args) -> int:
    try:
        kb = _load_kb(args.kb)
    except _KB_ERRORS as exc:
        print(f"invalid: {type(exc).__name__}: {exc}")
        return 2
    except OSError as exc:
        return _fail(str(exc))
    print(f"ok: {len(kb)} rules, {len(kb.tag_vocabulary)} tags, "
          f"version {kb.version}")
    return 0


def cmd_kb_stats(args) -> int:
    try:
        kb = _load_kb(args.kb)
    except _KB_ERRORS + (OSError,) as exc:
        return _fail(str(exc))
    stats = kb_stats(kb)
    width = max(len(c.value) for c in stats)
    for category, count in stats.items():
        print(f"{category.value:<{width}}  {count}")
    print(f"{'total':<{width}}  {len(kb)}")
    return 0


# ---------------------------------------------------------------------------
# quiz-sim
# ---------------------------------------------------------------------------

def cmd_quiz_sim(args) -> int:
    try:
        if args.bank:
            bank = load_question_bank([Path(args.bank).read_text("utf-8")])
        else:
            bank = resources.starter_question_bank()
    except Exception as exc:
        return _fail(f"cannot load question bank: {exc}")

    averages = StudentAverages()
    if args.student:
        try:
            data = json.loads(Path(args.student).read_text("utf-8"))
            averages = StudentAverages(
                page_view_score=data.get("page_view_score"),
                avg_quiz_score=data.get("avg_quiz_score"),
                avg_exercise_score=data.get("avg_exercise_score"))
        except (OSError, json.JSONDecodeError) as exc:
            return _fail(f"cannot load student model: {exc}")

    model = StudentModel(student_id="sim", averages=averages)
    config = AssessmentConfig()
    for round_number in range(1, args.rounds + 1):
        try:
            quiz = assemble_quiz(bank, model, args.lesson, config,
                                 quiz_id=f"sim-{round_number}",
                                 created_at=float(round_number))
        except EmptyBankForLesson as exc:
            return _fail(str(exc))
        print(f"round {round_number}: {' '.join(quiz.question_ids)}")
        bank = update_priorities(bank, quiz)
        priorities = "  ".join(
            f"{q.id}:{q.choice_priority}" for q in bank.for_lesson(args.lesson))
        print(f"  priorities: {priorities}")
    return 0


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def cmd_report(args) -> int:
    try:
        data = json.loads(Path(args.grades).read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(f"cannot load grades: {exc}")
    groups = data.get("groups")
    if not isinstance(groups, dict) or len(groups) != 2:
        return _fail("grades file must carry exactly two groups: "
                     "{\"groups\": {\"name\": [grades...], ...}}")
    (name_a, grades_a), (name_b, grades_b) = sorted(groups.items())
    try:
        report = cohort_report(name_a, grades_a, name_b, grades_b)
    except TooFewSamples as exc:
        return _fail(str(exc))
    if args.format == "structured":
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(format_cohort_report(report), end="")
    return 0


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------

def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, load_config

    try:
        config = load_config(args.config)
    except Exception as exc:
        return _fail(f"cannot load config: {exc}")
    app = create_app(config)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port,
                log_level="info")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blocktutor",
        description="Authoring and operations tool for the tutoring platform.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a solution against an exercise")
    p.add_argument("exercise", help="path to an .exercise.json document")
    p.add_argument("solution", help="path to a .sol.json document")
    p.add_argument("--kb", action="append", default=[],
                   help="rule document path (repeatable; default: shipped KB)")
    p.add_argument("--feedback", default="elaborated",
                   choices=["response", "correct", "elaborated", "adapted"])
    p.add_argument("--level", type=float, default=50.0,
                   help="learning level for adapted feedback (0..100)")
    p.add_argument("--seed", type=int, default=None,
                   help="reserved for future stochastic features")
    p.add_argument("--format", default="text", choices=["text", "structured"])
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("lint-kb", help="check rule documents for errors")
    p.add_argument("--kb", action="append", default=[])
    p.set_defaults(func=cmd_lint_kb)

    p = sub.add_parser("kb-stats", help="rule counts per category")
    p.add_argument("--kb", action="append", default=[])
    p.set_defaults(func=cmd_kb_stats)

    p = sub.add_parser("quiz-sim", help="simulate the question chooser")
    p.add_argument("--bank", default=None, help="questions document path")
    p.add_argument("--student", default=None,
                   help="JSON file with page_view_score/avg_quiz_score/"
                        "avg_exercise_score")
    p.add_argument("--lesson", required=True)
    p.add_argument("-n", "--rounds", type=int, default=1)
    p.set_defaults(func=cmd_quiz_sim)

    p = sub.add_parser("report", help="cohort comparison from a grades file")
    p.add_argument("grades", help="JSON file: {\"groups\": {name: [grades...]}}")
    p.add_argument("--format", default="text", choices=["text", "structured"])
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", default=None,
                   help="config path (default: TUTOR_CONFIG env var)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = getattr(args, "level", None)
    if level is not None and not 0 <= level <= 100:
        return _fail("--level must be within 0..100")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
