"""Reading and writing exercise documents (`.exercise.json`).

An exercise bundles the problem statement, the reference solution, the
allowed palette layers, requirement tags that drive solution-method
rules, scoring limits, and optional behavioural expectations for the
runtime check.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..model.nodes import Program
from ..model.templates import TemplateRegistry, default_registry
from ..model.validate import validate_program
from .errors import DocumentSyntaxError, InvalidReferenceSolution, UnknownTag
from .solution import parse_solution, solution_to_obj


@dataclass(frozen=True)
class ScoringLimits:
    time_limit_seconds: int
    feedback_limit: int

    def __post_init__(self) -> None:
        if self.time_limit_seconds <= 0 or self.feedback_limit <= 0:
            raise ValueError("scoring limits must be strictly positive")


@dataclass(frozen=True)
class RuleOverride:
    constraint_id: str
    enabled: bool


@dataclass(frozen=True)
class Exercise:
    id: str
    lesson_id: str
    problem_text: str
    allowed_layers: frozenset
    problem_tags: frozenset
    reference_solution: Program
    scoring_limits: ScoringLimits
    rule_overrides: tuple[RuleOverride, ...] = ()
    expected_stdout: str | None = None
    stdin_script: tuple[str, ...] = ()
    feedback_kind: str | None = None  # falls back to course config

    def disabled_constraints(self) -> set:
        return {o.constraint_id for o in self.rule_overrides if not o.enabled}

    def enabled_overrides(self) -> set:
        return {o.constraint_id for o in self.rule_overrides if o.enabled}


_FIELDS = {
    "id", "lesson_id", "problem_text", "allowed_layers", "problem_tags",
    "reference_solution", "scoring_limits", "rule_overrides",
    "expected_stdout", "stdin_script", "feedback_kind",
}
_REQUIRED = {"id", "lesson_id", "problem_text", "allowed_layers",
             "reference_solution", "scoring_limits"}


def _require_str(data: dict, name: str) -> str:
    value = data.get(name)
    if not isinstance(value, str) or not value:
        raise DocumentSyntaxError(f"{name!r} must be a non-empty string")
    return value


def _str_list(data, name: str) -> list[str]:
    value = data.get(name, [])
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise DocumentSyntaxError(f"{name!r} must be a list of strings")
    return value


def parse_exercise(
    text: str,
    registry: TemplateRegistry | None = None,
    tag_vocabulary=None,
) -> Exercise:
    """Parse and fully check an exercise document.

    ``tag_vocabulary`` is the set of known problem tags (normally the
    loaded knowledge base's vocabulary); tags outside it are rejected.
    Passing None skips the vocabulary check.
    """
    registry = registry or default_registry()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentSyntaxError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    if not isinstance(data, dict):
        raise DocumentSyntaxError("exercise document root must be an object")
    unknown = set(data) - _FIELDS
    if unknown:
        raise DocumentSyntaxError(f"unknown exercise fields: {', '.join(sorted(unknown))}")
    missing = _REQUIRED - set(data)
    if missing:
        raise DocumentSyntaxError(f"missing exercise fields: {', '.join(sorted(missing))}")

    exercise_id = _require_str(data, "id")
    lesson_id = _require_str(data, "lesson_id")
    problem_text = data.get("problem_text")
    if not isinstance(problem_text, str):
        raise DocumentSyntaxError("'problem_text' must be a string")

    allowed_layers = frozenset(_str_list(data, "allowed_layers"))
    tags = frozenset(_str_list(data, "problem_tags"))
    if tag_vocabulary is not None:
        for tag in sorted(tags):
            if tag not in tag_vocabulary:
                raise UnknownTag(tag)

    limits_raw = data.get("scoring_limits")
    if (not isinstance(limits_raw, dict)
            or set(limits_raw) != {"time_limit_seconds", "feedback_limit"}):
        raise DocumentSyntaxError(
            "'scoring_limits' must be {\"time_limit_seconds\", \"feedback_limit\"}")
    for key, value in limits_raw.items():
        if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
            raise DocumentSyntaxError(f"scoring limit {key!r} must be a positive integer")
    limits = ScoringLimits(**limits_raw)

    overrides = []
    for entry in data.get("rule_overrides", []):
        if (not isinstance(entry, dict) or set(entry) != {"constraint_id", "enabled"}
                or not isinstance(entry.get("constraint_id"), str)
                or not isinstance(entry.get("enabled"), bool)):
            raise DocumentSyntaxError(
                "rule overrides must be {\"constraint_id\", \"enabled\"} objects")
        overrides.append(RuleOverride(entry["constraint_id"], entry["enabled"]))

    expected_stdout = data.get("expected_stdout")
    if expected_stdout is not None and not isinstance(expected_stdout, str):
        raise DocumentSyntaxError("'expected_stdout' must be a string")
    stdin_script = tuple(_str_list(data, "stdin_script"))
    feedback_kind = data.get("feedback_kind")
    if feedback_kind is not None and feedback_kind not in (
            "response", "correct", "elaborated", "adapted"):
        raise DocumentSyntaxError("'feedback_kind' must be one of "
                                  "response, correct, elaborated, adapted")

    reference_raw = data.get("reference_solution")
    if not isinstance(reference_raw, dict):
        raise DocumentSyntaxError("'reference_solution' must be a solution object")
    reference = parse_solution(json.dumps(reference_raw), registry)
    report = validate_program(reference, allowed_layers, registry)
    if not report.ok:
        raise InvalidReferenceSolution(report)

    return Exercise(
        id=exercise_id,
        lesson_id=lesson_id,
        problem_text=problem_text,
        allowed_layers=allowed_layers,
        problem_tags=tags,
        reference_solution=reference,
        scoring_limits=limits,
        rule_overrides=tuple(overrides),
        expected_stdout=expected_stdout,
        stdin_script=stdin_script,
        feedback_kind=feedback_kind,
    )


def exercise_to_obj(exercise: Exercise) -> dict:
    obj = {
        "id": exercise.id,
        "lesson_id": exercise.lesson_id,
        "problem_text": exercise.problem_text,
        "allowed_layers": sorted(exercise.allowed_layers),
        "problem_tags": sorted(exercise.problem_tags),
        "reference_solution": solution_to_obj(exercise.reference_solution),
        "scoring_limits": {
            "time_limit_seconds": exercise.scoring_limits.time_limit_seconds,
            "feedback_limit": exercise.scoring_limits.feedback_limit,
        },
        "rule_overrides": [
            {"constraint_id": o.constraint_id, "enabled": o.enabled}
            for o in exercise.rule_overrides
        ],
    }
    if exercise.expected_stdout is not None:
        obj["expected_stdout"] = exercise.expected_stdout
    if exercise.stdin_script:
        obj["stdin_script"] = list(exercise.stdin_script)
    if exercise.feedback_kind is not None:
        obj["feedback_kind"] = exercise.feedback_kind
    return obj


def serialize_exercise(exercise: Exercise) -> str:
    return json.dumps(exercise_to_obj(exercise), indent=2, ensure_ascii=False) + "\n"
