"""Rendering violations into student-facing feedback.

Four styles, from terse to tailored:

* ``response``   - a single correct/incorrect verdict.
* ``correct``    - per violation, what the correct construction looks like.
* ``elaborated`` - per violation, why the construction is wrong.
* ``adapted``    - elaborated text selected by the student's learning level
                   (novice < 40, standard 40-79, terse >= 80), falling back
                   to the plain elaborated template when a tier is missing.

Feedback never mutates programs or scores; it is advisory text only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .engine.kb import Constraint, KnowledgeBase, RuleCategory, Violation


class FeedbackKind(str, Enum):
    RESPONSE = "response"            # correct / incorrect only
    CORRECT_RESPONSE = "correct"     # what the right construction is
    ELABORATED = "elaborated"        # why this is wrong
    ADAPTED = "adapted"              # elaborated, tiered by learning level


class MissingTemplate(Exception):
    def __init__(self, constraint_id: str, kind: FeedbackKind):
        super().__init__(
            f"constraint {constraint_id!r} has no template for {kind.value!r} feedback")
        self.constraint_id = constraint_id
        self.kind = kind


@dataclass(frozen=True)
class FeedbackMessage:
    constraint_id: str | None
    category: RuleCategory | None
    kind: FeedbackKind
    text: str
    target_block_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("feedback text must be non-empty")


ALL_CLEAR_TEXT = "Correct: the solution satisfies all constraints."
INCORRECT_TEXT = "Incorrect: the solution violates {count} constraint(s)."

NOVICE_TIER = "novice"
STANDARD_TIER = "standard"
TERSE_TIER = "terse"


def adapted_tier(learning_level: float) -> str:
    if learning_level < 40:
        return NOVICE_TIER
    if learning_level < 80:
        return STANDARD_TIER
    return TERSE_TIER


class _Tolerant(dict):
    """Leave unknown placeholders intact instead of failing the render."""

    def __missing__(self, key):
        return "{" + key + "}"


def _fill(template: str, violation: Violation) -> str:
    return template.format_map(_Tolerant(violation.explanation_data))


def _constraint_for(violation: Violation, kb: KnowledgeBase) -> Constraint:
    constraint = kb.by_id(violation.constraint_id)
    if constraint is None:
        raise KeyError(f"violation references unknown constraint {violation.constraint_id!r}")
    return constraint


def render_feedback(
    violations,
    kind: FeedbackKind,
    learning_level: float,
    kb: KnowledgeBase,
) -> list[FeedbackMessage]:
    """Render violations in the requested style.

    Learning level must be within [0, 100]; it only affects the adapted
    style.  A clean violation list renders as a single all-clear message
    in every style.
    """
    if not 0 <= learning_level <= 100:
        raise ValueError("learning level must be within [0, 100]")
    violations = list(violations)
    if not violations:
        return [FeedbackMessage(None, None, kind, ALL_CLEAR_TEXT)]

    if kind is FeedbackKind.RESPONSE:
        return [FeedbackMessage(None, None, kind,
                                INCORRECT_TEXT.format(count=len(violations)))]

    messages: list[FeedbackMessage] = []
    tier = adapted_tier(learning_level)
    for violation in violations:
        constraint = _constraint_for(violation, kb)
        templates = constraint.feedback
        if kind is FeedbackKind.ELABORATED:
            template = templates.elaborated
        elif kind is FeedbackKind.CORRECT_RESPONSE:
            if templates.correct_response is None:
                raise MissingTemplate(constraint.id, kind)
            template = templates.correct_response
        else:  # ADAPTED
            template = templates.adapted.get(tier, templates.elaborated)
        messages.append(FeedbackMessage(
            constraint_id=violation.constraint_id,
            category=violation.category,
            kind=kind,
            text=_fill(template, violation),
            target_block_ids=tuple(violation.bindings.values()),
        ))
    return messages


def summarize(violations) -> dict:
    """Violation count per rule category; all eight categories present."""
    counts = {category: 0 for category in RuleCategory}
    for violation in violations:
        counts[violation.category] += 1
    return counts
