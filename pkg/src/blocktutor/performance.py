"""Performance tracing: the append-only log of learning events.

Everything the platform knows about a student's progress flows through
here: lesson page views, feedback counts, per-exercise learning scores,
quiz scores and teacher-entered activity points.  Averages derived from
the log feed the question chooser and the term-grade reports.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path


class EventKind(str, Enum):
    PAGE_VIEW = "page_view"
    FEEDBACK_SHOWN = "feedback_shown"
    EXERCISE_COMPLETED = "exercise_completed"
    QUIZ_SCORED = "quiz_scored"
    ACTIVITY_POINT = "activity_point"


# Activity kind a teacher uses to override the automatic page-view score.
PAGE_VIEW_OVERRIDE = "page_view_score"


class InvalidEvent(Exception):
    pass


@dataclass(frozen=True)
class LearningEvent:
    student_id: str
    timestamp: float
    kind: EventKind
    lesson_id: str | None = None
    exercise_id: str | None = None
    count: int | None = None
    elapsed_seconds: float | None = None
    feedback_count: int | None = None
    learning_score: float | None = None
    quiz_id: str | None = None
    score: float | None = None
    activity: str | None = None
    points: float | None = None

    def __post_init__(self) -> None:
        if not self.student_id:
            raise InvalidEvent("event needs a student id")
        if self.timestamp < 0:
            raise InvalidEvent("timestamp must be non-negative")
        checks = {
            EventKind.PAGE_VIEW: self._check_page_view,
            EventKind.FEEDBACK_SHOWN: self._check_feedback_shown,
            EventKind.EXERCISE_COMPLETED: self._check_exercise_completed,
            EventKind.QUIZ_SCORED: self._check_quiz_scored,
            EventKind.ACTIVITY_POINT: self._check_activity_point,
        }
        checks[self.kind]()

    def _check_page_view(self) -> None:
        if not self.lesson_id:
            raise InvalidEvent("page view needs a lesson id")

    def _check_feedback_shown(self) -> None:
        if not self.exercise_id:
            raise InvalidEvent("feedback event needs an exercise id")
        if self.count is None or self.count < 0:
            raise InvalidEvent("feedback count must be non-negative")

    def _check_exercise_completed(self) -> None:
        if not self.exercise_id:
            raise InvalidEvent("completion needs an exercise id")
        if self.elapsed_seconds is None or self.elapsed_seconds < 0:
            raise InvalidEvent("elapsed seconds must be non-negative")
        if self.feedback_count is None or self.feedback_count < 0:
            raise InvalidEvent("feedback count must be non-negative")
        if self.learning_score is None or not 0 <= self.learning_score <= 100:
            raise InvalidEvent("learning score must be within [0, 100]")

    def _check_quiz_scored(self) -> None:
        if not self.quiz_id:
            raise InvalidEvent("quiz event needs a quiz id")
        if self.score is None or not 0 <= self.score <= 100:
            raise InvalidEvent("quiz score must be within [0, 100]")

    def _check_activity_point(self) -> None:
        if not self.activity:
            raise InvalidEvent("activity event needs an activity kind")
        if self.points is None or self.points < 0:
            raise InvalidEvent("activity points must be non-negative")
        if self.activity == PAGE_VIEW_OVERRIDE and self.points > 100:
            raise InvalidEvent("page view score override must be within [0, 100]")


def page_view(student_id: str, lesson_id: str, timestamp: float) -> LearningEvent:
    return LearningEvent(student_id, timestamp, EventKind.PAGE_VIEW, lesson_id=lesson_id)


def feedback_shown(student_id: str, exercise_id: str, count: int,
                   timestamp: float) -> LearningEvent:
    return LearningEvent(student_id, timestamp, EventKind.FEEDBACK_SHOWN,
                         exercise_id=exercise_id, count=count)


def exercise_completed(student_id: str, exercise_id: str, elapsed_seconds: float,
                       feedback_count: int, score: float,
                       timestamp: float) -> LearningEvent:
    return LearningEvent(student_id, timestamp, EventKind.EXERCISE_COMPLETED,
                         exercise_id=exercise_id, elapsed_seconds=elapsed_seconds,
                         feedback_count=feedback_count, learning_score=score)


def quiz_scored(student_id: str, quiz_id: str, score: float,
                timestamp: float) -> LearningEvent:
    return LearningEvent(student_id, timestamp, EventKind.QUIZ_SCORED,
                         quiz_id=quiz_id, score=score)


def activity_point(student_id: str, activity: str, points: float,
                   timestamp: float) -> LearningEvent:
    return LearningEvent(student_id, timestamp, EventKind.ACTIVITY_POINT,
                         activity=activity, points=points)


@dataclass(frozen=True)
class StudentAverages:
    """0-100 aggregates; a component is None until an event contributes to it."""

    page_view_score: float | None = None
    avg_quiz_score: float | None = None
    avg_exercise_score: float | None = None


def learning_score(elapsed_seconds: float, feedback_count: int, limits) -> int:
    """Per-exercise 0-100 score from completion time and feedback usage.

    Both criteria decay linearly against the teacher-set limit and weigh
    equally:

        round(100 * (0.5 * max(0, 1 - elapsed/time_limit)
                     + 0.5 * max(0, 1 - feedback/feedback_limit)))
    """
    if elapsed_seconds < 0 or feedback_count < 0:
        raise ValueError("elapsed time and feedback count must be non-negative")
    time_part = max(0.0, 1.0 - elapsed_seconds / limits.time_limit_seconds)
    feedback_part = max(0.0, 1.0 - feedback_count / limits.feedback_limit)
    return int(round(100 * (0.5 * time_part + 0.5 * feedback_part)))


def _event_to_obj(event: LearningEvent) -> dict:
    obj = {"student_id": event.student_id, "timestamp": event.timestamp,
           "kind": event.kind.value}
    for name in ("lesson_id", "exercise_id", "count", "elapsed_seconds",
                 "feedback_count", "learning_score", "quiz_id", "score",
                 "activity", "points"):
        value = getattr(event, name)
        if value is not None:
            obj[name] = value
    return obj


def _event_from_obj(obj: dict) -> LearningEvent:
    kind = EventKind(obj["kind"])
    fields = {k: obj.get(k) for k in (
        "lesson_id", "exercise_id", "count", "elapsed_seconds",
        "feedback_count", "learning_score", "quiz_id", "score",
        "activity", "points")}
    return LearningEvent(obj["student_id"], obj["timestamp"], kind, **fields)


class PerformanceStore:
    """Append-only event log, optionally persisted as newline-delimited JSON.

    Writes are serialized; reads return snapshots, so a reader always sees
    a consistent prefix of the log.
    """

    def __init__(self, path: str | Path | None = None):
        self._lock = threading.Lock()
        self._events: dict[str, list[LearningEvent]] = {}
        self._path = Path(path) if path is not None else None
        if self._path is not None and self._path.exists():
            for line in self._path.read_text("utf-8").splitlines():
                if line.strip():
                    event = _event_from_obj(json.loads(line))
                    self._events.setdefault(event.student_id, []).append(event)

    def record(self, event: LearningEvent) -> None:
        if not isinstance(event, LearningEvent):
            raise InvalidEvent("not a learning event")
        with self._lock:
            self._events.setdefault(event.student_id, []).append(event)
            if self._path is not None:
                with self._path.open("a", encoding="utf-8") as handle:
                    handle.write(json.dumps(_event_to_obj(event), sort_keys=True) + "\n")

    def events(self, student_id: str) -> list[LearningEvent]:
        with self._lock:
            return list(self._events.get(student_id, ()))

    def student_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._events)

    def averages(self, student_id: str, lessons_total: int) -> StudentAverages:
        """Aggregate a student's log into the three 0-100 components.

        The page-view score is the fraction of distinct lessons viewed,
        unless a teacher stored an explicit override (the latest one
        wins).  Averages are plain arithmetic means, insensitive to event
        order.
        """
        if lessons_total < 1:
            raise ValueError("lessons_total must be at least 1")
        events = self.events(student_id)

        viewed = {e.lesson_id for e in events if e.kind is EventKind.PAGE_VIEW}
        overrides = [e.points for e in events
                     if e.kind is EventKind.ACTIVITY_POINT
                     and e.activity == PAGE_VIEW_OVERRIDE]
        if overrides:
            page_view_score: float | None = float(overrides[-1])
        elif viewed:
            page_view_score = min(100.0, round(100.0 * len(viewed) / lessons_total))
        else:
            page_view_score = None

        quiz_scores = [e.score for e in events if e.kind is EventKind.QUIZ_SCORED]
        exercise_scores = [e.learning_score for e in events
                           if e.kind is EventKind.EXERCISE_COMPLETED]

        return StudentAverages(
            page_view_score=page_view_score,
            avg_quiz_score=sum(quiz_scores) / len(quiz_scores) if quiz_scores else None,
            avg_exercise_score=(sum(exercise_scores) / len(exercise_scores)
                                if exercise_scores else None),
        )

    def completed_exercise_count(self, student_id: str) -> int:
        return sum(1 for e in self.events(student_id)
                   if e.kind is EventKind.EXERCISE_COMPLETED)

    def quiz_history(self, student_id: str) -> list[tuple[str, float]]:
        return [(e.quiz_id, e.score) for e in self.events(student_id)
                if e.kind is EventKind.QUIZ_SCORED]

    def activity_averages(self, student_id: str) -> dict:
        """Mean points per activity kind (page-view overrides excluded)."""
        sums: dict[str, list[float]] = {}
        for event in self.events(student_id):
            if event.kind is EventKind.ACTIVITY_POINT and event.activity != PAGE_VIEW_OVERRIDE:
                sums.setdefault(event.activity, []).append(event.points)
        return {activity: sum(points) / len(points) for activity, points in sums.items()}


def record_event(store: PerformanceStore, event: LearningEvent) -> PerformanceStore:
    """Append an event; returns the store for chaining."""
    store.record(event)
    return store


def averages(store: PerformanceStore, student_id: str, lessons_total: int) -> StudentAverages:
    return store.averages(student_id, lessons_total)
