"""Embedded on-disk state for the service: document collections plus the
append-only event log.  No external database; one JSON state file carries
the mutable collections and `events.ndjson` carries the event log.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from pathlib import Path

from ..analytics import GradeRecord
from ..assessment import (
    Quiz,
    QuestionBank,
    StudentModel,
    question_from_obj,
    question_to_obj,
)
from ..codec import Exercise, parse_exercise
from ..engine.kb import KnowledgeBase
from ..engine.loader import load_knowledge_base
from ..performance import PerformanceStore
from .. import resources


@dataclass
class Session:
    student_id: str
    exercise_id: str
    started_at: float
    feedback_shown: int = 0
    completed: bool = False


@dataclass
class StoredQuiz:
    quiz: Quiz
    snapshot: QuestionBank  # the bank slice the quiz was assembled from
    graded: bool = False
    result: dict | None = None


class DataStore:
    """All mutable service state behind one lock; writes persist eagerly."""

    def __init__(self, data_dir: Path, kb: KnowledgeBase, bank: QuestionBank,
                 exercises: dict, kb_base_docs=()):
        self.lock = threading.RLock()
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.kb = kb
        self.bank = bank
        self.exercises: dict[str, Exercise] = dict(exercises)
        self.exercise_documents: dict[str, str] = {}
        self.events = PerformanceStore(self.data_dir / "events.ndjson")
        self.sessions: dict[tuple, Session] = {}
        self.quizzes: dict[str, StoredQuiz] = {}
        self.submissions: dict[str, dict] = {}
        self.grades: list[GradeRecord] = []
        self.extra_rule_documents: list[str] = []
        self.kb_base_docs = tuple(kb_base_docs)
        self._counter = 0
        self._state_path = self.data_dir / "state.json"
        self._load_state()

    # -- id generation ---------------------------------------------------

    def next_id(self, prefix: str) -> str:
        with self.lock:
            self._counter += 1
            return f"{prefix}-{self._counter:06d}"

    # -- persistence -----------------------------------------------------

    def _load_state(self) -> None:
        if not self._state_path.exists():
            return
        data = json.loads(self._state_path.read_text("utf-8"))
        self._counter = data.get("counter", 0)
        for entry in data.get("sessions", []):
            session = Session(**entry)
            self.sessions[(session.student_id, session.exercise_id)] = session
        for entry in data.get("bank", []):
            last_used = entry.pop("last_used_at", None)
            record = question_from_obj(entry)
            if last_used is not None:
                record = replace(record, last_used_at=last_used)
            self.bank = self.bank.without_question(record.id).with_question(record)
        for entry in data.get("quizzes", []):
            quiz = Quiz(
                id=entry["id"], student_id=entry["student_id"],
                lesson_id=entry["lesson_id"],
                question_ids=tuple(entry["question_ids"]),
                total_time_seconds=entry["total_time_seconds"],
                created_at=entry["created_at"])
            snapshot = QuestionBank(
                question_from_obj(q) for q in entry["snapshot"])
            self.quizzes[quiz.id] = StoredQuiz(
                quiz=quiz, snapshot=snapshot,
                graded=entry["graded"], result=entry.get("result"))
        self.submissions = dict(data.get("submissions", {}))
        for entry in data.get("grades", []):
            self.grades.append(GradeRecord(**entry))

    def save(self) -> None:
        with self.lock:
            data = {
                "counter": self._counter,
                "sessions": [vars(s) for s in self.sessions.values()],
                "bank": [
                    {**question_to_obj(q),
                     **({"last_used_at": q.last_used_at}
                        if q.last_used_at is not None else {})}
                    for q in self.bank.all()
                ],
                "quizzes": [
                    {
                        "id": sq.quiz.id, "student_id": sq.quiz.student_id,
                        "lesson_id": sq.quiz.lesson_id,
                        "question_ids": list(sq.quiz.question_ids),
                        "total_time_seconds": sq.quiz.total_time_seconds,
                        "created_at": sq.quiz.created_at,
                        "snapshot": [question_to_obj(q) for q in sq.snapshot.all()],
                        "graded": sq.graded, "result": sq.result,
                    }
                    for sq in self.quizzes.values()
                ],
                "submissions": self.submissions,
                "grades": [vars(g) for g in self.grades],
            }
            self._state_path.write_text(
                json.dumps(data, indent=1, ensure_ascii=False), "utf-8")

    # -- sessions ----------------------------------------------------------

    def session(self, student_id: str, exercise_id: str, now: float) -> Session:
        with self.lock:
            key = (student_id, exercise_id)
            if key not in self.sessions:
                self.sessions[key] = Session(student_id, exercise_id, started_at=now)
                self.save()
            return self.sessions[key]

    def peek_session(self, student_id: str, exercise_id: str) -> Session | None:
        with self.lock:
            return self.sessions.get((student_id, exercise_id))

    def reset_session(self, student_id: str, exercise_id: str) -> bool:
        with self.lock:
            existed = self.sessions.pop((student_id, exercise_id), None) is not None
            if existed:
                self.save()
            return existed

    # -- derived views -----------------------------------------------------

    def student_model(self, student_id: str, lessons_total: int) -> StudentModel:
        return StudentModel(
            student_id=student_id,
            averages=self.events.averages(student_id, lessons_total),
            completed_exercises=self.events.completed_exercise_count(student_id),
            quiz_history=tuple(self.events.quiz_history(student_id)),
        )

    def merge_rule_document(self, text: str) -> KnowledgeBase:
        """Merge an authored rule document into the live KB (atomic on error)."""
        with self.lock:
            base_docs = list(self.kb_base_docs) if self.kb_base_docs else \
                [doc for _, doc in resources.starter_kb_documents()]
            merged = load_knowledge_base(
                base_docs + self.extra_rule_documents + [text])
            self.extra_rule_documents.append(text)
            rules_dir = self.data_dir / "rules"
            rules_dir.mkdir(exist_ok=True)
            index = len(self.extra_rule_documents)
            (rules_dir / f"authored-{index:03d}.rules.json").write_text(text, "utf-8")
            self.kb = merged
            return merged


def build_store(config, clock=None) -> DataStore:
    """Assemble the store from config: KB, question bank and exercises."""
    if config.kb_paths:
        docs = [Path(p).read_text("utf-8") for p in config.kb_paths]
        kb = load_knowledge_base(docs, names=[str(p) for p in config.kb_paths])
        base_docs = tuple(docs)
    else:
        kb = resources.starter_kb()
        base_docs = tuple(doc for _, doc in resources.starter_kb_documents())

    data_dir = Path(config.data_dir)

    # Authored rules from a previous run merge back in.
    rules_dir = data_dir / "rules"
    extra_docs = []
    if rules_dir.is_dir():
        extra_docs = [p.read_text("utf-8") for p in sorted(rules_dir.glob("*.rules.json"))]
        if extra_docs:
            kb = load_knowledge_base(list(base_docs) + extra_docs)

    if config.question_paths:
        from ..assessment import load_question_bank
        bank = load_question_bank([Path(p).read_text("utf-8")
                                   for p in config.question_paths])
    else:
        bank = resources.starter_question_bank()

    exercises: dict[str, Exercise] = {}
    documents: dict[str, str] = {}
    for name, text in resources.sample_exercise_documents():
        exercise = parse_exercise(text, tag_vocabulary=kb.tag_vocabulary)
        exercises[exercise.id] = exercise
        documents[exercise.id] = text
    for path in config.exercise_paths:
        text = Path(path).read_text("utf-8")
        exercise = parse_exercise(text, tag_vocabulary=kb.tag_vocabulary)
        exercises[exercise.id] = exercise
        documents[exercise.id] = text
    exercises_dir = data_dir / "exercises"
    if exercises_dir.is_dir():
        for path in sorted(exercises_dir.glob("*.exercise.json")):
            text = path.read_text("utf-8")
            exercise = parse_exercise(text, tag_vocabulary=kb.tag_vocabulary)
            exercises[exercise.id] = exercise
            documents[exercise.id] = text

    store = DataStore(data_dir, kb, bank, exercises, kb_base_docs=base_docs)
    store.exercise_documents = documents
    store.extra_rule_documents = extra_docs
    return store
