"""Access to the data shipped with the package: starter rule KB, lesson
taxonomy, sample question bank and sample exercises."""
from __future__ import annotations

import json
from importlib import resources

from .assessment import QuestionBank, load_question_bank
from .engine.kb import KnowledgeBase
from .engine.loader import load_knowledge_base


def _data_root():
    return resources.files("blocktutor") / "data"


def starter_kb_documents() -> list[tuple[str, str]]:
    """(name, text) pairs for every shipped rule document."""
    kb_dir = _data_root() / "kb"
    docs = []
    for entry in sorted(kb_dir.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".rules.json"):
            docs.append((entry.name, entry.read_text("utf-8")))
    return docs


def starter_kb() -> KnowledgeBase:
    docs = starter_kb_documents()
    return load_knowledge_base([text for _, text in docs], names=[n for n, _ in docs])


def lesson_taxonomy() -> list[dict]:
    data = json.loads((_data_root() / "lessons.json").read_text("utf-8"))
    return data["lessons"]


def lesson_count() -> int:
    return len(lesson_taxonomy())


def starter_question_bank() -> QuestionBank:
    questions_dir = _data_root() / "questions"
    docs = [entry.read_text("utf-8")
            for entry in sorted(questions_dir.iterdir(), key=lambda e: e.name)
            if entry.name.endswith(".questions.json")]
    return load_question_bank(docs)


def sample_exercise_documents() -> list[tuple[str, str]]:
    exercises_dir = _data_root() / "exercises"
    return [(entry.name, entry.read_text("utf-8"))
            for entry in sorted(exercises_dir.iterdir(), key=lambda e: e.name)
            if entry.name.endswith(".exercise.json")]
