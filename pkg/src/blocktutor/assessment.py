"""Adaptive assessment: question bank, learning level and quiz/exam assembly.

The question chooser rates a student with a single 0-100 learning level
(10% page-view score, 40% average quiz score, 50% average exercise
score), maps it onto the five difficulty levels and picks the freshest
matching questions.  Choice priorities rotate on every assembled quiz so
the bank does not serve the same items twice in a row.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .performance import StudentAverages


class InvalidQuestion(Exception):
    pass


class EmptyBankForLesson(Exception):
    def __init__(self, lesson_id: str):
        super().__init__(f"no questions stored for lesson {lesson_id!r}")
        self.lesson_id = lesson_id


class UnknownQuestionInAnswers(Exception):
    def __init__(self, question_id: str):
        super().__init__(f"answer references question {question_id!r} not in the quiz")
        self.question_id = question_id


class InsufficientQuestions(Exception):
    def __init__(self, needed: int, available: int):
        super().__init__(f"exam needs {needed} questions, bank offers {available}")
        self.needed = needed
        self.available = available


CHOICES_PER_QUESTION = 5
DIFFICULTY_LEVELS = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class QuestionRecord:
    id: str
    lesson_id: str
    stem: str
    choices: tuple[str, ...]
    correct_index: int
    difficulty: int
    choice_priority: int
    answering_time_seconds: int
    last_used_at: float | None = None

    def __post_init__(self) -> None:
        if len(self.choices) != CHOICES_PER_QUESTION:
            raise InvalidQuestion(
                f"question {self.id!r} must offer exactly {CHOICES_PER_QUESTION} choices")
        if not 0 <= self.correct_index < CHOICES_PER_QUESTION:
            raise InvalidQuestion(f"question {self.id!r} has an out-of-range correct index")
        if self.difficulty not in DIFFICULTY_LEVELS:
            raise InvalidQuestion(f"question {self.id!r} difficulty must be 1..5")
        if not 0 <= self.choice_priority <= 100:
            raise InvalidQuestion(f"question {self.id!r} priority must be within [0, 100]")
        if self.answering_time_seconds <= 0:
            raise InvalidQuestion(f"question {self.id!r} needs a positive answering time")


@dataclass(frozen=True)
class AssessmentConfig:
    weight_page_views: float = 0.10
    weight_quizzes: float = 0.40
    weight_exercises: float = 0.50
    default_level: float = 50.0
    questions_per_quiz: int = 10

    def __post_init__(self) -> None:
        total = self.weight_page_views + self.weight_quizzes + self.weight_exercises
        if abs(total - 1.0) > 1e-9:
            raise ValueError("learning level weights must sum to 1")
        if self.questions_per_quiz < 1:
            raise ValueError("questions_per_quiz must be positive")


@dataclass(frozen=True)
class StudentModel:
    student_id: str
    averages: StudentAverages
    completed_exercises: int = 0
    quiz_history: tuple = ()


@dataclass(frozen=True)
class Quiz:
    id: str
    student_id: str
    lesson_id: str
    question_ids: tuple[str, ...]
    total_time_seconds: int
    created_at: float

    def __post_init__(self) -> None:
        if len(set(self.question_ids)) != len(self.question_ids):
            raise ValueError("quiz question ids must be distinct")


@dataclass(frozen=True)
class QuizResult:
    score: float
    per_question: tuple  # (question_id, chosen index or None, correct_index, is_correct)

    def correct_count(self) -> int:
        return sum(1 for _, _, _, ok in self.per_question if ok)


class QuestionBank:
    """Immutable-by-convention snapshot of the question store."""

    def __init__(self, questions=()):
        self._questions: dict[str, QuestionRecord] = {}
        for q in questions:
            if q.id in self._questions:
                raise InvalidQuestion(f"duplicate question id {q.id!r}")
            self._questions[q.id] = q

    def __len__(self) -> int:
        return len(self._questions)

    def __contains__(self, question_id: str) -> bool:
        return question_id in self._questions

    def get(self, question_id: str) -> QuestionRecord | None:
        return self._questions.get(question_id)

    def all(self) -> list[QuestionRecord]:
        return sorted(self._questions.values(), key=lambda q: q.id)

    def for_lesson(self, lesson_id: str) -> list[QuestionRecord]:
        return [q for q in self.all() if q.lesson_id == lesson_id]

    def with_question(self, question: QuestionRecord) -> "QuestionBank":
        merged = dict(self._questions)
        merged[question.id] = question
        return QuestionBank(merged.values())

    def without_question(self, question_id: str) -> "QuestionBank":
        merged = dict(self._questions)
        merged.pop(question_id, None)
        return QuestionBank(merged.values())


def question_from_obj(obj: dict) -> QuestionRecord:
    required = {"id", "lesson_id", "stem", "choices", "correct_index",
                "difficulty", "choice_priority", "answering_time_seconds"}
    if not isinstance(obj, dict):
        raise InvalidQuestion("question must be an object")
    unknown = set(obj) - required
    if unknown:
        raise InvalidQuestion(f"unknown question fields: {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise InvalidQuestion(f"missing question fields: {sorted(missing)}")
    choices = obj["choices"]
    if not isinstance(choices, list) or not all(isinstance(c, str) for c in choices):
        raise InvalidQuestion("choices must be a list of strings")
    return QuestionRecord(
        id=obj["id"], lesson_id=obj["lesson_id"], stem=obj["stem"],
        choices=tuple(choices), correct_index=obj["correct_index"],
        difficulty=obj["difficulty"], choice_priority=obj["choice_priority"],
        answering_time_seconds=obj["answering_time_seconds"],
    )


def load_question_bank(documents) -> QuestionBank:
    """Parse `.questions.json` documents (arrays of question records)."""
    questions: list[QuestionRecord] = []
    for text in documents:
        data = json.loads(text)
        if not isinstance(data, list):
            raise InvalidQuestion("question document root must be an array")
        questions.extend(question_from_obj(obj) for obj in data)
    return QuestionBank(questions)


def question_to_obj(q: QuestionRecord) -> dict:
    return {
        "id": q.id, "lesson_id": q.lesson_id, "stem": q.stem,
        "choices": list(q.choices), "correct_index": q.correct_index,
        "difficulty": q.difficulty, "choice_priority": q.choice_priority,
        "answering_time_seconds": q.answering_time_seconds,
    }


# ---------------------------------------------------------------------------
# Learning level and difficulty banding
# ---------------------------------------------------------------------------

def learning_level(avgs: StudentAverages, config: AssessmentConfig | None = None) -> float:
    """Weighted 0-100 composite of the student's averages.

    Missing components renormalize the remaining weights to sum to one;
    with no history at all the configured default level applies.
    """
    config = config or AssessmentConfig()
    parts = [
        (config.weight_page_views, avgs.page_view_score),
        (config.weight_quizzes, avgs.avg_quiz_score),
        (config.weight_exercises, avgs.avg_exercise_score),
    ]
    present = [(w, v) for w, v in parts if v is not None]
    if not present:
        return config.default_level
    total_weight = sum(w for w, _ in present)
    return sum(w * v for w, v in present) / total_weight


def difficulty_band(level: float) -> int:
    """Map a 0-100 learning level onto difficulty 1..5 (half-open 20-point bands)."""
    if not 0 <= level <= 100:
        raise ValueError("learning level must be within [0, 100]")
    if level >= 100:
        return 5
    return int(level // 20) + 1


# ---------------------------------------------------------------------------
# Quiz assembly and grading
# ---------------------------------------------------------------------------

def _freshness_key(q: QuestionRecord):
    # Never-used questions outrank used ones; then oldest first.
    return (1, q.last_used_at) if q.last_used_at is not None else (0, 0.0)


def _selection_key(target: int):
    def key(q: QuestionRecord):
        return (abs(q.difficulty - target), -q.choice_priority, _freshness_key(q), q.id)
    return key


def assemble_quiz(
    bank: QuestionBank,
    model: StudentModel,
    lesson_id: str,
    config: AssessmentConfig | None = None,
    *,
    quiz_id: str | None = None,
    created_at: float = 0.0,
) -> Quiz:
    """Pick the most appropriate lesson questions for this student.

    Candidates rank by distance from the target difficulty band, then by
    descending choice priority, freshness (never used first, then least
    recently used) and id.  Deterministic for identical inputs.
    """
    config = config or AssessmentConfig()
    candidates = bank.for_lesson(lesson_id)
    if not candidates:
        raise EmptyBankForLesson(lesson_id)
    target = difficulty_band(learning_level(model.averages, config))
    ranked = sorted(candidates, key=_selection_key(target))
    chosen = ranked[:config.questions_per_quiz]
    return Quiz(
        id=quiz_id or f"quiz-{model.student_id}-{lesson_id}-{created_at:.0f}",
        student_id=model.student_id,
        lesson_id=lesson_id,
        question_ids=tuple(q.id for q in chosen),
        total_time_seconds=sum(q.answering_time_seconds for q in chosen),
        created_at=created_at,
    )


def grade_quiz(quiz: Quiz, answers: dict, bank: QuestionBank) -> QuizResult:
    """Score a quiz: unanswered questions count as incorrect.

    ``answers`` maps question ids to chosen choice indices; ids outside
    the quiz are rejected.
    """
    quiz_ids = set(quiz.question_ids)
    for question_id in answers:
        if question_id not in quiz_ids:
            raise UnknownQuestionInAnswers(question_id)
    per_question = []
    correct = 0
    for question_id in quiz.question_ids:
        question = bank.get(question_id)
        if question is None:
            raise UnknownQuestionInAnswers(question_id)
        chosen = answers.get(question_id)
        ok = chosen is not None and chosen == question.correct_index
        if ok:
            correct += 1
        per_question.append((question_id, chosen, question.correct_index, ok))
    score = round(100.0 * correct / len(quiz.question_ids), 2)
    return QuizResult(score=score, per_question=tuple(per_question))


USED_PRIORITY_DROP = 10
UNUSED_PRIORITY_GAIN = 1


def update_priorities(bank: QuestionBank, quiz: Quiz) -> QuestionBank:
    """Rotate choice priorities after a quiz is assembled.

    Used questions drop by 10 (floor 0) and record the quiz time as their
    last use; unused questions of the same lesson creep up by 1 (cap
    100).  Other lessons are untouched.
    """
    used = set(quiz.question_ids)
    updated = []
    for question in bank.all():
        if question.id in used:
            updated.append(replace(
                question,
                choice_priority=max(0, question.choice_priority - USED_PRIORITY_DROP),
                last_used_at=quiz.created_at,
            ))
        elif question.lesson_id == quiz.lesson_id:
            updated.append(replace(
                question,
                choice_priority=min(100, question.choice_priority + UNUSED_PRIORITY_GAIN),
            ))
        else:
            updated.append(question)
    return QuestionBank(updated)


# ---------------------------------------------------------------------------
# Exam assembly (non-adaptive)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExamPolicy:
    total_questions: int = 25
    per_difficulty: int = 5


def assemble_exam(bank: QuestionBank, term_lessons, policy: ExamPolicy | None = None) -> list[str]:
    """Stratified exam: an equal share per difficulty, spread over lessons.

    Each difficulty contributes ``per_difficulty`` questions where
    available, drawn round-robin across the term lessons; shortfalls are
    filled from the nearest other difficulties (distance 1 first, then 2,
    and so on).  Deterministic given the bank state.
    """
    policy = policy or ExamPolicy()
    term_lessons = list(term_lessons)
    pool = [q for q in bank.all() if q.lesson_id in term_lessons]
    if len(pool) < policy.total_questions:
        raise InsufficientQuestions(policy.total_questions, len(pool))

    remaining = {q.id: q for q in pool}
    selected: list[str] = []

    def rank(questions, target: int):
        return sorted(questions, key=_selection_key(target))

    def take_round_robin(difficulty: int, count: int) -> list[str]:
        per_lesson = {
            lesson: rank([q for q in remaining.values()
                          if q.lesson_id == lesson and q.difficulty == difficulty],
                         difficulty)
            for lesson in term_lessons
        }
        picked: list[str] = []
        while len(picked) < count and any(per_lesson.values()):
            for lesson in term_lessons:
                if len(picked) >= count:
                    break
                queue = per_lesson[lesson]
                if queue:
                    question = queue.pop(0)
                    picked.append(question.id)
                    del remaining[question.id]
        return picked

    picked_per_difficulty: dict[int, list[str]] = {}
    for difficulty in DIFFICULTY_LEVELS:
        picked_per_difficulty[difficulty] = take_round_robin(
            difficulty, policy.per_difficulty)

    for difficulty in DIFFICULTY_LEVELS:
        deficit = policy.per_difficulty - len(picked_per_difficulty[difficulty])
        delta = 1
        while deficit > 0 and delta <= 4:
            neighbours = [d for d in (difficulty - delta, difficulty + delta)
                          if d in DIFFICULTY_LEVELS]
            candidates = rank([q for q in remaining.values()
                               if q.difficulty in neighbours], difficulty)
            for question in candidates[:deficit]:
                picked_per_difficulty[difficulty].append(question.id)
                del remaining[question.id]
                deficit -= 1
            delta += 1

    for difficulty in DIFFICULTY_LEVELS:
        selected.extend(picked_per_difficulty[difficulty])
    return selected[:policy.total_questions]
