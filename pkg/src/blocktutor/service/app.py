"""HTTP service: exercises, submissions, quizzes, exams, authoring, reports.

Auth is a static bearer token per role: student tokens map to student ids,
one shared teacher token unlocks the admin surface.  All state lives in
the embedded DataStore; core-module calls are pure.
"""
from __future__ import annotations

import json
import time

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from ..analytics import GradeRecord, cohort_report, format_cohort_report
from ..assessment import (
    EmptyBankForLesson,
    InvalidQuestion,
    UnknownQuestionInAnswers,
    assemble_exam,
    assemble_quiz,
    grade_quiz,
    learning_level,
    question_from_obj,
    question_to_obj,
    update_priorities,
)
from ..codec import (
    CodecError,
    exercise_to_obj,
    parse_exercise,
    parse_solution,
    solution_to_obj,
)
from ..engine import evaluate, kb_stats
from ..engine.loader import DuplicateRuleId, RuleParseError, UnboundBindingInCs, UnknownCategory
from ..feedback import FeedbackKind, render_feedback, summarize
from ..interpreter import RunLimits, RunStatus, compare_output, run
from ..model.typecheck import check_program
from ..model.validate import validate_program
from ..performance import (
    activity_point,
    exercise_completed,
    feedback_shown,
    learning_score,
    page_view,
    quiz_scored,
)
from .. import resources
from .config import ServiceConfig
from .store import DataStore, StoredQuiz, build_store


def _error(status: int, error_type: str, detail: str) -> JSONResponse:
    return JSONResponse({"error": {"type": error_type, "detail": detail}},
                        status_code=status)


def _violation_obj(violation) -> dict:
    return {
        "constraint_id": violation.constraint_id,
        "category": violation.category.value,
        "bindings": dict(violation.bindings),
        "explanation_data": {k: v for k, v in violation.explanation_data.items()},
    }


def _message_obj(message) -> dict:
    return {
        "constraint_id": message.constraint_id,
        "category": message.category.value if message.category else None,
        "kind": message.kind.value,
        "text": message.text,
        "target_block_ids": list(message.target_block_ids),
    }


def _runtime_obj(outcome) -> dict:
    return {
        "status": outcome.status.value,
        "stdout": outcome.stdout.decode("utf-8", "replace"),
        "steps_used": outcome.steps_used,
        "virtual_files": dict(outcome.virtual_files),
        "error_message": outcome.error_message,
        "error_block_id": outcome.error_block_id,
    }


def create_app(config: ServiceConfig | None = None, store: DataStore | None = None,
               clock=time.time) -> FastAPI:
    config = config or ServiceConfig()
    store = store or build_store(config)
    lessons_total = config.lessons_total or resources.lesson_count()
    app = FastAPI(title="blocktutor", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.config = config

    # -- auth helpers ----------------------------------------------------

    def bearer_token(request: Request) -> str | None:
        header = request.headers.get("authorization", "")
        if header.lower().startswith("bearer "):
            return header[7:].strip()
        return None

    def student_of(request: Request) -> str | None:
        token = bearer_token(request)
        if token is None:
            return None
        return config.student_tokens.get(token)

    def is_teacher(request: Request) -> bool:
        return bearer_token(request) == config.teacher_token

    async def body_of(request: Request):
        try:
            raw = await request.body()
            return json.loads(raw) if raw else {}
        except json.JSONDecodeError:
            return None

    # -- health ----------------------------------------------------------

    @app.get("/api/health")
    async def health():
        return {"status": "ok", "rules": len(store.kb), "questions": len(store.bank)}

    @app.get("/api/lessons")
    async def lessons(request: Request):
        if student_of(request) is None and not is_teacher(request):
            return _error(401, "Unauthorized", "a student or teacher token is required")
        return {"lessons": resources.lesson_taxonomy()}

    # -- exercises and submissions ----------------------------------------

    @app.get("/api/exercises/{exercise_id}")
    async def get_exercise(exercise_id: str, request: Request):
        student = student_of(request)
        teacher = is_teacher(request)
        if student is None and not teacher:
            return _error(401, "Unauthorized", "a student or teacher token is required")
        exercise = store.exercises.get(exercise_id)
        if exercise is None:
            return _error(404, "UnknownExercise", f"no exercise {exercise_id!r}")
        obj = exercise_to_obj(exercise)
        if not teacher:
            obj.pop("reference_solution", None)
            obj.pop("expected_stdout", None)
            # A student's first look at the exercise opens the session clock.
            store.session(student, exercise_id, now=clock())
        return obj

    @app.get("/api/exercises")
    async def list_exercises(request: Request):
        if student_of(request) is None and not is_teacher(request):
            return _error(401, "Unauthorized", "a student or teacher token is required")
        return {"exercises": [
            {"id": e.id, "lesson_id": e.lesson_id, "problem_text": e.problem_text}
            for e in sorted(store.exercises.values(), key=lambda e: e.id)
        ]}

    @app.post("/api/exercises/{exercise_id}/submissions")
    async def submit(exercise_id: str, request: Request):
        student = student_of(request)
        if student is None:
            return _error(401, "Unauthorized", "a student token is required")
        exercise = store.exercises.get(exercise_id)
        if exercise is None:
            return _error(404, "UnknownExercise", f"no exercise {exercise_id!r}")
        body = await body_of(request)
        if body is None or not isinstance(body, dict) or "solution" not in body:
            return _error(422, "BadRequest", "body must carry a 'solution' object")

        now = clock()
        with store.lock:
            session = store.session(student, exercise_id, now=now)
            if session.completed:
                return _error(409, "SessionCompleted",
                              "exercise already completed; ask a teacher to reset it")

            try:
                program = parse_solution(json.dumps(body["solution"]))
            except CodecError as exc:
                return _error(422, type(exc).__name__, str(exc))
            report = validate_program(program, exercise.allowed_layers)
            if not report.ok:
                return _error(422, "InvalidProgram", "; ".join(
                    f"{d.kind.value}({d.block_id}): {d.detail}" for d in report))

            violations = evaluate(program, exercise, store.kb)
            type_issues = check_program(program)

            kind_name = exercise.feedback_kind or config.feedback_kind
            kind = FeedbackKind(kind_name)
            model = store.student_model(student, lessons_total)
            level = learning_level(model.averages, config.assessment)
            messages = render_feedback(violations, kind, level, store.kb)

            if violations:
                session.feedback_shown += len(messages)
                store.events.record(feedback_shown(
                    student, exercise_id, len(messages), now))

            runtime = None
            completed = False
            score = None
            if not violations and not type_issues:
                stdin = tuple(body.get("stdin") or exercise.stdin_script)
                runtime = run(program, RunLimits(stdin_script=stdin))
                output_ok = runtime.status is RunStatus.COMPLETED
                if output_ok and exercise.expected_stdout is not None:
                    output_ok = compare_output(runtime, exercise.expected_stdout).equal
                if output_ok:
                    completed = True
                    elapsed = max(0.0, now - session.started_at)
                    score = learning_score(elapsed, session.feedback_shown,
                                           exercise.scoring_limits)
                    session.completed = True
                    store.events.record(exercise_completed(
                        student, exercise_id, elapsed, session.feedback_shown,
                        score, now))

            submission_id = store.next_id("sub")
            record = {
                "id": submission_id,
                "student_id": student,
                "exercise_id": exercise_id,
                "submitted_at": now,
                "solution": solution_to_obj(program),
                "violations": [_violation_obj(v) for v in violations],
                "violation_summary": {c.value: n for c, n in summarize(violations).items()},
                "type_issues": [
                    {"block_id": i.block_id, "attr": i.attr, "message": i.message}
                    for i in type_issues],
                "feedback": [_message_obj(m) for m in messages],
                "runtime": _runtime_obj(runtime) if runtime else None,
                "completed": completed,
                "learning_score": score,
            }
            store.submissions[submission_id] = record
            store.save()
        return record

    # -- page views --------------------------------------------------------

    @app.post("/api/lessons/{lesson_id}/views")
    async def view_lesson(lesson_id: str, request: Request):
        student = student_of(request)
        if student is None:
            return _error(401, "Unauthorized", "a student token is required")
        store.events.record(page_view(student, lesson_id, clock()))
        return {"recorded": True}

    # -- quizzes -------------------------------------------------------------

    @app.post("/api/lessons/{lesson_id}/quizzes")
    async def start_quiz(lesson_id: str, request: Request):
        student = student_of(request)
        if student is None:
            return _error(401, "Unauthorized", "a student token is required")
        now = clock()
        with store.lock:
            model = store.student_model(student, lessons_total)
            try:
                quiz = assemble_quiz(store.bank, model, lesson_id, config.assessment,
                                     quiz_id=store.next_id("quiz"), created_at=now)
            except EmptyBankForLesson as exc:
                return _error(404, "EmptyBankForLesson", str(exc))
            snapshot_questions = [store.bank.get(qid) for qid in quiz.question_ids]
            from ..assessment import QuestionBank
            snapshot = QuestionBank(snapshot_questions)
            store.bank = update_priorities(store.bank, quiz)
            store.quizzes[quiz.id] = StoredQuiz(quiz=quiz, snapshot=snapshot)
            store.save()
        return {
            "quiz_id": quiz.id,
            "lesson_id": lesson_id,
            "total_time_seconds": quiz.total_time_seconds,
            "questions": [
                {"id": q.id, "stem": q.stem, "choices": list(q.choices),
                 "answering_time_seconds": q.answering_time_seconds}
                for q in snapshot_questions
            ],
        }

    @app.post("/api/quizzes/{quiz_id}/answers")
    async def answer_quiz(quiz_id: str, request: Request):
        student = student_of(request)
        if student is None:
            return _error(401, "Unauthorized", "a student token is required")
        body = await body_of(request)
        if body is None or not isinstance(body.get("answers"), dict):
            return _error(422, "BadRequest", "body must carry an 'answers' object")
        with store.lock:
            stored = store.quizzes.get(quiz_id)
            if stored is None or stored.quiz.student_id != student:
                return _error(404, "UnknownQuiz", f"no quiz {quiz_id!r} for this student")
            if stored.graded:
                return _error(409, "AlreadyGraded", "this quiz was already graded")
            answers = {}
            for question_id, index in body["answers"].items():
                if not isinstance(index, int) or isinstance(index, bool) \
                        or not 0 <= index <= 4:
                    return _error(422, "BadAnswer",
                                  f"answer for {question_id!r} must be an index 0..4")
                answers[question_id] = index
            try:
                result = grade_quiz(stored.quiz, answers, stored.snapshot)
            except UnknownQuestionInAnswers as exc:
                return _error(422, "UnknownQuestionInAnswers", str(exc))
            payload = {
                "quiz_id": quiz_id,
                "score": result.score,
                "correct_count": result.correct_count(),
                "per_question": [
                    {"question_id": qid, "chosen": chosen,
                     "correct_index": correct, "correct": ok}
                    for qid, chosen, correct, ok in result.per_question
                ],
            }
            stored.graded = True
            stored.result = payload
            store.events.record(quiz_scored(student, quiz_id, result.score, clock()))
            store.save()
        return payload

    # -- student model ---------------------------------------------------------

    @app.get("/api/students/{student_id}/model")
    async def get_model(student_id: str, request: Request):
        requester = student_of(request)
        if requester != student_id and not is_teacher(request):
            return _error(401, "Unauthorized", "only the student or a teacher may look")
        model = store.student_model(student_id, lessons_total)
        return {
            "student_id": student_id,
            "averages": {
                "page_view_score": model.averages.page_view_score,
                "avg_quiz_score": model.averages.avg_quiz_score,
                "avg_exercise_score": model.averages.avg_exercise_score,
            },
            "learning_level": learning_level(model.averages, config.assessment),
            "completed_exercises": model.completed_exercises,
            "quiz_history": [{"quiz_id": qid, "score": score}
                             for qid, score in model.quiz_history],
        }

    # -- exams -------------------------------------------------------------------

    @app.post("/api/exams")
    async def make_exam(request: Request):
        if not is_teacher(request):
            return _error(401, "Unauthorized", "a teacher token is required")
        body = await body_of(request)
        if body is None or not isinstance(body.get("term_lessons"), list):
            return _error(422, "BadRequest", "body must carry 'term_lessons'")
        from ..assessment import InsufficientQuestions
        try:
            question_ids = assemble_exam(store.bank, body["term_lessons"])
        except InsufficientQuestions as exc:
            return _error(422, "InsufficientQuestions", str(exc))
        return {"question_ids": question_ids}

    # -- admin: authoring -----------------------------------------------------

    def teacher_guard(request: Request):
        if not is_teacher(request):
            return _error(401, "Unauthorized", "a teacher token is required")
        return None

    @app.post("/api/admin/exercises")
    async def create_exercise(request: Request):
        denied = teacher_guard(request)
        if denied:
            return denied
        body = await body_of(request)
        if body is None:
            return _error(422, "BadRequest", "body must be an exercise document")
        text = json.dumps(body)
        try:
            exercise = parse_exercise(text, tag_vocabulary=store.kb.tag_vocabulary)
        except CodecError as exc:
            return _error(422, type(exc).__name__, str(exc))
        with store.lock:
            store.exercises[exercise.id] = exercise
            store.exercise_documents[exercise.id] = text
            exercises_dir = store.data_dir / "exercises"
            exercises_dir.mkdir(exist_ok=True)
            (exercises_dir / f"{exercise.id}.exercise.json").write_text(text, "utf-8")
        return {"id": exercise.id, "created": True}

    @app.post("/api/admin/questions")
    async def create_question(request: Request):
        denied = teacher_guard(request)
        if denied:
            return denied
        body = await body_of(request)
        if body is None:
            return _error(422, "BadRequest", "body must be a question record")
        try:
            question = question_from_obj(body)
        except InvalidQuestion as exc:
            return _error(422, "InvalidQuestion", str(exc))
        with store.lock:
            if question.id in store.bank:
                return _error(422, "DuplicateQuestion",
                              f"question {question.id!r} already exists")
            store.bank = store.bank.with_question(question)
            store.save()
        return {"id": question.id, "created": True}

    @app.get("/api/admin/questions")
    async def list_questions(request: Request):
        denied = teacher_guard(request)
        if denied:
            return denied
        return {"questions": [question_to_obj(q) for q in store.bank.all()]}

    @app.post("/api/admin/rules")
    async def create_rules(request: Request):
        denied = teacher_guard(request)
        if denied:
            return denied
        body = await body_of(request)
        if body is None:
            return _error(422, "BadRequest", "body must be a rule document")
        try:
            store.merge_rule_document(json.dumps(body))
        except (RuleParseError, DuplicateRuleId, UnknownCategory,
                UnboundBindingInCs) as exc:
            return _error(422, type(exc).__name__, str(exc))
        return {"rules": len(store.kb), "created": True}

    @app.post("/api/admin/events")
    async def record_activity(request: Request):
        denied = teacher_guard(request)
        if denied:
            return denied
        body = await body_of(request)
        if body is None or not isinstance(body, dict):
            return _error(422, "BadRequest", "body must be an activity record")
        try:
            store.events.record(activity_point(
                body.get("student_id", ""), body.get("activity", ""),
                body.get("points", -1), clock()))
        except Exception as exc:
            return _error(422, "InvalidEvent", str(exc))
        return {"recorded": True}

    @app.post("/api/admin/sessions/reset")
    async def reset_session(request: Request):
        denied = teacher_guard(request)
        if denied:
            return denied
        body = await body_of(request)
        if body is None or "student_id" not in body or "exercise_id" not in body:
            return _error(422, "BadRequest", "body must carry student_id and exercise_id")
        existed = store.reset_session(body["student_id"], body["exercise_id"])
        return {"reset": existed}

    # -- admin: grades and reports ---------------------------------------------

    @app.post("/api/admin/grades")
    async def store_grades(request: Request):
        denied = teacher_guard(request)
        if denied:
            return denied
        body = await body_of(request)
        if body is None or not isinstance(body.get("records"), list):
            return _error(422, "BadRequest", "body must carry a 'records' list")
        created = []
        with store.lock:
            for entry in body["records"]:
                try:
                    record = GradeRecord.compute(
                        student_id=entry["student_id"],
                        midterm=entry["midterm"],
                        final_exam=entry["final_exam"],
                        activity_averages=entry.get("activities", {}),
                        policy=config.grading,
                        group=entry.get("group", ""),
                    )
                except Exception as exc:
                    return _error(422, "InvalidGrade", str(exc))
                store.grades.append(record)
                created.append({"student_id": record.student_id,
                                "term_grade": record.term_grade,
                                "passed": record.passed})
            store.save()
        return {"records": created}

    @app.get("/api/admin/reports/kb")
    async def report_kb(request: Request):
        denied = teacher_guard(request)
        if denied:
            return denied
        stats = kb_stats(store.kb)
        return {"total": len(store.kb),
                "by_category": {c.value: n for c, n in stats.items()}}

    @app.get("/api/admin/reports/averages")
    async def report_averages(request: Request):
        denied = teacher_guard(request)
        if denied:
            return denied
        out = []
        for student_id in store.events.student_ids():
            model = store.student_model(student_id, lessons_total)
            out.append({
                "student_id": student_id,
                "page_view_score": model.averages.page_view_score,
                "avg_quiz_score": model.averages.avg_quiz_score,
                "avg_exercise_score": model.averages.avg_exercise_score,
                "learning_level": learning_level(model.averages, config.assessment),
            })
        return {"students": out}

    @app.get("/api/admin/reports/cohort")
    async def report_cohort(request: Request):
        denied = teacher_guard(request)
        if denied:
            return denied
        groups: dict[str, list[float]] = {}
        for record in store.grades:
            groups.setdefault(record.group or "all", []).append(record.term_grade)
        names = sorted(groups)
        if len(names) != 2:
            return _error(422, "CohortNeedsTwoGroups",
                          f"stored grades form {len(names)} group(s); need exactly 2")
        a, b = names
        if len(groups[a]) < 2 or len(groups[b]) < 2:
            return _error(422, "TooFewSamples", "each group needs at least two grades")
        report = cohort_report(a, groups[a], b, groups[b])
        if request.query_params.get("format") == "text":
            return PlainTextResponse(format_cohort_report(report))
        return report

    return app
