"""Service configuration, loaded from a single JSON file.

The `TUTOR_CONFIG` environment variable points at the file; every field
has a sensible default so a bare config can be two lines.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..analytics import GradingPolicy
from ..assessment import AssessmentConfig

ENV_VAR = "TUTOR_CONFIG"


@dataclass(frozen=True)
class ServiceConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8000
    data_dir: Path = Path("./tutor-data")
    kb_paths: tuple = ()          # empty = shipped starter KB
    question_paths: tuple = ()    # empty = shipped starter bank
    exercise_paths: tuple = ()    # extra exercise documents to load
    lessons_total: int | None = None  # None = size of the shipped taxonomy
    feedback_kind: str = "elaborated"
    assessment: AssessmentConfig = field(default_factory=AssessmentConfig)
    grading: GradingPolicy = field(default_factory=GradingPolicy)
    teacher_token: str = "teacher-token"
    student_tokens: dict = field(default_factory=dict)  # token -> student id


class ConfigError(Exception):
    pass


def _sub_config(data: dict, key: str, factory):
    overrides = data.get(key, {})
    if not isinstance(overrides, dict):
        raise ConfigError(f"{key!r} must be an object")
    base = factory()
    known = set(base.__dataclass_fields__)
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError(f"unknown {key} fields: {sorted(unknown)}")
    try:
        return replace(base, **overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {key} overrides: {exc}") from exc


def parse_config(text: str, base_dir: Path | None = None) -> ServiceConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    known = {"listen", "data_dir", "kb_paths", "question_paths", "exercise_paths",
             "lessons_total", "feedback_kind", "assessment", "grading", "tokens"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")

    listen = data.get("listen", "127.0.0.1:8000")
    if ":" not in listen:
        raise ConfigError("'listen' must be host:port")
    host, _, port_text = listen.rpartition(":")
    try:
        port = int(port_text)
    except ValueError:
        raise ConfigError("'listen' port must be an integer") from None

    base = base_dir or Path.cwd()

    def resolve(path_text: str) -> Path:
        path = Path(path_text)
        return path if path.is_absolute() else base / path

    tokens = data.get("tokens", {})
    if not isinstance(tokens, dict):
        raise ConfigError("'tokens' must be an object")
    students = tokens.get("students", {})
    if not isinstance(students, dict):
        raise ConfigError("'tokens.students' must map tokens to student ids")

    feedback_kind = data.get("feedback_kind", "elaborated")
    if feedback_kind not in ("response", "correct", "elaborated", "adapted"):
        raise ConfigError("'feedback_kind' must be one of response, correct, "
                          "elaborated, adapted")

    lessons_total = data.get("lessons_total")
    if lessons_total is not None and (not isinstance(lessons_total, int) or lessons_total < 1):
        raise ConfigError("'lessons_total' must be a positive integer")

    return ServiceConfig(
        listen_host=host,
        listen_port=port,
        data_dir=resolve(data.get("data_dir", "./tutor-data")),
        kb_paths=tuple(resolve(p) for p in data.get("kb_paths", [])),
        question_paths=tuple(resolve(p) for p in data.get("question_paths", [])),
        exercise_paths=tuple(resolve(p) for p in data.get("exercise_paths", [])),
        lessons_total=lessons_total,
        feedback_kind=feedback_kind,
        assessment=_sub_config(data, "assessment", AssessmentConfig),
        grading=_sub_config(data, "grading", GradingPolicy),
        teacher_token=tokens.get("teacher", "teacher-token"),
        student_tokens=dict(students),
    )


def load_config(path: str | Path | None = None) -> ServiceConfig:
    """Read config from ``path``, the TUTOR_CONFIG env var, or defaults."""
    if path is None:
        env = os.environ.get(ENV_VAR)
        if not env:
            return ServiceConfig()
        path = env
    path = Path(path)
    return parse_config(path.read_text("utf-8"), base_dir=path.parent)
