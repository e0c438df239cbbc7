"""Shared builders: block documents, programs and sandbox exercises."""
from __future__ import annotations

import json

import pytest

from blocktutor.codec import parse_exercise, parse_solution
from blocktutor.model import default_registry
from blocktutor.resources import starter_kb


def block(block_id, kind, attrs=None, children=None):
    return {"id": block_id, "kind": kind, "attrs": attrs or {},
            "children": children or []}


def solution_doc(blocks) -> str:
    return json.dumps({"blocks": blocks})


def parse_blocks(blocks):
    return parse_solution(solution_doc(blocks))


def main_wrap(*body):
    """A program whose entry function contains the given body blocks."""
    return [block("main", "function_def",
                  {"name": "main", "return_type": "int", "params": []},
                  list(body))]


def main_program(*body):
    return parse_blocks(main_wrap(*body))


MINIMAL_MAIN = main_wrap()


@pytest.fixture(scope="session")
def kb():
    return starter_kb()


@pytest.fixture(scope="session")
def registry():
    return default_registry()


def make_exercise(tags=(), allowed=None, exercise_id="sandbox",
                  lesson_id="t1-01", limits=(600, 10), expected_stdout=None,
                  reference=None, vocabulary=None):
    if allowed is None:
        allowed = default_registry().names()
    doc = {
        "id": exercise_id,
        "lesson_id": lesson_id,
        "problem_text": "sandbox exercise",
        "allowed_layers": sorted(allowed),
        "problem_tags": sorted(tags),
        "reference_solution": {"blocks": reference or MINIMAL_MAIN},
        "scoring_limits": {"time_limit_seconds": limits[0],
                           "feedback_limit": limits[1]},
    }
    if expected_stdout is not None:
        doc["expected_stdout"] = expected_stdout
    return parse_exercise(json.dumps(doc), tag_vocabulary=vocabulary)


@pytest.fixture
def sandbox_exercise():
    return make_exercise()
