"""Golden fixtures: two buggy programs per rule category.

Every fixture's complete violation set over the full starter KB was
derived by hand (walking each rule's relevance and satisfaction against
the tiny program) and is frozen here.  The oracle cross-checks each
frozen set, so a drift in either the engine or the rule files fails
loudly.
"""
from __future__ import annotations

import json

import pytest

from blocktutor.engine import evaluate
from blocktutor.resources import starter_kb_documents

from conftest import block, main_wrap, make_exercise, parse_blocks
from oracle import Oracle

GOLDEN = [
    # --- syntax -----------------------------------------------------------
    (
        "syntax: assignment without right-hand side",
        main_wrap(
            block("d1", "declaration", {"name": "x", "data_type": "int"}),
            block("a1", "assignment", {"target": "x"}),
        ),
        (),
        [("sx-assign-value", {"a": "a1"})],
    ),
    (
        "syntax: bad identifier and missing if condition",
        main_wrap(
            block("d1", "declaration", {"name": "2bad", "data_type": "int"}),
            block("i1", "if", {}, [block("b1", "break")]),
        ),
        (),
        [("sx-decl-name", {"d": "d1"}), ("sx-if-cond", {"i": "i1"})],
    ),
    # --- data types ---------------------------------------------------------
    (
        "data types: int variable assigned a float",
        main_wrap(
            block("d1", "declaration", {"name": "x", "data_type": "int"}),
            block("a1", "assignment", {"target": "x", "value": "3.5"}),
        ),
        (),
        [("dt-assign-equal", {"a": "a1"})],
    ),
    (
        "data types: mismatched initializer and float switch selector",
        main_wrap(
            block("d1", "declaration",
                  {"name": "f", "data_type": "float", "init": "1"}),
            block("s1", "switch",
                  {"value": "2.5", "cases": [{"label": 1, "at": 0}]},
                  [block("o1", "output", {"format": "x"})]),
        ),
        (),
        [("dt-decl-init-equal", {"d": "d1"}), ("dt-switch-value-int", {"s": "s1"})],
    ),
    # --- missing references ---------------------------------------------------
    (
        "missing references: assignment to an undeclared variable",
        main_wrap(block("a1", "assignment", {"target": "y", "value": "3"})),
        (),
        [("mr-assign-declared", {"a": "a1"})],
    ),
    (
        "missing references: variable printed before its declaration",
        main_wrap(
            block("o1", "output", {"format": "%d", "args": ["k"]}),
            block("d1", "declaration", {"name": "k", "data_type": "int"}),
        ),
        (),
        [("mr-output-declared", {"o": "o1"})],
    ),
    # --- pointer ---------------------------------------------------------------
    (
        "pointer: dereferencing a plain int",
        main_wrap(
            block("d1", "declaration", {"name": "x", "data_type": "int"}),
            block("a1", "assignment", {"target": "*x", "value": "5"}),
        ),
        (),
        [("pt-deref-target-valid", {"a": "a1"})],
    ),
    (
        "pointer: taking the address of a literal",
        main_wrap(
            block("d1", "declaration", {"name": "p", "data_type": "int*"}),
            block("a1", "assignment", {"target": "p", "value": "&3"}),
        ),
        (),
        [("pt-addr-of-lvalue", {"a": "a1"}), ("sx-assign-value", {"a": "a1"})],
    ),
    # --- memory -------------------------------------------------------------------
    (
        "memory: free before any allocation",
        main_wrap(
            block("d1", "declaration", {"name": "p", "data_type": "int*"}),
            block("f1", "mem_free", {"target": "p"}),
            block("m1", "mem_alloc", {"target": "p", "count": "3"}),
        ),
        (),
        [("mm-free-after-alloc", {"f": "f1"})],
    ),
    (
        "memory: leaked allocation with a float count",
        main_wrap(
            block("d1", "declaration", {"name": "p", "data_type": "int*"}),
            block("m1", "mem_alloc", {"target": "p", "count": "2.5"}),
        ),
        (),
        [("dt-alloc-count-int", {"a": "m1"}), ("mm-alloc-freed", {"a": "m1"})],
    ),
    # --- file -------------------------------------------------------------------------
    (
        "file: write before open, open without mode, never closed",
        main_wrap(
            block("d1", "declaration", {"name": "fh", "data_type": "file"}),
            block("w1", "file_op",
                  {"op": "write", "handle": "fh", "value": '"data"'}),
            block("o1", "file_op",
                  {"op": "open", "handle": "fh", "filename": '"out.txt"'}),
        ),
        (),
        [("fl-open-closed", {"f": "o1"}), ("fl-open-mode", {"f": "o1"}),
         ("fl-write-after-open", {"f": "w1"})],
    ),
    (
        "file: read with no handle and nothing opened",
        main_wrap(block("r1", "file_op", {"op": "read"})),
        (),
        [("fl-op-handle", {"f": "r1"}), ("fl-read-after-open", {"f": "r1"})],
    ),
    # --- functions -----------------------------------------------------------------------
    (
        "functions: call to an undefined function",
        main_wrap(block("c1", "function_call", {"callee": "helper", "args": ["1"]})),
        (),
        [("fn-call-defined", {"c": "c1"})],
    ),
    (
        "functions: wrong arity and a non-void function without return",
        [block("h", "function_def",
               {"name": "helper", "return_type": "int",
                "params": [{"name": "n", "data_type": "int"}]})]
        + main_wrap(
            block("c1", "function_call", {"callee": "helper", "args": ["1", "2"]})),
        (),
        [("fn-call-arity", {"c": "c1"}), ("fn-def-has-return", {"f": "h"})],
    ),
    # --- solution methods -----------------------------------------------------------------
    (
        "solution methods: range problem solved without a loop",
        main_wrap(block("o1", "output", {"format": "7"})),
        ("applies-function-over-range", "prints-result"),
        [("sm-range-loop", {})],
    ),
    (
        "solution methods: no helper function and no branching",
        main_wrap(block("d1", "declaration",
                        {"name": "a", "data_type": "int", "init": "1"})),
        ("requires-helper-function", "requires-branching"),
        [("sm-branching", {}), ("sm-helper-function", {})],
    ),
]


@pytest.fixture(scope="module")
def rule_dicts():
    rules = []
    for _, text in starter_kb_documents():
        rules.extend(json.loads(text)["rules"])
    return rules


@pytest.mark.parametrize("name,blocks,tags,expected",
                         GOLDEN, ids=[g[0] for g in GOLDEN])
def test_golden_fixture(name, blocks, tags, expected, kb, rule_dicts):
    program = parse_blocks(blocks)
    exercise = make_exercise(tags=tags, vocabulary=kb.tag_vocabulary)
    engine_out = [(v.constraint_id, v.bindings)
                  for v in evaluate(program, exercise, kb)]
    assert engine_out == expected
    # Independent confirmation of the frozen expectation.
    assert Oracle(program, tags, rule_dicts).violations() == expected


def test_golden_covers_every_category_twice(kb):
    by_category: dict = {}
    for _, _, _, expected in GOLDEN:
        fixture_categories = set()
        for constraint_id, _ in expected:
            category = kb.by_id(constraint_id).category
            fixture_categories.add(category)
        for category in fixture_categories:
            by_category[category] = by_category.get(category, 0) + 1
    from blocktutor.engine import RuleCategory
    for category in RuleCategory:
        assert by_category.get(category, 0) >= 2, category
