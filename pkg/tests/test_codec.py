"""Solution and exercise document parsing, serialization and robustness."""
from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, strategies as st

from blocktutor.codec import (
    CodecError,
    DocumentSyntaxError,
    ExpressionParseError,
    InvalidReferenceSolution,
    UnknownBlockKind,
    UnknownTag,
    parse_exercise,
    parse_solution,
    parse_type,
    print_type,
    serialize_solution,
)
from blocktutor.model.nodes import BlockKind, IntLit, TypeKind

from conftest import block, main_wrap, make_exercise, solution_doc

import progen


class TestParseSolution:
    def test_single_declaration_with_initializer(self):
        # Hand-built expectation: one declaration, initializer literal 3.
        program = parse_solution(solution_doc([
            block("d1", "declaration",
                  {"name": "x", "data_type": "int", "init": "3"}),
        ]))
        assert program.block_count() == 1
        declaration = program.blocks[0]
        assert declaration.kind is BlockKind.DECLARATION
        assert declaration.attrs["name"] == "x"
        assert declaration.attrs["data_type"].kind is TypeKind.INT
        assert declaration.attrs["init"] == IntLit(3)

    def test_empty_document_is_the_empty_program(self):
        assert parse_solution("").block_count() == 0
        assert parse_solution('{"blocks": []}').block_count() == 0

    def test_typo_block_kind(self):
        with pytest.raises(UnknownBlockKind) as err:
            parse_solution(solution_doc([block("b", "whlie_loop")]))
        assert err.value.name == "whlie_loop"

    def test_unknown_document_field_rejected(self):
        with pytest.raises(DocumentSyntaxError):
            parse_solution('{"blocks": [], "extra": 1}')

    def test_unknown_block_field_rejected(self):
        with pytest.raises(DocumentSyntaxError):
            parse_solution('{"blocks": [{"id": "a", "kind": "break", "oops": 1}]}')

    def test_unknown_attr_rejected(self):
        with pytest.raises(DocumentSyntaxError):
            parse_solution(solution_doc([block("b", "break", {"bogus": "1"})]))

    def test_bad_embedded_expression(self):
        with pytest.raises(ExpressionParseError) as err:
            parse_solution(solution_doc([
                block("a1", "assignment", {"target": "x", "value": "1 +"})]))
        assert err.value.block_id == "a1"

    def test_empty_expression_attr_reads_as_absent(self):
        program = parse_solution(solution_doc([
            block("a1", "assignment", {"target": "x", "value": ""})]))
        assert "value" not in program.blocks[0].attrs

    def test_malformed_json_carries_position(self):
        with pytest.raises(DocumentSyntaxError) as err:
            parse_solution('{"blocks": [')
        assert err.value.line is not None

    def test_struct_defs_derived(self):
        program = parse_solution(solution_doc([
            block("sd", "struct_def",
                  {"name": "pair", "fields": [
                      {"name": "a", "data_type": "int"},
                      {"name": "b", "data_type": "float"}]}),
        ] + main_wrap()))
        assert "pair" in program.struct_defs
        assert [f.name for f in program.struct_defs["pair"]] == ["a", "b"]


class TestSerializeSolution:
    def test_empty_program_canonical_document(self):
        text = serialize_solution(parse_solution(""))
        assert json.loads(text) == {"blocks": []}

    def test_round_trip_identity_on_fixtures(self):
        for seed in range(60):
            program, _, _ = progen.generate_program(seed)
            assert parse_solution(serialize_solution(program)) == program

    def test_serialization_is_deterministic(self):
        program, _, _ = progen.generate_program(7)
        again, _, _ = progen.generate_program(7)
        assert serialize_solution(program) == serialize_solution(again)

    def test_serialize_then_parse_is_idempotent(self):
        program, _, _ = progen.generate_program(11)
        once = serialize_solution(program)
        twice = serialize_solution(parse_solution(once))
        assert once == twice


class TestTypeNotation:
    @pytest.mark.parametrize("text,kind", [
        ("int", TypeKind.INT), ("float", TypeKind.FLOAT), ("char", TypeKind.CHAR),
        ("void", TypeKind.VOID), ("file", TypeKind.FILE),
        ("int*", TypeKind.POINTER), ("int[4]", TypeKind.ARRAY),
        ("struct point", TypeKind.STRUCT),
    ])
    def test_base_kinds(self, text, kind):
        assert parse_type(text).kind is kind

    def test_suffix_order(self):
        array_of_pointers = parse_type("int*[4]")
        assert array_of_pointers.kind is TypeKind.ARRAY
        assert array_of_pointers.elem.kind is TypeKind.POINTER
        pointer_to_array = parse_type("int[4]*")
        assert pointer_to_array.kind is TypeKind.POINTER
        assert pointer_to_array.elem.kind is TypeKind.ARRAY

    @pytest.mark.parametrize("text", [
        "int", "float*", "char[10]", "struct point", "int*[4]", "int[4]*",
        "int**", "struct point*[2]",
    ])
    def test_print_parse_round_trip(self, text):
        assert print_type(parse_type(text)) == text


class TestParseExercise:
    def test_minimal_exercise(self):
        exercise = make_exercise()
        assert exercise.id == "sandbox"
        assert exercise.scoring_limits.time_limit_seconds == 600

    def test_zero_time_limit_rejected(self):
        doc = {
            "id": "x", "lesson_id": "t1-01", "problem_text": "p",
            "allowed_layers": ["function_def"],
            "reference_solution": {"blocks": main_wrap()},
            "scoring_limits": {"time_limit_seconds": 0, "feedback_limit": 10},
        }
        with pytest.raises(DocumentSyntaxError):
            parse_exercise(json.dumps(doc))

    def test_shipped_vocabulary_tag_accepted(self, kb):
        exercise = make_exercise(tags=["applies-function-over-range"],
                                 vocabulary=kb.tag_vocabulary)
        assert "applies-function-over-range" in exercise.problem_tags

    def test_unknown_tag_rejected(self, kb):
        with pytest.raises(UnknownTag):
            make_exercise(tags=["no-such-tag"], vocabulary=kb.tag_vocabulary)

    def test_invalid_reference_solution(self):
        doc = {
            "id": "x", "lesson_id": "t1-01", "problem_text": "p",
            "allowed_layers": ["function_def"],
            "reference_solution": {"blocks": []},  # no entry function
            "scoring_limits": {"time_limit_seconds": 60, "feedback_limit": 5},
        }
        with pytest.raises(InvalidReferenceSolution):
            parse_exercise(json.dumps(doc))

    def test_unknown_exercise_field_rejected(self):
        doc = {
            "id": "x", "lesson_id": "t1-01", "problem_text": "p",
            "allowed_layers": ["function_def"],
            "reference_solution": {"blocks": main_wrap()},
            "scoring_limits": {"time_limit_seconds": 60, "feedback_limit": 5},
            "surprise": True,
        }
        with pytest.raises(DocumentSyntaxError):
            parse_exercise(json.dumps(doc))


class TestFuzzRobustness:
    @given(st.binary(max_size=200))
    def test_arbitrary_bytes_yield_typed_errors(self, data):
        try:
            parse_solution(data)
        except CodecError:
            pass

    def test_mutated_valid_documents(self):
        rng = random.Random(99)
        base = serialize_solution(progen.generate_program(3)[0]).encode()
        for _ in range(300):
            mutated = bytearray(base)
            for _ in range(rng.randint(1, 6)):
                mutated[rng.randrange(len(mutated))] = rng.randrange(256)
            try:
                parse_solution(bytes(mutated))
            except CodecError:
                pass
