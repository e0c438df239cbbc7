"""Document formats: solutions, exercises, expressions and type notation."""
from .errors import (
    CodecError,
    DocumentSyntaxError,
    ExpressionParseError,
    InvalidReferenceSolution,
    UnknownBlockKind,
    UnknownTag,
)
from .expr import ExprSyntaxError, parse_expression, print_expression
from .exercise import (
    Exercise,
    RuleOverride,
    ScoringLimits,
    exercise_to_obj,
    parse_exercise,
    serialize_exercise,
)
from .solution import (
    ATTR_SCHEMA,
    FILE_OPS,
    AttrType,
    parse_solution,
    serialize_solution,
    solution_to_obj,
)
from .typenotation import TypeNotationError, parse_type, print_type
