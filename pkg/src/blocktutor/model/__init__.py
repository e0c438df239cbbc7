"""Block-tree program model, templates, validation, traversal and typing."""
from .nodes import (
    ARITHMETIC_OPS,
    CHAR,
    COMPARISON_OPS,
    CONTROL_KINDS,
    EXPR_ATTRS,
    EXPR_LIST_ATTRS,
    FILE,
    FLOAT,
    INT,
    LOGICAL_OPS,
    LOOP_KINDS,
    MAX_EXPR_DEPTH,
    MAX_POINTER_DEPTH,
    VOID,
    Binary,
    BinaryOp,
    Block,
    BlockKind,
    Call,
    CaseLabel,
    CharLit,
    DataType,
    Expr,
    FloatLit,
    Index,
    IntLit,
    LayerClass,
    LayerTag,
    Member,
    Program,
    StrLit,
    TypeKind,
    TypedName,
    Unary,
    UnaryOp,
    Var,
    array_of,
    block_expressions,
    expr_depth,
    iter_blocks,
    pointer_to,
    struct_ref,
    walk_expr,
)
from .templates import (
    DuplicateTemplate,
    Template,
    TemplateRegistry,
    UnknownTemplate,
    default_registry,
    layer_for_block,
    register_template,
)
from .traverse import NodeInfo, enumerate_nodes
from .typecheck import (
    FunctionSig,
    ProgramScopes,
    TypeIssue,
    TypeMismatch,
    UnboundVariable,
    check_program,
    collect_scopes,
    infer_type,
)
from .validate import Defect, DefectKind, ValidationReport, validate_program
