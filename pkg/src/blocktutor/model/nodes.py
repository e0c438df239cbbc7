"""Data model for block-structured student programs.

A program is an ordered tree of typed blocks.  Each block carries a kind,
a dictionary of kind-specific attributes (names, data types, parsed
expressions) and, for control blocks, an ordered list of children.  The
model is deliberately a small C-like subset: enough surface for the rule
knowledge base to have something to match in every category, nothing more.

All node types are immutable after construction and safe to share between
threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

MAX_POINTER_DEPTH = 4
MAX_EXPR_DEPTH = 64


class TypeKind(str, Enum):
    INT = "int"
    FLOAT = "float"
    CHAR = "char"
    VOID = "void"
    POINTER = "pointer"
    ARRAY = "array"
    STRUCT = "struct"
    FILE = "file"


@dataclass(frozen=True)
class DataType:
    """A static type: scalar, pointer, fixed-length array, struct or file handle."""

    kind: TypeKind
    elem: DataType | None = None
    length: int | None = None
    struct_name: str | None = None

    def __post_init__(self) -> None:
        if self.kind is TypeKind.ARRAY:
            if self.elem is None or self.length is None or self.length < 0:
                raise ValueError("array type needs an element type and length >= 0")
        elif self.kind is TypeKind.POINTER:
            if self.elem is None:
                raise ValueError("pointer type needs an element type")
        elif self.kind is TypeKind.STRUCT:
            if not self.struct_name:
                raise ValueError("struct reference needs a name")

    def pointer_depth(self) -> int:
        depth = 0
        t: DataType | None = self
        while t is not None and t.kind is TypeKind.POINTER:
            depth += 1
            t = t.elem
        return depth


INT = DataType(TypeKind.INT)
FLOAT = DataType(TypeKind.FLOAT)
CHAR = DataType(TypeKind.CHAR)
VOID = DataType(TypeKind.VOID)
FILE = DataType(TypeKind.FILE)


def pointer_to(elem: DataType) -> DataType:
    return DataType(TypeKind.POINTER, elem=elem)


def array_of(elem: DataType, length: int) -> DataType:
    return DataType(TypeKind.ARRAY, elem=elem, length=length)


def struct_ref(name: str) -> DataType:
    return DataType(TypeKind.STRUCT, struct_name=name)


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

class UnaryOp(str, Enum):
    NEG = "-"
    POS = "+"
    NOT = "!"
    ADDR = "&"
    DEREF = "*"


class BinaryOp(str, Enum):
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"
    MOD = "%"
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    EQ = "=="
    NE = "!="
    AND = "&&"
    OR = "||"


COMPARISON_OPS = frozenset({BinaryOp.LT, BinaryOp.LE, BinaryOp.GT, BinaryOp.GE, BinaryOp.EQ, BinaryOp.NE})
LOGICAL_OPS = frozenset({BinaryOp.AND, BinaryOp.OR})
ARITHMETIC_OPS = frozenset({BinaryOp.ADD, BinaryOp.SUB, BinaryOp.MUL, BinaryOp.DIV, BinaryOp.MOD})


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class FloatLit(Expr):
    value: float


@dataclass(frozen=True)
class CharLit(Expr):
    value: str  # exactly one character


@dataclass(frozen=True)
class StrLit(Expr):
    value: str


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Unary(Expr):
    op: UnaryOp
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: BinaryOp
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    callee: str
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class Index(Expr):
    base: Expr
    index: Expr


@dataclass(frozen=True)
class Member(Expr):
    base: Expr
    name: str
    arrow: bool = False  # a->b instead of a.b


def expr_depth(expr: Expr) -> int:
    """Height of an expression tree (a lone literal has depth 1)."""
    if isinstance(expr, (IntLit, FloatLit, CharLit, StrLit, Var)):
        return 1
    if isinstance(expr, Unary):
        return 1 + expr_depth(expr.operand)
    if isinstance(expr, Binary):
        return 1 + max(expr_depth(expr.left), expr_depth(expr.right))
    if isinstance(expr, Call):
        return 1 + max((expr_depth(a) for a in expr.args), default=0)
    if isinstance(expr, Index):
        return 1 + max(expr_depth(expr.base), expr_depth(expr.index))
    if isinstance(expr, Member):
        return 1 + expr_depth(expr.base)
    raise TypeError(f"unknown expression node {expr!r}")


def walk_expr(expr: Expr):
    """Yield every node of an expression tree, preorder."""
    yield expr
    if isinstance(expr, Unary):
        yield from walk_expr(expr.operand)
    elif isinstance(expr, Binary):
        yield from walk_expr(expr.left)
        yield from walk_expr(expr.right)
    elif isinstance(expr, Call):
        for a in expr.args:
            yield from walk_expr(a)
    elif isinstance(expr, Index):
        yield from walk_expr(expr.base)
        yield from walk_expr(expr.index)
    elif isinstance(expr, Member):
        yield from walk_expr(expr.base)


# ---------------------------------------------------------------------------
# Blocks
# ---------------------------------------------------------------------------

class BlockKind(str, Enum):
    DECLARATION = "declaration"
    ASSIGNMENT = "assignment"
    IF = "if"
    SWITCH = "switch"
    FOR_LOOP = "for_loop"
    WHILE_LOOP = "while_loop"
    DO_WHILE_LOOP = "do_while_loop"
    FUNCTION_DEF = "function_def"
    FUNCTION_CALL = "function_call"
    RETURN = "return"
    PREPROCESSOR = "preprocessor"
    STRUCT_DEF = "struct_def"
    FILE_OP = "file_op"
    MEM_ALLOC = "mem_alloc"
    MEM_FREE = "mem_free"
    OUTPUT = "output"
    INPUT = "input"
    BREAK = "break"
    CONTINUE = "continue"


CONTROL_KINDS = frozenset({
    BlockKind.IF,
    BlockKind.SWITCH,
    BlockKind.FOR_LOOP,
    BlockKind.WHILE_LOOP,
    BlockKind.DO_WHILE_LOOP,
    BlockKind.FUNCTION_DEF,
})

LOOP_KINDS = frozenset({BlockKind.FOR_LOOP, BlockKind.WHILE_LOOP, BlockKind.DO_WHILE_LOOP})


class LayerClass(str, Enum):
    BASIC = "basic"
    ADVANCED = "advanced"


@dataclass(frozen=True)
class LayerTag:
    layer_class: LayerClass
    template_name: str


@dataclass(frozen=True)
class TypedName:
    """A (name, type) pair: function parameter or struct field."""

    name: str
    data_type: DataType


@dataclass(frozen=True)
class CaseLabel:
    """Jump target of a switch: label value (or default) and child index."""

    label: int | None  # None = default
    at: int


@dataclass(frozen=True)
class Block:
    id: str
    kind: BlockKind
    attrs: dict = field(default_factory=dict)
    children: tuple[Block, ...] = ()
    layer: LayerTag | None = None  # None = default template for the kind

    def attr(self, name: str, default=None):
        return self.attrs.get(name, default)


@dataclass(frozen=True)
class Program:
    """A complete student solution: top-level blocks plus derived struct index."""

    blocks: tuple[Block, ...] = ()
    struct_defs: dict = field(default_factory=dict)  # name -> tuple[TypedName, ...]
    entry_function: str = "main"

    @classmethod
    def from_blocks(cls, blocks, entry_function: str = "main") -> Program:
        """Build a program, deriving the struct index from struct_def blocks."""
        blocks = tuple(blocks)
        structs: dict = {}
        for block in iter_blocks(blocks):
            if block.kind is BlockKind.STRUCT_DEF:
                name = block.attr("name")
                if name:
                    structs.setdefault(name, tuple(block.attr("fields", ())))
        return cls(blocks=blocks, struct_defs=structs, entry_function=entry_function)

    def block_count(self) -> int:
        return sum(1 for _ in iter_blocks(self.blocks))

    def find_block(self, block_id: str) -> Block | None:
        for block in iter_blocks(self.blocks):
            if block.id == block_id:
                return block
        return None


def iter_blocks(blocks):
    """Preorder traversal over a block forest."""
    for block in blocks:
        yield block
        yield from iter_blocks(block.children)


# Attribute names that hold expressions, per block kind.  Everything the
# validator, type checker and rule engine needs to know about where
# expressions live.
EXPR_ATTRS: dict[BlockKind, tuple[str, ...]] = {
    BlockKind.DECLARATION: ("init",),
    BlockKind.ASSIGNMENT: ("target", "value"),
    BlockKind.IF: ("cond",),
    BlockKind.SWITCH: ("value",),
    BlockKind.FOR_LOOP: ("init", "cond", "step"),
    BlockKind.WHILE_LOOP: ("cond",),
    BlockKind.DO_WHILE_LOOP: ("cond",),
    BlockKind.FUNCTION_DEF: (),
    BlockKind.FUNCTION_CALL: (),
    BlockKind.RETURN: ("value",),
    BlockKind.PREPROCESSOR: (),
    BlockKind.STRUCT_DEF: (),
    BlockKind.FILE_OP: ("filename", "value", "target"),
    BlockKind.MEM_ALLOC: ("target", "count"),
    BlockKind.MEM_FREE: ("target",),
    BlockKind.OUTPUT: (),
    BlockKind.INPUT: ("target",),
    BlockKind.BREAK: (),
    BlockKind.CONTINUE: (),
}

# Attribute names holding a list of expressions.
EXPR_LIST_ATTRS: dict[BlockKind, tuple[str, ...]] = {
    BlockKind.FUNCTION_CALL: ("args",),
    BlockKind.OUTPUT: ("args",),
}


def block_expressions(block: Block):
    """Yield (attr name, expression) for every parsed expression on a block."""
    for name in EXPR_ATTRS.get(block.kind, ()):
        value = block.attrs.get(name)
        if isinstance(value, Expr):
            yield name, value
    for name in EXPR_LIST_ATTRS.get(block.kind, ()):
        value = block.attrs.get(name)
        if isinstance(value, tuple):
            for item in value:
                if isinstance(item, Expr):
                    yield name, item
