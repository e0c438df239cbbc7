"""Static typing of the expression mini-language and whole-program checks.

The "compile" action of the workspace is validation plus this type check;
there is no code generation.  Inference is deterministic and pure.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .nodes import (
    ARITHMETIC_OPS,
    CHAR,
    COMPARISON_OPS,
    FLOAT,
    INT,
    LOGICAL_OPS,
    Binary,
    BinaryOp,
    Block,
    BlockKind,
    Call,
    CharLit,
    DataType,
    Expr,
    FloatLit,
    Index,
    IntLit,
    Member,
    Program,
    StrLit,
    TypeKind,
    TypedName,
    Unary,
    UnaryOp,
    Var,
    block_expressions,
    iter_blocks,
    pointer_to,
)


class UnboundVariable(Exception):
    def __init__(self, name: str):
        super().__init__(f"variable {name!r} is not declared")
        self.name = name


class TypeMismatch(Exception):
    def __init__(self, expected: str, found: str, node: Expr):
        super().__init__(f"expected {expected}, found {found} in {type(node).__name__}")
        self.expected = expected
        self.found = found
        self.node = node


@dataclass(frozen=True)
class FunctionSig:
    name: str
    return_type: DataType
    params: tuple[TypedName, ...]


def _describe(t: DataType) -> str:
    if t.kind is TypeKind.POINTER:
        return f"pointer to {_describe(t.elem)}"
    if t.kind is TypeKind.ARRAY:
        return f"array of {_describe(t.elem)}"
    if t.kind is TypeKind.STRUCT:
        return f"struct {t.struct_name}"
    return t.kind.value


_NUMERIC = (TypeKind.INT, TypeKind.FLOAT, TypeKind.CHAR)
_SCALAR = (TypeKind.INT, TypeKind.FLOAT, TypeKind.CHAR, TypeKind.POINTER)


def infer_type(
    expr: Expr,
    scope,
    *,
    functions=None,
    structs=None,
) -> DataType:
    """Static type of ``expr`` under ``scope`` (a name -> DataType mapping).

    Mixed int/float arithmetic promotes to float; char operands promote to
    int; comparisons and logical operators yield int.  ``functions`` maps
    callee names to FunctionSig for call typing; ``structs`` maps struct
    names to their field tuples for member access.
    """
    functions = functions or {}
    structs = structs or {}

    def infer(e: Expr) -> DataType:
        if isinstance(e, IntLit):
            return INT
        if isinstance(e, FloatLit):
            return FLOAT
        if isinstance(e, CharLit):
            return CHAR
        if isinstance(e, StrLit):
            return pointer_to(CHAR)
        if isinstance(e, Var):
            try:
                return scope[e.name]
            except KeyError:
                raise UnboundVariable(e.name) from None
        if isinstance(e, Unary):
            inner = infer(e.operand)
            if e.op in (UnaryOp.NEG, UnaryOp.POS):
                if inner.kind not in _NUMERIC:
                    raise TypeMismatch("numeric operand", _describe(inner), e)
                return FLOAT if inner.kind is TypeKind.FLOAT else INT
            if e.op is UnaryOp.NOT:
                if inner.kind not in _SCALAR:
                    raise TypeMismatch("scalar operand", _describe(inner), e)
                return INT
            if e.op is UnaryOp.ADDR:
                if not _is_lvalue(e.operand):
                    raise TypeMismatch("addressable value", _describe(inner), e)
                return pointer_to(inner)
            if e.op is UnaryOp.DEREF:
                if inner.kind in (TypeKind.POINTER, TypeKind.ARRAY):
                    return inner.elem
                raise TypeMismatch("pointer", _describe(inner), e)
        if isinstance(e, Binary):
            left = infer(e.left)
            right = infer(e.right)
            if e.op in ARITHMETIC_OPS:
                for side in (left, right):
                    if side.kind not in _NUMERIC:
                        raise TypeMismatch("numeric operand", _describe(side), e)
                if e.op is BinaryOp.MOD:
                    if TypeKind.FLOAT in (left.kind, right.kind):
                        raise TypeMismatch("integer operands for %", "float", e)
                    return INT
                if TypeKind.FLOAT in (left.kind, right.kind):
                    return FLOAT
                return INT
            if e.op in COMPARISON_OPS:
                numeric = left.kind in _NUMERIC and right.kind in _NUMERIC
                same_pointer = (left.kind is TypeKind.POINTER and left == right)
                if not (numeric or same_pointer):
                    raise TypeMismatch("comparable operands",
                                       f"{_describe(left)} vs {_describe(right)}", e)
                return INT
            if e.op in LOGICAL_OPS:
                for side in (left, right):
                    if side.kind not in _SCALAR:
                        raise TypeMismatch("scalar operand", _describe(side), e)
                return INT
        if isinstance(e, Call):
            sig = functions.get(e.callee)
            if sig is None:
                raise UnboundVariable(e.callee)
            if len(e.args) != len(sig.params):
                raise TypeMismatch(f"{len(sig.params)} arguments",
                                   f"{len(e.args)} arguments", e)
            for arg, param in zip(e.args, sig.params):
                arg_type = infer(arg)
                if not _assignable(param.data_type, arg_type):
                    raise TypeMismatch(_describe(param.data_type), _describe(arg_type), e)
            return sig.return_type
        if isinstance(e, Index):
            base = infer(e.base)
            if base.kind not in (TypeKind.ARRAY, TypeKind.POINTER):
                raise TypeMismatch("array or pointer", _describe(base), e)
            idx = infer(e.index)
            if idx.kind not in (TypeKind.INT, TypeKind.CHAR):
                raise TypeMismatch("integer index", _describe(idx), e)
            return base.elem
        if isinstance(e, Member):
            base = infer(e.base)
            if e.arrow:
                if base.kind is not TypeKind.POINTER or base.elem.kind is not TypeKind.STRUCT:
                    raise TypeMismatch("pointer to struct", _describe(base), e)
                base = base.elem
            if base.kind is not TypeKind.STRUCT:
                raise TypeMismatch("struct", _describe(base), e)
            fields = structs.get(base.struct_name, ())
            for f in fields:
                if f.name == e.name:
                    return f.data_type
            raise TypeMismatch(f"field of struct {base.struct_name}",
                               f"no member {e.name!r}", e)
        raise TypeError(f"unknown expression node {e!r}")

    return infer(expr)


def _is_lvalue(e: Expr) -> bool:
    return isinstance(e, (Var, Index, Member)) or (
        isinstance(e, Unary) and e.op is UnaryOp.DEREF)


def _assignable(target: DataType, value: DataType) -> bool:
    """Loose call-argument compatibility: exact match or numeric conversion."""
    if target == value:
        return True
    return target.kind in _NUMERIC and value.kind in _NUMERIC


# ---------------------------------------------------------------------------
# Whole-program checking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TypeIssue:
    block_id: str
    attr: str
    message: str


@dataclass
class ProgramScopes:
    """Flow-insensitive scopes: globals plus one scope per function body."""

    globals: dict = field(default_factory=dict)
    functions: dict = field(default_factory=dict)  # name -> FunctionSig
    structs: dict = field(default_factory=dict)
    per_block: dict = field(default_factory=dict)  # block id -> scope mapping


def collect_scopes(program: Program) -> ProgramScopes:
    scopes = ProgramScopes(structs=dict(program.struct_defs))

    for block in program.blocks:
        if block.kind is BlockKind.DECLARATION:
            name = block.attr("name")
            data_type = block.attr("data_type")
            if name and isinstance(data_type, DataType):
                scopes.globals.setdefault(name, data_type)
        elif block.kind is BlockKind.FUNCTION_DEF:
            name = block.attr("name")
            return_type = block.attr("return_type")
            params = tuple(block.attr("params", ()) or ())
            if name and isinstance(return_type, DataType):
                scopes.functions.setdefault(name, FunctionSig(name, return_type, params))

    def assign_scope(block: Block, scope: dict) -> None:
        scopes.per_block[block.id] = scope
        for child in block.children:
            assign_scope(child, scope)

    for block in program.blocks:
        if block.kind is BlockKind.FUNCTION_DEF:
            local = dict(scopes.globals)
            for param in block.attr("params", ()) or ():
                if isinstance(param, TypedName):
                    local[param.name] = param.data_type
            for inner in iter_blocks(block.children):
                if inner.kind is BlockKind.DECLARATION:
                    name = inner.attr("name")
                    data_type = inner.attr("data_type")
                    if name and isinstance(data_type, DataType):
                        local.setdefault(name, data_type)
            scopes.per_block[block.id] = local
            for child in block.children:
                assign_scope(child, local)
        else:
            assign_scope(block, scopes.globals)

    return scopes


def check_program(program: Program) -> list[TypeIssue]:
    """Type-check every expression attribute; empty list means the program compiles."""
    scopes = collect_scopes(program)
    issues: list[TypeIssue] = []

    for block in iter_blocks(program.blocks):
        scope = scopes.per_block.get(block.id, scopes.globals)
        for attr_name, expr in block_expressions(block):
            try:
                infer_type(expr, scope, functions=scopes.functions, structs=scopes.structs)
            except (UnboundVariable, TypeMismatch) as exc:
                issues.append(TypeIssue(block.id, attr_name, str(exc)))
        if block.kind is BlockKind.FOR_LOOP:
            var = block.attr("var")
            if var and var not in scope:
                issues.append(TypeIssue(block.id, "var", f"variable {var!r} is not declared"))
        if block.kind in (BlockKind.ASSIGNMENT, BlockKind.INPUT, BlockKind.MEM_ALLOC,
                          BlockKind.MEM_FREE):
            target = block.attr("target")
            if isinstance(target, Expr) and not _is_lvalue(target):
                issues.append(TypeIssue(block.id, "target", "target is not assignable"))

    return issues
