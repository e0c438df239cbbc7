"""Bounded tree-walking execution of validated programs.

Execution starts at the entry function and follows standard imperative
semantics.  Everything is virtual: output accumulates in a byte buffer,
input comes from a scripted token list, file operations touch an
in-memory file table, and dynamic memory lives in a per-run heap where
double frees and use-after-free are runtime errors rather than undefined
behaviour.  A step budget bounds every run, so no input can hang the
evaluator.

Only declarations execute at the top level; other top-level statements
are inert, as in the source language.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .model.nodes import (
    INT,
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
    Unary,
    UnaryOp,
    Var,
)
from .model.typecheck import check_program
from .model.validate import validate_program

MAX_CALL_DEPTH = 128


@dataclass(frozen=True)
class RunLimits:
    max_steps: int = 100_000
    max_output_bytes: int = 65_536
    stdin_script: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.max_steps <= 0 or self.max_output_bytes <= 0:
            raise ValueError("run limits must be strictly positive")


class RunStatus(str, Enum):
    COMPLETED = "completed"
    STEP_LIMIT_EXCEEDED = "step_limit_exceeded"
    RUNTIME_ERROR = "runtime_error"


@dataclass(frozen=True)
class RuntimeOutcome:
    status: RunStatus
    stdout: bytes
    steps_used: int
    virtual_files: dict
    error_message: str | None = None
    error_block_id: str | None = None


class InvalidProgram(Exception):
    """The run precondition failed: structural defects or type issues."""

    def __init__(self, defects, type_issues):
        parts = [f"{d.kind.value}({d.block_id})" for d in defects]
        parts += [f"type:{i.block_id}.{i.attr}" for i in type_issues]
        super().__init__("program does not compile: " + "; ".join(parts))
        self.defects = tuple(defects)
        self.type_issues = tuple(type_issues)


class _RuntimeFault(Exception):
    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class _StepLimit(Exception):
    pass


class _Signal(Enum):
    NEXT = "next"
    BREAK = "break"
    CONTINUE = "continue"
    RETURN = "return"


def _trunc_div(a: int, b: int) -> int:
    """Integer division truncating toward zero, exact for any magnitude."""
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


class _MemBlock:
    """A run of cells: one variable, one array, or one heap allocation."""

    __slots__ = ("cells", "elem_type", "heap", "freed", "label", "is_array")

    def __init__(self, size: int, elem_type: DataType, heap: bool = False,
                 label: str = "", is_array: bool = False):
        self.cells = [_default_value(elem_type) for _ in range(size)]
        self.elem_type = elem_type
        self.heap = heap
        self.freed = False
        self.label = label
        self.is_array = is_array


@dataclass(frozen=True)
class _Pointer:
    block: _MemBlock
    offset: int


@dataclass
class _FileState:
    name: str
    mode: str
    cursor: int = 0
    closed: bool = False


def _default_value(t: DataType):
    if t.kind is TypeKind.INT:
        return 0
    if t.kind is TypeKind.FLOAT:
        return 0.0
    if t.kind is TypeKind.CHAR:
        return "\0"
    if t.kind is TypeKind.STRUCT:
        return None  # populated lazily from struct_defs
    return None  # pointers, files, void


@dataclass
class _Frame:
    slots: dict = field(default_factory=dict)  # name -> _MemBlock


class _Machine:
    def __init__(self, program: Program, limits: RunLimits):
        self.program = program
        self.limits = limits
        self.steps_used = 0
        self.stdout = bytearray()
        self.virtual_files: dict[str, str] = {}
        self.stdin = list(limits.stdin_script)
        self.stdin_pos = 0
        self.globals = _Frame()
        self.frames: list[_Frame] = []
        self.functions: dict[str, Block] = {}
        self.current_block_id: str | None = None
        for block in program.blocks:
            if block.kind is BlockKind.FUNCTION_DEF and block.attr("name"):
                self.functions.setdefault(block.attr("name"), block)

    # -- bookkeeping ---------------------------------------------------

    def tick(self) -> None:
        if self.steps_used >= self.limits.max_steps:
            raise _StepLimit()
        self.steps_used += 1

    def fault(self, message: str):
        raise _RuntimeFault(message)

    def emit(self, text: str) -> None:
        data = text.encode("utf-8")
        if len(self.stdout) + len(data) > self.limits.max_output_bytes:
            room = self.limits.max_output_bytes - len(self.stdout)
            self.stdout.extend(data[:room])
            self.fault("output limit exceeded")
        self.stdout.extend(data)

    def env(self) -> _Frame:
        return self.frames[-1] if self.frames else self.globals

    def find_slot(self, name: str) -> _MemBlock | None:
        if self.frames and name in self.frames[-1].slots:
            return self.frames[-1].slots[name]
        return self.globals.slots.get(name)

    def declare(self, name: str, data_type: DataType) -> _MemBlock:
        if data_type.kind is TypeKind.ARRAY:
            slot = _MemBlock(data_type.length, data_type.elem, label=name, is_array=True)
        else:
            slot = _MemBlock(1, data_type, label=name)
            if data_type.kind is TypeKind.STRUCT:
                slot.cells[0] = self.new_struct(data_type.struct_name)
        self.env().slots[name] = slot
        return slot

    def new_struct(self, struct_name: str) -> dict:
        fields = self.program.struct_defs.get(struct_name, ())
        return {f.name: _default_value(f.data_type) for f in fields}

    def field_type(self, struct_name: str, field_name: str) -> DataType | None:
        for f in self.program.struct_defs.get(struct_name, ()):
            if f.name == field_name:
                return f.data_type
        return None

    # -- values ---------------------------------------------------------

    def to_int(self, value) -> int:
        if isinstance(value, bool):
            return int(value)
        if isinstance(value, int):
            return value
        if isinstance(value, float):
            return math.trunc(value)
        if isinstance(value, str) and len(value) == 1:
            return ord(value)
        self.fault("value is not numeric")

    def to_float(self, value) -> float:
        if isinstance(value, str) and len(value) == 1:
            return float(ord(value))
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        self.fault("value is not numeric")

    def truthy(self, value) -> bool:
        if value is None:
            return False
        if isinstance(value, _Pointer):
            return True
        if isinstance(value, str):
            return value != "\0" and value != ""
        return bool(value)

    def convert(self, value, target: DataType):
        kind = target.kind
        if kind is TypeKind.INT:
            return self.to_int(value)
        if kind is TypeKind.FLOAT:
            return self.to_float(value)
        if kind is TypeKind.CHAR:
            if isinstance(value, str) and len(value) == 1:
                return value
            return chr(self.to_int(value) % 0x110000)
        if kind is TypeKind.POINTER:
            if value is None or isinstance(value, (_Pointer, str)):
                return value
            self.fault("cannot store a non-pointer value in a pointer")
        if kind is TypeKind.STRUCT:
            if isinstance(value, dict):
                return dict(value)
            self.fault("cannot store a non-struct value in a struct")
        if kind is TypeKind.FILE:
            if value is None or isinstance(value, _FileState):
                return value
            self.fault("cannot store a non-file value in a file handle")
        return value

    def read_cell(self, pointer: _Pointer):
        block = pointer.block
        if block.freed:
            self.fault("use after free")
        if not 0 <= pointer.offset < len(block.cells):
            self.fault(f"memory access out of bounds (offset {pointer.offset} "
                       f"of {len(block.cells)})")
        return block.cells[pointer.offset]

    def write_cell(self, pointer: _Pointer, value) -> None:
        block = pointer.block
        if block.freed:
            self.fault("use after free")
        if not 0 <= pointer.offset < len(block.cells):
            self.fault(f"memory access out of bounds (offset {pointer.offset} "
                       f"of {len(block.cells)})")
        block.cells[pointer.offset] = self.convert(value, block.elem_type)

    # -- expressions ----------------------------------------------------

    def eval(self, expr: Expr):
        if isinstance(expr, IntLit):
            return expr.value
        if isinstance(expr, FloatLit):
            return expr.value
        if isinstance(expr, CharLit):
            return expr.value
        if isinstance(expr, StrLit):
            return expr.value
        if isinstance(expr, Var):
            slot = self.find_slot(expr.name)
            if slot is None:
                self.fault(f"variable {expr.name!r} used before its declaration")
            if slot.is_array:
                return _Pointer(slot, 0)  # array decays to a pointer
            return slot.cells[0]
        if isinstance(expr, Unary):
            return self.eval_unary(expr)
        if isinstance(expr, Binary):
            return self.eval_binary(expr)
        if isinstance(expr, Call):
            return self.call_function(expr.callee, [self.eval(a) for a in expr.args])
        if isinstance(expr, Index):
            base = self.eval(expr.base)
            if not isinstance(base, _Pointer):
                self.fault("indexing a non-pointer value")
            idx = self.to_int(self.eval(expr.index))
            return self.read_cell(_Pointer(base.block, base.offset + idx))
        if isinstance(expr, Member):
            record = self.member_record(expr)
            if expr.name not in record:
                self.fault(f"struct has no member {expr.name!r}")
            return record[expr.name]
        self.fault(f"cannot evaluate {type(expr).__name__}")

    def member_record(self, expr: Member) -> dict:
        base = self.eval(expr.base)
        if expr.arrow:
            if not isinstance(base, _Pointer):
                self.fault("'->' applied to a non-pointer")
            base = self.read_cell(base)
        if not isinstance(base, dict):
            self.fault("member access on a non-struct value")
        return base

    def eval_unary(self, expr: Unary):
        if expr.op is UnaryOp.ADDR:
            pointer = self.lvalue(expr.operand)
            if not isinstance(pointer, _Pointer):
                self.fault("cannot take the address of this value")
            return pointer
        value = self.eval(expr.operand)
        if expr.op is UnaryOp.DEREF:
            if value is None:
                self.fault("dereference of a null pointer")
            if not isinstance(value, _Pointer):
                self.fault("dereference of a non-pointer value")
            return self.read_cell(value)
        if expr.op is UnaryOp.NOT:
            return 0 if self.truthy(value) else 1
        if expr.op is UnaryOp.NEG:
            if isinstance(value, float):
                return -value
            return -self.to_int(value)
        if expr.op is UnaryOp.POS:
            if isinstance(value, float):
                return value
            return self.to_int(value)
        self.fault(f"unknown unary operator {expr.op}")

    def eval_binary(self, expr: Binary):
        op = expr.op
        if op is BinaryOp.AND:
            if not self.truthy(self.eval(expr.left)):
                return 0
            return 1 if self.truthy(self.eval(expr.right)) else 0
        if op is BinaryOp.OR:
            if self.truthy(self.eval(expr.left)):
                return 1
            return 1 if self.truthy(self.eval(expr.right)) else 0

        left = self.eval(expr.left)
        right = self.eval(expr.right)

        if op in (BinaryOp.EQ, BinaryOp.NE):
            if isinstance(left, _Pointer) or isinstance(right, _Pointer) \
                    or left is None or right is None:
                equal = left == right
            else:
                equal = self.to_float(left) == self.to_float(right)
            return int(equal if op is BinaryOp.EQ else not equal)

        if op in (BinaryOp.LT, BinaryOp.LE, BinaryOp.GT, BinaryOp.GE):
            if isinstance(left, _Pointer) and isinstance(right, _Pointer):
                if left.block is not right.block:
                    self.fault("ordering pointers into different allocations")
                a, b = left.offset, right.offset
            else:
                a, b = self.to_float(left), self.to_float(right)
            result = {
                BinaryOp.LT: a < b, BinaryOp.LE: a <= b,
                BinaryOp.GT: a > b, BinaryOp.GE: a >= b,
            }[op]
            return int(result)

        # arithmetic
        if op is BinaryOp.MOD:
            a, b = self.to_int(left), self.to_int(right)
            if b == 0:
                self.fault("modulo by zero")
            return a - _trunc_div(a, b) * b
        use_float = isinstance(left, float) or isinstance(right, float)
        if use_float:
            a, b = self.to_float(left), self.to_float(right)
            if op is BinaryOp.ADD:
                return a + b
            if op is BinaryOp.SUB:
                return a - b
            if op is BinaryOp.MUL:
                return a * b
            if b == 0.0:
                self.fault("division by zero")
            return a / b
        a, b = self.to_int(left), self.to_int(right)
        if op is BinaryOp.ADD:
            return a + b
        if op is BinaryOp.SUB:
            return a - b
        if op is BinaryOp.MUL:
            return a * b
        if b == 0:
            self.fault("division by zero")
        return _trunc_div(a, b)

    def lvalue(self, expr: Expr) -> _Pointer | tuple:
        """Resolve an assignable place: a cell pointer or a (record, field) pair."""
        if isinstance(expr, Var):
            slot = self.find_slot(expr.name)
            if slot is None:
                self.fault(f"variable {expr.name!r} used before its declaration")
            if len(slot.cells) > 1:
                self.fault("cannot assign to an array variable")
            return _Pointer(slot, 0)
        if isinstance(expr, Unary) and expr.op is UnaryOp.DEREF:
            value = self.eval(expr.operand)
            if value is None:
                self.fault("dereference of a null pointer")
            if not isinstance(value, _Pointer):
                self.fault("dereference of a non-pointer value")
            return value
        if isinstance(expr, Index):
            base = self.eval(expr.base)
            if not isinstance(base, _Pointer):
                self.fault("indexing a non-pointer value")
            idx = self.to_int(self.eval(expr.index))
            return _Pointer(base.block, base.offset + idx)
        if isinstance(expr, Member):
            record = self.member_record(expr)
            if expr.name not in record:
                self.fault(f"struct has no member {expr.name!r}")
            return (record, expr.name)
        self.fault("expression is not assignable")

    def store(self, place, value) -> None:
        if isinstance(place, _Pointer):
            self.write_cell(place, value)
        else:
            # Struct member writes hold the value as-is; field-level
            # conversion would need the member's declared type here.
            record, name = place
            record[name] = value

    # -- statements -----------------------------------------------------

    def run_main(self) -> None:
        for block in self.program.blocks:
            if block.kind is BlockKind.DECLARATION:
                self.exec_block(block)
        entry = self.functions.get(self.program.entry_function)
        if entry is None:
            self.fault(f"entry function {self.program.entry_function!r} is missing")
        self.call_def(entry, [])

    def call_function(self, name: str, args: list):
        target = self.functions.get(name)
        if target is None:
            self.fault(f"call to undefined function {name!r}")
        return self.call_def(target, args)

    def call_def(self, definition: Block, args: list):
        if len(self.frames) >= MAX_CALL_DEPTH:
            self.fault("call depth exceeded")
        params = definition.attr("params", ()) or ()
        if len(args) != len(params):
            self.fault(f"function {definition.attr('name')!r} expects "
                       f"{len(params)} arguments, got {len(args)}")
        frame = _Frame()
        self.frames.append(frame)
        try:
            for param, value in zip(params, args):
                if param.data_type.kind is TypeKind.ARRAY:
                    self.fault("array parameters are not supported; pass a pointer")
                slot = _MemBlock(1, param.data_type, label=param.name)
                slot.cells[0] = self.convert(value, param.data_type)
                frame.slots[param.name] = slot
            signal, value = self.exec_body(definition.children)
        finally:
            self.frames.pop()
        return_type = definition.attr("return_type")
        if signal is _Signal.RETURN and value is not None:
            if isinstance(return_type, DataType) and return_type.kind is not TypeKind.VOID:
                return self.convert(value, return_type)
            return value
        if isinstance(return_type, DataType) and return_type.kind is not TypeKind.VOID:
            return _default_value(return_type)
        return None

    def exec_body(self, blocks) -> tuple:
        for block in blocks:
            signal, value = self.exec_block(block)
            if signal is not _Signal.NEXT:
                return signal, value
        return _Signal.NEXT, None

    def exec_block(self, block: Block) -> tuple:
        self.tick()
        self.current_block_id = block.id
        kind = block.kind

        if kind is BlockKind.DECLARATION:
            name = block.attr("name")
            data_type = block.attr("data_type")
            if not name or not isinstance(data_type, DataType):
                self.fault("declaration is incomplete")
            slot = self.declare(name, data_type)
            init = block.attr("init")
            if isinstance(init, Expr):
                if data_type.kind is TypeKind.ARRAY:
                    self.fault("array initializers are not supported")
                slot.cells[0] = self.convert(self.eval(init), data_type)
            return _Signal.NEXT, None

        if kind is BlockKind.ASSIGNMENT:
            target = block.attr("target")
            value = block.attr("value")
            if not isinstance(target, Expr) or not isinstance(value, Expr):
                self.fault("assignment is incomplete")
            self.store(self.lvalue(target), self.eval(value))
            return _Signal.NEXT, None

        if kind is BlockKind.IF:
            cond = block.attr("cond")
            if not isinstance(cond, Expr):
                self.fault("if condition is missing")
            split = block.attr("else_index")
            if split is None:
                split = len(block.children)
            if self.truthy(self.eval(cond)):
                return self.exec_body(block.children[:split])
            return self.exec_body(block.children[split:])

        if kind is BlockKind.SWITCH:
            return self.exec_switch(block)

        if kind is BlockKind.FOR_LOOP:
            return self.exec_for(block)

        if kind is BlockKind.WHILE_LOOP:
            cond = block.attr("cond")
            if not isinstance(cond, Expr):
                self.fault("while condition is missing")
            first = True
            while True:
                if not first:
                    self.tick()
                first = False
                if not self.truthy(self.eval(cond)):
                    return _Signal.NEXT, None
                signal, value = self.exec_body(block.children)
                if signal is _Signal.BREAK:
                    return _Signal.NEXT, None
                if signal is _Signal.RETURN:
                    return signal, value

        if kind is BlockKind.DO_WHILE_LOOP:
            cond = block.attr("cond")
            if not isinstance(cond, Expr):
                self.fault("do-while condition is missing")
            first = True
            while True:
                if not first:
                    self.tick()
                first = False
                signal, value = self.exec_body(block.children)
                if signal is _Signal.BREAK:
                    return _Signal.NEXT, None
                if signal is _Signal.RETURN:
                    return signal, value
                if not self.truthy(self.eval(cond)):
                    return _Signal.NEXT, None

        if kind is BlockKind.FUNCTION_DEF or kind is BlockKind.STRUCT_DEF \
                or kind is BlockKind.PREPROCESSOR:
            return _Signal.NEXT, None

        if kind is BlockKind.FUNCTION_CALL:
            callee = block.attr("callee")
            if not callee:
                self.fault("call has no callee")
            args = [self.eval(a) for a in block.attr("args", ()) or ()]
            self.call_function(callee, args)
            return _Signal.NEXT, None

        if kind is BlockKind.RETURN:
            value_expr = block.attr("value")
            value = self.eval(value_expr) if isinstance(value_expr, Expr) else None
            return _Signal.RETURN, value

        if kind is BlockKind.FILE_OP:
            self.exec_file_op(block)
            return _Signal.NEXT, None

        if kind is BlockKind.MEM_ALLOC:
            target = block.attr("target")
            count_expr = block.attr("count")
            if not isinstance(target, Expr) or not isinstance(count_expr, Expr):
                self.fault("allocation is incomplete")
            count = self.to_int(self.eval(count_expr))
            if count < 0:
                self.fault("allocation size is negative")
            place = self.lvalue(target)
            elem = INT
            if isinstance(place, _Pointer) and place.block.elem_type.kind is TypeKind.POINTER:
                elem = place.block.elem_type.elem
            heap_block = _MemBlock(count, elem, heap=True, label="heap")
            self.store(place, _Pointer(heap_block, 0))
            return _Signal.NEXT, None

        if kind is BlockKind.MEM_FREE:
            target = block.attr("target")
            if not isinstance(target, Expr):
                self.fault("free target is missing")
            value = self.eval(target)
            if value is None:
                self.fault("free of a null pointer")
            if not isinstance(value, _Pointer) or not value.block.heap:
                self.fault("free of memory that was not allocated")
            if value.offset != 0:
                self.fault("free of a pointer into the middle of an allocation")
            if value.block.freed:
                self.fault("double free")
            value.block.freed = True
            return _Signal.NEXT, None

        if kind is BlockKind.OUTPUT:
            fmt = block.attr("format")
            if fmt is None:
                self.fault("output has no format text")
            args = [self.eval(a) for a in block.attr("args", ()) or ()]
            self.emit(self.render_format(fmt, args))
            return _Signal.NEXT, None

        if kind is BlockKind.INPUT:
            target = block.attr("target")
            if not isinstance(target, Expr):
                self.fault("input target is missing")
            place = self.lvalue(target)
            if not isinstance(place, _Pointer):
                self.fault("cannot read input into a struct member")
            token = self.next_stdin_token()
            self.store(place, self.parse_token(token, place.block.elem_type))
            return _Signal.NEXT, None

        if kind is BlockKind.BREAK:
            return _Signal.BREAK, None
        if kind is BlockKind.CONTINUE:
            return _Signal.CONTINUE, None
        self.fault(f"cannot execute block kind {kind.value!r}")

    def exec_for(self, block: Block) -> tuple:
        var = block.attr("var")
        init = block.attr("init")
        cond = block.attr("cond")
        step = block.attr("step")
        if not var or not isinstance(init, Expr) or not isinstance(cond, Expr) \
                or not isinstance(step, Expr):
            self.fault("for loop is incomplete")
        slot = self.find_slot(var)
        if slot is None:
            self.fault(f"loop variable {var!r} used before its declaration")
        place = _Pointer(slot, 0)
        self.write_cell(place, self.eval(init))
        first = True
        while True:
            if not first:
                self.tick()
            first = False
            if not self.truthy(self.eval(cond)):
                return _Signal.NEXT, None
            signal, value = self.exec_body(block.children)
            if signal is _Signal.BREAK:
                return _Signal.NEXT, None
            if signal is _Signal.RETURN:
                return signal, value
            self.write_cell(place, self.eval(step))

    def exec_switch(self, block: Block) -> tuple:
        value_expr = block.attr("value")
        if not isinstance(value_expr, Expr):
            self.fault("switch value is missing")
        value = self.to_int(self.eval(value_expr))
        cases = block.attr("cases", ()) or ()
        start = None
        default = None
        for case in cases:
            if case.label is None:
                default = case.at
            elif case.label == value and start is None:
                start = case.at
        if start is None:
            start = default
        if start is None:
            return _Signal.NEXT, None
        if start > len(block.children):
            self.fault("case position points past the switch body")
        for child in block.children[start:]:
            signal, result = self.exec_block(child)
            if signal is _Signal.BREAK:
                return _Signal.NEXT, None
            if signal is not _Signal.NEXT:
                return signal, result
        return _Signal.NEXT, None

    # -- effects ----------------------------------------------------------

    def exec_file_op(self, block: Block) -> None:
        op = block.attr("op")
        handle = block.attr("handle")
        if not op:
            self.fault("file operation has no op")
        if not handle:
            self.fault("file operation has no handle")
        slot = self.find_slot(handle)
        if slot is None:
            self.fault(f"file handle {handle!r} used before its declaration")

        if op == "open":
            filename_expr = block.attr("filename")
            mode = block.attr("mode")
            if not isinstance(filename_expr, Expr):
                self.fault("file open has no filename")
            if mode not in ("r", "w", "a"):
                self.fault("file open mode must be r, w or a")
            filename = self.eval(filename_expr)
            if not isinstance(filename, str) or len(filename) == 0:
                self.fault("file name must be a string")
            if mode == "r":
                if filename not in self.virtual_files:
                    self.fault(f"no virtual file named {filename!r}")
            elif mode == "w":
                self.virtual_files[filename] = ""
            else:
                self.virtual_files.setdefault(filename, "")
            slot.cells[0] = _FileState(filename, mode)
            return

        state = slot.cells[0]
        if not isinstance(state, _FileState) or state.closed:
            self.fault(f"file handle {handle!r} is not open")

        if op == "close":
            state.closed = True
            slot.cells[0] = None
            return
        if op == "write":
            if state.mode not in ("w", "a"):
                self.fault("file is not open for writing")
            value_expr = block.attr("value")
            if not isinstance(value_expr, Expr):
                self.fault("file write has no value")
            self.virtual_files[state.name] += self.format_value(self.eval(value_expr))
            return
        if op == "read":
            if state.mode != "r":
                self.fault("file is not open for reading")
            target = block.attr("target")
            if not isinstance(target, Expr):
                self.fault("file read has no target")
            content = self.virtual_files.get(state.name, "")
            while state.cursor < len(content) and content[state.cursor].isspace():
                state.cursor += 1
            start = state.cursor
            while state.cursor < len(content) and not content[state.cursor].isspace():
                state.cursor += 1
            token = content[start:state.cursor]
            if not token:
                self.fault("read past end of file")
            place = self.lvalue(target)
            if not isinstance(place, _Pointer):
                self.fault("cannot read a file token into a struct member")
            self.store(place, self.parse_token(token, place.block.elem_type))
            return
        self.fault(f"unknown file operation {op!r}")

    def next_stdin_token(self) -> str:
        if self.stdin_pos >= len(self.stdin):
            self.fault("input script exhausted")
        token = self.stdin[self.stdin_pos]
        self.stdin_pos += 1
        return token

    def parse_token(self, token: str, target: DataType):
        try:
            if target.kind is TypeKind.INT:
                return int(token.strip())
            if target.kind is TypeKind.FLOAT:
                return float(token.strip())
            if target.kind is TypeKind.CHAR:
                if not token:
                    raise ValueError
                return token[0]
        except ValueError:
            self.fault(f"cannot convert input {token!r} to {target.kind.value}")
        self.fault(f"cannot read into a {target.kind.value} value")

    def format_value(self, value) -> str:
        if value is None:
            return "(null)"
        if isinstance(value, bool):
            return str(int(value))
        if isinstance(value, float):
            return repr(value)
        if isinstance(value, _Pointer):
            return f"<ptr+{value.offset}>"
        if isinstance(value, str):
            return value
        return str(value)

    def render_format(self, fmt: str, args: list) -> str:
        out: list[str] = []
        arg_index = 0
        i = 0
        while i < len(fmt):
            ch = fmt[i]
            if ch != "%":
                out.append(ch)
                i += 1
                continue
            if i + 1 >= len(fmt):
                self.fault("format string ends with a bare '%'")
            spec = fmt[i + 1]
            i += 2
            if spec == "%":
                out.append("%")
                continue
            if arg_index >= len(args):
                self.fault("format string wants more arguments than provided")
            value = args[arg_index]
            arg_index += 1
            if spec == "d":
                out.append(str(self.to_int(value)))
            elif spec == "f":
                out.append(repr(self.to_float(value)))
            elif spec == "c":
                if isinstance(value, str) and len(value) == 1:
                    out.append(value)
                else:
                    out.append(chr(self.to_int(value) % 0x110000))
            elif spec == "s":
                if not isinstance(value, str):
                    self.fault("%s needs a string value")
                out.append(value)
            else:
                self.fault(f"unsupported format specifier %{spec}")
        if arg_index < len(args):
            self.fault("format string received more arguments than it uses")
        return "".join(out)


def run(program: Program, limits: RunLimits | None = None) -> RuntimeOutcome:
    """Execute a program under the given limits.

    Raises InvalidProgram when the program fails validation or type
    checking; every other failure mode is captured in the outcome.
    """
    limits = limits or RunLimits()
    report = validate_program(program, None)
    issues = check_program(program)
    if not report.ok or issues:
        raise InvalidProgram(report.defects, issues)

    machine = _Machine(program, limits)
    try:
        machine.run_main()
        status, message = RunStatus.COMPLETED, None
    except _StepLimit:
        status, message = RunStatus.STEP_LIMIT_EXCEEDED, None
    except _RuntimeFault as fault:
        status, message = RunStatus.RUNTIME_ERROR, fault.message
    except RecursionError:
        status, message = RunStatus.RUNTIME_ERROR, "call depth exceeded"
    return RuntimeOutcome(
        status=status,
        stdout=bytes(machine.stdout),
        steps_used=machine.steps_used,
        virtual_files=dict(machine.virtual_files),
        error_message=message,
        error_block_id=machine.current_block_id if status is RunStatus.RUNTIME_ERROR else None,
    )


@dataclass(frozen=True)
class OutputMatch:
    equal: bool
    first_mismatch_offset: int | None = None
    expected_context: bytes = b""
    actual_context: bytes = b""


def compare_output(outcome: RuntimeOutcome, expected_stdout) -> OutputMatch:
    """Byte-exact comparison with a context window around the first difference."""
    if isinstance(expected_stdout, str):
        expected = expected_stdout.encode("utf-8")
    else:
        expected = bytes(expected_stdout)
    actual = outcome.stdout
    if actual == expected:
        return OutputMatch(equal=True)
    limit = min(len(actual), len(expected))
    offset = limit  # differ by length if no byte differs
    for i in range(limit):
        if actual[i] != expected[i]:
            offset = i
            break
    lo = max(0, offset - 16)
    hi = offset + 16
    return OutputMatch(
        equal=False,
        first_mismatch_offset=offset,
        expected_context=expected[lo:hi],
        actual_context=actual[lo:hi],
    )
