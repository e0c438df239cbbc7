"""Reading and writing solution documents (`.sol.json`).

A solution is a JSON tree::

    {"blocks": [{"id": "...", "kind": "...", "attrs": {...}, "children": [...]}, ...]}

Field names are fixed; unknown fields and unknown attribute names are
rejected so authoring typos surface immediately.  Expression attributes
are strings in the document and parsed ``Expr`` trees in memory; data
types use the compact notation of :mod:`blocktutor.codec.typenotation`.
Serialization is canonical: two serializations of equal programs are
byte-identical, and parse(serialize(p)) reproduces p exactly.
"""
from __future__ import annotations

import json
from enum import Enum

from ..model.nodes import (
    Block,
    BlockKind,
    CaseLabel,
    DataType,
    Expr,
    LayerClass,
    LayerTag,
    Program,
    TypedName,
)
from ..model.templates import TemplateRegistry, default_registry
from .errors import DocumentSyntaxError, ExpressionParseError, UnknownBlockKind
from .expr import ExprSyntaxError, parse_expression, print_expression
from .typenotation import TypeNotationError, parse_type, print_type


class AttrType(Enum):
    EXPR = "expr"
    EXPR_LIST = "expr_list"
    TYPE = "type"
    IDENT = "ident"
    TEXT = "text"
    INT = "int"
    TYPED_NAMES = "typed_names"  # [{"name": ..., "data_type": ...}]
    CASES = "cases"              # [{"label": int | "default", "at": int}]


ATTR_SCHEMA: dict[BlockKind, dict[str, AttrType]] = {
    BlockKind.DECLARATION: {"name": AttrType.IDENT, "data_type": AttrType.TYPE,
                            "init": AttrType.EXPR},
    BlockKind.ASSIGNMENT: {"target": AttrType.EXPR, "value": AttrType.EXPR},
    BlockKind.IF: {"cond": AttrType.EXPR, "else_index": AttrType.INT},
    BlockKind.SWITCH: {"value": AttrType.EXPR, "cases": AttrType.CASES},
    BlockKind.FOR_LOOP: {"var": AttrType.IDENT, "init": AttrType.EXPR,
                         "cond": AttrType.EXPR, "step": AttrType.EXPR},
    BlockKind.WHILE_LOOP: {"cond": AttrType.EXPR},
    BlockKind.DO_WHILE_LOOP: {"cond": AttrType.EXPR},
    BlockKind.FUNCTION_DEF: {"name": AttrType.IDENT, "return_type": AttrType.TYPE,
                             "params": AttrType.TYPED_NAMES},
    BlockKind.FUNCTION_CALL: {"callee": AttrType.IDENT, "args": AttrType.EXPR_LIST},
    BlockKind.RETURN: {"value": AttrType.EXPR},
    BlockKind.PREPROCESSOR: {"directive": AttrType.TEXT},
    BlockKind.STRUCT_DEF: {"name": AttrType.IDENT, "fields": AttrType.TYPED_NAMES},
    BlockKind.FILE_OP: {"op": AttrType.TEXT, "handle": AttrType.IDENT,
                        "filename": AttrType.EXPR, "mode": AttrType.TEXT,
                        "value": AttrType.EXPR, "target": AttrType.EXPR},
    BlockKind.MEM_ALLOC: {"target": AttrType.EXPR, "count": AttrType.EXPR},
    BlockKind.MEM_FREE: {"target": AttrType.EXPR},
    BlockKind.OUTPUT: {"format": AttrType.TEXT, "args": AttrType.EXPR_LIST},
    BlockKind.INPUT: {"target": AttrType.EXPR},
    BlockKind.BREAK: {},
    BlockKind.CONTINUE: {},
}

FILE_OPS = ("open", "read", "write", "close")


def _parse_expr_attr(block_id: str, attr: str, raw) -> Expr | None:
    if not isinstance(raw, str):
        raise DocumentSyntaxError(f"attribute {attr!r} must be an expression string",
                                  path=f"block {block_id!r}")
    if not raw.strip():
        return None
    try:
        return parse_expression(raw)
    except ExprSyntaxError as exc:
        raise ExpressionParseError(block_id, f"in {attr!r}: {exc}") from exc


def _parse_attrs(block_id: str, kind: BlockKind, raw_attrs) -> tuple[dict, LayerTag | None]:
    if not isinstance(raw_attrs, dict):
        raise DocumentSyntaxError("attrs must be an object", path=f"block {block_id!r}")
    schema = ATTR_SCHEMA[kind]
    attrs: dict = {}
    layer_name = None

    for name, raw in raw_attrs.items():
        if name == "template":
            if not isinstance(raw, str) or not raw:
                raise DocumentSyntaxError("template attribute must be a template name",
                                          path=f"block {block_id!r}")
            layer_name = raw
            continue
        if name not in schema:
            raise DocumentSyntaxError(
                f"unknown attribute {name!r} for block kind {kind.value!r}",
                path=f"block {block_id!r}")
        attr_type = schema[name]
        if attr_type is AttrType.EXPR:
            parsed = _parse_expr_attr(block_id, name, raw)
            if parsed is not None:
                attrs[name] = parsed
        elif attr_type is AttrType.EXPR_LIST:
            if not isinstance(raw, list):
                raise DocumentSyntaxError(f"attribute {name!r} must be a list of expressions",
                                          path=f"block {block_id!r}")
            parsed_list = []
            for item in raw:
                parsed = _parse_expr_attr(block_id, name, item)
                if parsed is None:
                    raise ExpressionParseError(block_id, f"in {name!r}: empty expression")
                parsed_list.append(parsed)
            attrs[name] = tuple(parsed_list)
        elif attr_type is AttrType.TYPE:
            if not isinstance(raw, str):
                raise DocumentSyntaxError(f"attribute {name!r} must be a type string",
                                          path=f"block {block_id!r}")
            try:
                attrs[name] = parse_type(raw)
            except TypeNotationError as exc:
                raise DocumentSyntaxError(str(exc), path=f"block {block_id!r}") from exc
        elif attr_type in (AttrType.IDENT, AttrType.TEXT):
            if not isinstance(raw, str):
                raise DocumentSyntaxError(f"attribute {name!r} must be a string",
                                          path=f"block {block_id!r}")
            if raw:
                attrs[name] = raw
        elif attr_type is AttrType.INT:
            if not isinstance(raw, int) or isinstance(raw, bool) or raw < 0:
                raise DocumentSyntaxError(f"attribute {name!r} must be a non-negative integer",
                                          path=f"block {block_id!r}")
            attrs[name] = raw
        elif attr_type is AttrType.TYPED_NAMES:
            attrs[name] = _parse_typed_names(block_id, name, raw)
        elif attr_type is AttrType.CASES:
            attrs[name] = _parse_cases(block_id, raw)

    if kind is BlockKind.FILE_OP and "op" in attrs and attrs["op"] not in FILE_OPS:
        raise DocumentSyntaxError(
            f"file operation must be one of {', '.join(FILE_OPS)}",
            path=f"block {block_id!r}")
    return attrs, layer_name


def _parse_typed_names(block_id: str, attr: str, raw) -> tuple[TypedName, ...]:
    if not isinstance(raw, list):
        raise DocumentSyntaxError(f"attribute {attr!r} must be a list",
                                  path=f"block {block_id!r}")
    items = []
    for entry in raw:
        if (not isinstance(entry, dict) or set(entry) != {"name", "data_type"}
                or not isinstance(entry["name"], str)
                or not isinstance(entry["data_type"], str)):
            raise DocumentSyntaxError(
                f"entries of {attr!r} must be {{\"name\", \"data_type\"}} objects",
                path=f"block {block_id!r}")
        try:
            items.append(TypedName(entry["name"], parse_type(entry["data_type"])))
        except TypeNotationError as exc:
            raise DocumentSyntaxError(str(exc), path=f"block {block_id!r}") from exc
    return tuple(items)


def _parse_cases(block_id: str, raw) -> tuple[CaseLabel, ...]:
    if not isinstance(raw, list):
        raise DocumentSyntaxError("attribute 'cases' must be a list",
                                  path=f"block {block_id!r}")
    cases = []
    for entry in raw:
        if not isinstance(entry, dict) or set(entry) != {"label", "at"}:
            raise DocumentSyntaxError(
                "case entries must be {\"label\", \"at\"} objects",
                path=f"block {block_id!r}")
        label = entry["label"]
        at = entry["at"]
        if label != "default" and (not isinstance(label, int) or isinstance(label, bool)):
            raise DocumentSyntaxError("case label must be an integer or \"default\"",
                                      path=f"block {block_id!r}")
        if not isinstance(at, int) or isinstance(at, bool) or at < 0:
            raise DocumentSyntaxError("case position must be a non-negative integer",
                                      path=f"block {block_id!r}")
        cases.append(CaseLabel(None if label == "default" else label, at))
    return tuple(cases)


def _parse_block(raw, registry: TemplateRegistry, depth: int = 0) -> Block:
    if not isinstance(raw, dict):
        raise DocumentSyntaxError("block must be an object")
    if depth > 128:
        raise DocumentSyntaxError("block nesting too deep")
    unknown = set(raw) - {"id", "kind", "attrs", "children"}
    if unknown:
        raise DocumentSyntaxError(f"unknown block fields: {', '.join(sorted(unknown))}")
    block_id = raw.get("id")
    if not isinstance(block_id, str) or not block_id:
        raise DocumentSyntaxError("block id must be a non-empty string")
    kind_name = raw.get("kind")
    if not isinstance(kind_name, str):
        raise DocumentSyntaxError("block kind must be a string", path=f"block {block_id!r}")
    try:
        kind = BlockKind(kind_name)
    except ValueError:
        raise UnknownBlockKind(kind_name, block_id) from None

    attrs, layer_name = _parse_attrs(block_id, kind, raw.get("attrs", {}))
    layer = None
    if layer_name is not None:
        template = registry.get(layer_name)
        # Unregistered template names survive parsing; validation reports them.
        layer_class = template.layer_class if template else LayerClass.ADVANCED
        layer = LayerTag(layer_class, layer_name)

    raw_children = raw.get("children", [])
    if not isinstance(raw_children, list):
        raise DocumentSyntaxError("children must be a list", path=f"block {block_id!r}")
    children = tuple(_parse_block(child, registry, depth + 1) for child in raw_children)
    return Block(id=block_id, kind=kind, attrs=attrs, children=children, layer=layer)


def parse_solution(text: str, registry: TemplateRegistry | None = None) -> Program:
    """Parse a solution document into a Program.

    A blank document is the canonical empty program.  Malformed JSON and
    structural problems raise DocumentSyntaxError; bad embedded
    expressions raise ExpressionParseError.
    """
    registry = registry or default_registry()
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentSyntaxError(f"document is not valid UTF-8: {exc}") from exc
    if not text.strip():
        return Program.from_blocks(())
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentSyntaxError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    if not isinstance(data, dict):
        raise DocumentSyntaxError("document root must be an object")
    unknown = set(data) - {"blocks"}
    if unknown:
        raise DocumentSyntaxError(f"unknown document fields: {', '.join(sorted(unknown))}")
    raw_blocks = data.get("blocks", [])
    if not isinstance(raw_blocks, list):
        raise DocumentSyntaxError("\"blocks\" must be a list")
    blocks = tuple(_parse_block(raw, registry) for raw in raw_blocks)
    return Program.from_blocks(blocks)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _attr_to_json(value):
    if isinstance(value, Expr):
        return print_expression(value)
    if isinstance(value, DataType):
        return print_type(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], TypedName):
            return [{"name": tn.name, "data_type": print_type(tn.data_type)} for tn in value]
        if value and isinstance(value[0], CaseLabel):
            return [{"label": "default" if c.label is None else c.label, "at": c.at}
                    for c in value]
        if all(isinstance(v, Expr) for v in value):
            return [print_expression(v) for v in value]
        return list(value)
    return value


def _block_to_json(block: Block) -> dict:
    attrs = {name: _attr_to_json(value) for name, value in sorted(block.attrs.items())}
    if block.layer is not None:
        attrs["template"] = block.layer.template_name
        attrs = dict(sorted(attrs.items()))
    return {
        "id": block.id,
        "kind": block.kind.value,
        "attrs": attrs,
        "children": [_block_to_json(child) for child in block.children],
    }


def solution_to_obj(program: Program) -> dict:
    return {"blocks": [_block_to_json(block) for block in program.blocks]}


def serialize_solution(program: Program) -> str:
    """Canonical document text; deterministic for equal programs."""
    return json.dumps(solution_to_obj(program), indent=2, ensure_ascii=False) + "\n"
