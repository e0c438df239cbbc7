"""Structural validation of programs against workspace legality rules.

Defects are data, not exceptions: an authoring tool and the submission
pipeline both want the full list, not the first failure.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum

from .nodes import (
    CONTROL_KINDS,
    MAX_EXPR_DEPTH,
    MAX_POINTER_DEPTH,
    Block,
    BlockKind,
    DataType,
    Program,
    TypeKind,
    TypedName,
    block_expressions,
    expr_depth,
    iter_blocks,
)
from .templates import TemplateRegistry, default_registry


class DefectKind(str, Enum):
    MISSING_ENTRY_FUNCTION = "missing_entry_function"
    DUPLICATE_ENTRY_FUNCTION = "duplicate_entry_function"
    DUPLICATE_ID = "duplicate_id"
    UNKNOWN_TEMPLATE = "unknown_template"
    TEMPLATE_KIND_MISMATCH = "template_kind_mismatch"
    DISALLOWED_LAYER = "disallowed_layer"
    ILLEGAL_CHILDREN = "illegal_children"
    POINTER_DEPTH_EXCEEDED = "pointer_depth_exceeded"
    UNRESOLVED_STRUCT_REF = "unresolved_struct_ref"
    EXPRESSION_TOO_DEEP = "expression_too_deep"


@dataclass(frozen=True)
class Defect:
    kind: DefectKind
    block_id: str | None
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    defects: tuple[Defect, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.defects

    def kinds(self) -> set[DefectKind]:
        return {d.kind for d in self.defects}

    def __iter__(self):
        return iter(self.defects)

    def __len__(self) -> int:
        return len(self.defects)


def _walk_types(value):
    """Yield every DataType reachable from an attribute value."""
    if isinstance(value, DataType):
        yield value
        if value.elem is not None:
            yield from _walk_types(value.elem)
    elif isinstance(value, TypedName):
        yield from _walk_types(value.data_type)
    elif isinstance(value, tuple):
        for item in value:
            yield from _walk_types(item)


def validate_program(
    program: Program,
    allowed_layers,
    registry: TemplateRegistry | None = None,
) -> ValidationReport:
    """Check every structural invariant; returns all defects found.

    ``allowed_layers`` is a set of template names the exercise permits, or
    None to allow every registered template.
    """
    registry = registry or default_registry()
    allowed = None if allowed_layers is None else set(allowed_layers)
    defects: list[Defect] = []
    blocks = list(iter_blocks(program.blocks))

    entries = [b for b in blocks
               if b.kind is BlockKind.FUNCTION_DEF and b.attr("name") == program.entry_function]
    if not entries:
        defects.append(Defect(DefectKind.MISSING_ENTRY_FUNCTION, None,
                              f"no function named {program.entry_function!r}"))
    elif len(entries) > 1:
        ids = ", ".join(b.id for b in entries)
        defects.append(Defect(DefectKind.DUPLICATE_ENTRY_FUNCTION, entries[1].id,
                              f"{len(entries)} functions named {program.entry_function!r}: {ids}"))

    id_counts = Counter(b.id for b in blocks)
    for block_id, count in id_counts.items():
        if count > 1:
            defects.append(Defect(DefectKind.DUPLICATE_ID, block_id,
                                  f"{count} blocks share id {block_id!r}"))

    for block in blocks:
        template_name = block.layer.template_name if block.layer else None
        if template_name is None:
            template = registry.template_for_kind(block.kind)
            template_name = template.name
        else:
            template = registry.get(template_name)
            if template is None:
                defects.append(Defect(DefectKind.UNKNOWN_TEMPLATE, block.id,
                                      f"template {template_name!r} is not registered"))
                continue
        if block.kind not in template.binds_block_kinds:
            defects.append(Defect(DefectKind.TEMPLATE_KIND_MISMATCH, block.id,
                                  f"template {template_name!r} does not bind {block.kind.value}"))
        if allowed is not None and template_name not in allowed:
            defects.append(Defect(DefectKind.DISALLOWED_LAYER, block.id,
                                  f"layer {template_name!r} is not allowed for this exercise"))

        if block.children and block.kind not in CONTROL_KINDS:
            defects.append(Defect(DefectKind.ILLEGAL_CHILDREN, block.id,
                                  f"{block.kind.value} blocks cannot contain children"))

        for value in block.attrs.values():
            for data_type in _walk_types(value):
                if data_type.pointer_depth() > MAX_POINTER_DEPTH:
                    defects.append(Defect(DefectKind.POINTER_DEPTH_EXCEEDED, block.id,
                                          f"pointer nesting exceeds {MAX_POINTER_DEPTH}"))
                if data_type.kind is TypeKind.STRUCT and data_type.struct_name not in program.struct_defs:
                    defects.append(Defect(DefectKind.UNRESOLVED_STRUCT_REF, block.id,
                                          f"struct {data_type.struct_name!r} is not defined"))

        for attr_name, expr in block_expressions(block):
            if expr_depth(expr) > MAX_EXPR_DEPTH:
                defects.append(Defect(DefectKind.EXPRESSION_TOO_DEEP, block.id,
                                      f"expression in {attr_name!r} deeper than {MAX_EXPR_DEPTH}"))

    return ValidationReport(tuple(defects))
