"""Workspace templates: the typed layer catalog behind the block palette.

Every block kind has exactly one built-in template; custom templates (e.g.
algorithm skeletons a course ships) can be registered on top of the
built-ins.  A template's layer class separates primitive statements
(basic) from control structures and algorithm-level blocks (advanced).
"""
from __future__ import annotations

from dataclasses import dataclass

from .nodes import BlockKind, LayerClass, LayerTag


class DuplicateTemplate(Exception):
    def __init__(self, name: str):
        super().__init__(f"template {name!r} is already registered")
        self.name = name


class UnknownTemplate(Exception):
    def __init__(self, name: str):
        super().__init__(f"no template named {name!r}")
        self.name = name


@dataclass(frozen=True)
class Template:
    name: str
    layer_class: LayerClass
    required_fields: tuple[tuple[str, str], ...]  # (field name, semantic type)
    binds_block_kinds: frozenset

    def __post_init__(self) -> None:
        names = [f for f, _ in self.required_fields]
        if len(names) != len(set(names)):
            raise ValueError(f"template {self.name!r} repeats a required field")


_B = LayerClass.BASIC
_A = LayerClass.ADVANCED

_BUILTINS = [
    Template("declaration", _B, (("name", "identifier"), ("data_type", "type")),
             frozenset({BlockKind.DECLARATION})),
    Template("assignment", _B, (("target", "expression"), ("value", "expression")),
             frozenset({BlockKind.ASSIGNMENT})),
    Template("preprocessor", _B, (("directive", "text"),),
             frozenset({BlockKind.PREPROCESSOR})),
    Template("printf_call", _B, (("format", "text"),),
             frozenset({BlockKind.OUTPUT})),
    Template("scanf_call", _B, (("target", "expression"),),
             frozenset({BlockKind.INPUT})),
    Template("function_call", _B, (("callee", "identifier"),),
             frozenset({BlockKind.FUNCTION_CALL})),
    Template("return_statement", _B, (), frozenset({BlockKind.RETURN})),
    Template("break_statement", _B, (), frozenset({BlockKind.BREAK})),
    Template("continue_statement", _B, (), frozenset({BlockKind.CONTINUE})),
    Template("if_statement", _A, (("cond", "expression"),),
             frozenset({BlockKind.IF})),
    Template("switch_statement", _A, (("value", "expression"), ("cases", "case table")),
             frozenset({BlockKind.SWITCH})),
    Template("for_loop", _A,
             (("var", "identifier"), ("init", "expression"),
              ("cond", "expression"), ("step", "expression")),
             frozenset({BlockKind.FOR_LOOP})),
    Template("while_loop", _A, (("cond", "expression"),),
             frozenset({BlockKind.WHILE_LOOP})),
    Template("do_while_loop", _A, (("cond", "expression"),),
             frozenset({BlockKind.DO_WHILE_LOOP})),
    Template("function_def", _A,
             (("name", "identifier"), ("return_type", "type"), ("params", "parameter list")),
             frozenset({BlockKind.FUNCTION_DEF})),
    Template("struct_def", _A, (("name", "identifier"), ("fields", "field list")),
             frozenset({BlockKind.STRUCT_DEF})),
    Template("file_op", _A, (("op", "file operation"),),
             frozenset({BlockKind.FILE_OP})),
    Template("mem_alloc", _A, (("target", "expression"), ("count", "expression")),
             frozenset({BlockKind.MEM_ALLOC})),
    Template("mem_free", _A, (("target", "expression"),),
             frozenset({BlockKind.MEM_FREE})),
]


class TemplateRegistry:
    """Name-indexed template catalog, built once at startup and then read-only."""

    def __init__(self, include_builtins: bool = True):
        self._by_name: dict[str, Template] = {}
        self._default_for_kind: dict[BlockKind, Template] = {}
        if include_builtins:
            for template in _BUILTINS:
                self._by_name[template.name] = template
                for kind in template.binds_block_kinds:
                    self._default_for_kind[kind] = template

    def register(self, template: Template) -> "TemplateRegistry":
        if template.name in self._by_name:
            raise DuplicateTemplate(template.name)
        self._by_name[template.name] = template
        return self

    def lookup(self, name: str) -> Template:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownTemplate(name) from None

    def get(self, name: str) -> Template | None:
        return self._by_name.get(name)

    def template_for_kind(self, kind: BlockKind) -> Template:
        return self._default_for_kind[kind]

    def names(self) -> list[str]:
        return sorted(self._by_name)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __len__(self) -> int:
        return len(self._by_name)


def register_template(registry: TemplateRegistry, template: Template) -> TemplateRegistry:
    """Add a template to the registry; raises DuplicateTemplate on a name clash."""
    return registry.register(template)


def default_registry() -> TemplateRegistry:
    return TemplateRegistry(include_builtins=True)


def layer_for_block(block, registry: TemplateRegistry) -> LayerTag:
    """The effective layer tag of a block: explicit tag or its kind's built-in."""
    if block.layer is not None:
        return block.layer
    template = registry.template_for_kind(block.kind)
    return LayerTag(template.layer_class, template.name)
