"""Knowledge base types: constraints as relevance/satisfaction pairs.

A constraint applies whenever its relevance pattern matches a solution
state (node bindings plus exercise requirement tags).  Wherever it
applies, its satisfaction predicate must hold; a failing binding is a
violation worth feedback.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class RuleCategory(str, Enum):
    SOLUTION_METHODS = "solution_methods"
    MISSING_REFERENCES = "missing_references"
    POINTER = "pointer"
    MEMORY = "memory"
    FILE = "file"
    FUNCTIONS = "functions"
    DATA_TYPES = "data_types"
    SYNTAX = "syntax"


ATTR_PRED_OPS = (
    "exists", "absent", "equals", "not-equals", "in",
    "type-kind", "uses-deref", "uses-address-of", "uses-index", "uses-call",
)

PREDICATE_TYPES = (
    "exists-node", "count-at-least", "type-equals", "type-kind-is",
    "attribute-equals", "attribute-exists", "attribute-matches",
    "valid-expression", "declared-before-use",
    "call-target-defined", "call-arity-matches",
    "not", "all", "any",
)


@dataclass(frozen=True)
class AttrPred:
    attr: str
    op: str
    value: object = None


@dataclass(frozen=True)
class NodeMatcher:
    bind: str
    kinds: frozenset | None = None  # None = any kind
    where: tuple[AttrPred, ...] = ()


@dataclass(frozen=True)
class RelevancePattern:
    node_matchers: tuple[NodeMatcher, ...] = ()
    tag_requirements: frozenset = frozenset()

    def binding_names(self) -> tuple[str, ...]:
        return tuple(m.bind for m in self.node_matchers)


@dataclass(frozen=True)
class Pred:
    """One node of a satisfaction predicate tree."""

    type: str
    kinds: frozenset | None = None
    n: int | None = None
    within: str | None = None
    before: str | None = None
    where: tuple[AttrPred, ...] = ()
    binding: str | None = None
    attr: str | None = None
    value: object = None
    pattern: str | None = None
    left: tuple[str, str] | None = None
    right: tuple[str, str] | None = None
    kind: str | None = None
    args: tuple["Pred", ...] = ()

    def referenced_bindings(self):
        if self.binding:
            yield self.binding
        if self.within:
            yield self.within
        if self.before:
            yield self.before
        for side in (self.left, self.right):
            if side:
                yield side[0]
        for arg in self.args:
            yield from arg.referenced_bindings()


@dataclass(frozen=True)
class FeedbackTemplates:
    elaborated: str
    correct_response: str | None = None
    adapted: dict = field(default_factory=dict)  # tier name -> template text


@dataclass(frozen=True)
class Constraint:
    id: str
    category: RuleCategory
    relevance: RelevancePattern
    satisfaction: Pred
    feedback: FeedbackTemplates
    enabled: bool = True


@dataclass(frozen=True)
class KnowledgeBase:
    constraints: tuple[Constraint, ...] = ()  # always sorted by id
    tag_vocabulary: frozenset = frozenset()
    version: str = "0"

    def by_id(self, constraint_id: str) -> Constraint | None:
        for constraint in self.constraints:
            if constraint.id == constraint_id:
                return constraint
        return None

    def __len__(self) -> int:
        return len(self.constraints)


@dataclass(frozen=True)
class Violation:
    constraint_id: str
    category: RuleCategory
    bindings: dict  # binding name -> block id
    explanation_data: dict = field(default_factory=dict)

    def key(self):
        return (self.constraint_id, tuple(self.bindings.values()))
