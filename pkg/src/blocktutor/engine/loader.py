"""Loading rule documents (`.rules.json`) into a KnowledgeBase.

A rule document::

    {
      "version": "1",
      "tag_vocabulary": ["applies-function-over-range", ...],
      "rules": [
        {"id": "...", "category": "...", "enabled": true,
         "cr": {"tags": [...], "match": [{"bind": "a", "kinds": [...], "where": [...]}]},
         "cs": {"type": "...", ...},
         "feedback": {"elaborated": "...", "correct_response": "...",
                      "adapted": {"novice": "...", "terse": "..."}}}
      ]
    }

Documents merge; duplicate rule ids across documents are rejected.  The
full predicate grammar is documented in docs/rule-language.schema.json.
"""
from __future__ import annotations

import json
import re

from ..model.nodes import BlockKind
from .kb import (
    ATTR_PRED_OPS,
    PREDICATE_TYPES,
    AttrPred,
    Constraint,
    FeedbackTemplates,
    KnowledgeBase,
    NodeMatcher,
    Pred,
    RelevancePattern,
    RuleCategory,
)

ADAPTED_TIERS = ("novice", "standard", "terse")
_TYPE_KINDS = ("int", "float", "char", "void", "pointer", "array", "struct", "file")


class RuleParseError(Exception):
    def __init__(self, doc: str, rule_id: str | None, message: str):
        where = f" (rule {rule_id!r})" if rule_id else ""
        super().__init__(f"{doc}{where}: {message}")
        self.doc = doc
        self.rule_id = rule_id
        self.message = message


class DuplicateRuleId(Exception):
    def __init__(self, rule_id: str):
        super().__init__(f"rule id {rule_id!r} is defined more than once")
        self.rule_id = rule_id


class UnknownCategory(Exception):
    def __init__(self, name: str, rule_id: str | None = None):
        super().__init__(f"unknown rule category {name!r}")
        self.name = name
        self.rule_id = rule_id


class UnboundBindingInCs(Exception):
    def __init__(self, rule_id: str, binding: str):
        super().__init__(
            f"rule {rule_id!r}: satisfaction predicate references binding "
            f"{binding!r} not declared in the relevance pattern")
        self.rule_id = rule_id
        self.binding = binding


def _parse_kinds(raw, doc: str, rule_id: str):
    if raw is None:
        return None
    if not isinstance(raw, list) or not raw:
        raise RuleParseError(doc, rule_id, "'kinds' must be a non-empty list")
    kinds = set()
    for name in raw:
        try:
            kinds.add(BlockKind(name))
        except ValueError:
            raise RuleParseError(doc, rule_id, f"unknown block kind {name!r}") from None
    return frozenset(kinds)


def _parse_attr_pred(raw, doc: str, rule_id: str) -> AttrPred:
    if not isinstance(raw, dict) or "attr" not in raw or "op" not in raw:
        raise RuleParseError(doc, rule_id, "attribute predicate needs 'attr' and 'op'")
    unknown = set(raw) - {"attr", "op", "value"}
    if unknown:
        raise RuleParseError(doc, rule_id,
                             f"unknown attribute predicate fields: {sorted(unknown)}")
    op = raw["op"]
    if op not in ATTR_PRED_OPS:
        raise RuleParseError(doc, rule_id, f"unknown attribute predicate op {op!r}")
    value = raw.get("value")
    if op in ("equals", "not-equals") and value is None:
        raise RuleParseError(doc, rule_id, f"op {op!r} needs a 'value'")
    if op == "in" and not isinstance(value, list):
        raise RuleParseError(doc, rule_id, "op 'in' needs a list 'value'")
    if op == "type-kind" and value not in _TYPE_KINDS:
        raise RuleParseError(doc, rule_id, f"op 'type-kind' needs a type kind, got {value!r}")
    return AttrPred(raw["attr"], op, value if not isinstance(value, list) else tuple(value))


def _parse_matcher(raw, doc: str, rule_id: str) -> NodeMatcher:
    if not isinstance(raw, dict) or "bind" not in raw:
        raise RuleParseError(doc, rule_id, "matcher needs a 'bind' name")
    unknown = set(raw) - {"bind", "kinds", "where"}
    if unknown:
        raise RuleParseError(doc, rule_id, f"unknown matcher fields: {sorted(unknown)}")
    where = tuple(_parse_attr_pred(p, doc, rule_id) for p in raw.get("where", []))
    return NodeMatcher(raw["bind"], _parse_kinds(raw.get("kinds"), doc, rule_id), where)


def _parse_side(raw, name: str, doc: str, rule_id: str):
    if (not isinstance(raw, dict) or set(raw) != {"binding", "attr"}
            or not isinstance(raw.get("binding"), str)
            or not isinstance(raw.get("attr"), str)):
        raise RuleParseError(doc, rule_id,
                             f"{name!r} must be a {{\"binding\", \"attr\"}} object")
    return (raw["binding"], raw["attr"])


def _parse_pred(raw, doc: str, rule_id: str, depth: int = 0) -> Pred:
    if depth > 16:
        raise RuleParseError(doc, rule_id, "predicate nesting too deep")
    if not isinstance(raw, dict) or "type" not in raw:
        raise RuleParseError(doc, rule_id, "predicate needs a 'type'")
    ptype = raw["type"]
    if ptype not in PREDICATE_TYPES:
        raise RuleParseError(doc, rule_id, f"unknown predicate type {ptype!r}")

    if ptype in ("exists-node", "count-at-least"):
        allowed = {"type", "kinds", "within", "before", "where"}
        if ptype == "count-at-least":
            allowed.add("n")
        unknown = set(raw) - allowed
        if unknown:
            raise RuleParseError(doc, rule_id, f"unknown predicate fields: {sorted(unknown)}")
        n = raw.get("n")
        if ptype == "count-at-least" and (not isinstance(n, int) or n < 1):
            raise RuleParseError(doc, rule_id, "'count-at-least' needs n >= 1")
        return Pred(
            type=ptype,
            kinds=_parse_kinds(raw.get("kinds"), doc, rule_id),
            n=n,
            within=raw.get("within"),
            before=raw.get("before"),
            where=tuple(_parse_attr_pred(p, doc, rule_id) for p in raw.get("where", [])),
        )
    if ptype == "type-equals":
        return Pred(type=ptype,
                    left=_parse_side(raw.get("left"), "left", doc, rule_id),
                    right=_parse_side(raw.get("right"), "right", doc, rule_id))
    if ptype == "type-kind-is":
        if raw.get("kind") not in _TYPE_KINDS:
            raise RuleParseError(doc, rule_id, "'type-kind-is' needs a valid 'kind'")
        return Pred(type=ptype, binding=raw.get("binding"), attr=raw.get("attr"),
                    kind=raw["kind"])
    if ptype in ("attribute-equals", "attribute-exists", "attribute-matches",
                 "valid-expression"):
        if not isinstance(raw.get("binding"), str) or not isinstance(raw.get("attr"), str):
            raise RuleParseError(doc, rule_id, f"{ptype!r} needs 'binding' and 'attr'")
        pattern = raw.get("pattern")
        if ptype == "attribute-matches":
            if not isinstance(pattern, str):
                raise RuleParseError(doc, rule_id, "'attribute-matches' needs a 'pattern'")
            try:
                re.compile(pattern)
            except re.error as exc:
                raise RuleParseError(doc, rule_id, f"bad pattern: {exc}") from None
        return Pred(type=ptype, binding=raw["binding"], attr=raw["attr"],
                    value=raw.get("value"), pattern=pattern)
    if ptype in ("declared-before-use", "call-target-defined", "call-arity-matches"):
        if not isinstance(raw.get("binding"), str):
            raise RuleParseError(doc, rule_id, f"{ptype!r} needs a 'binding'")
        return Pred(type=ptype, binding=raw["binding"])
    if ptype == "not":
        return Pred(type=ptype, args=(_parse_pred(raw.get("arg"), doc, rule_id, depth + 1),))
    # all / any
    args = raw.get("args")
    if not isinstance(args, list) or not args:
        raise RuleParseError(doc, rule_id, f"{ptype!r} needs a non-empty 'args' list")
    return Pred(type=ptype,
                args=tuple(_parse_pred(a, doc, rule_id, depth + 1) for a in args))


def _parse_rule(raw, doc: str) -> Constraint:
    if not isinstance(raw, dict):
        raise RuleParseError(doc, None, "rule must be an object")
    rule_id = raw.get("id")
    if not isinstance(rule_id, str) or not rule_id:
        raise RuleParseError(doc, None, "rule needs a non-empty string 'id'")
    unknown = set(raw) - {"id", "category", "enabled", "cr", "cs", "feedback"}
    if unknown:
        raise RuleParseError(doc, rule_id, f"unknown rule fields: {sorted(unknown)}")

    category_name = raw.get("category")
    try:
        category = RuleCategory(category_name)
    except ValueError:
        raise UnknownCategory(category_name, rule_id) from None

    cr_raw = raw.get("cr")
    if not isinstance(cr_raw, dict) or set(cr_raw) - {"tags", "match"}:
        raise RuleParseError(doc, rule_id, "'cr' must be a {\"tags\", \"match\"} object")
    tags = cr_raw.get("tags", [])
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise RuleParseError(doc, rule_id, "'cr.tags' must be a list of strings")
    matchers = tuple(_parse_matcher(m, doc, rule_id) for m in cr_raw.get("match", []))
    names = [m.bind for m in matchers]
    if len(names) != len(set(names)):
        raise RuleParseError(doc, rule_id, "binding names must be unique within a pattern")
    relevance = RelevancePattern(matchers, frozenset(tags))

    satisfaction = _parse_pred(raw.get("cs"), doc, rule_id)
    declared = set(names)
    for binding in satisfaction.referenced_bindings():
        if binding not in declared:
            raise UnboundBindingInCs(rule_id, binding)

    feedback_raw = raw.get("feedback")
    if not isinstance(feedback_raw, dict) or not isinstance(feedback_raw.get("elaborated"), str):
        raise RuleParseError(doc, rule_id,
                             "'feedback' must at least carry an 'elaborated' template")
    unknown = set(feedback_raw) - {"elaborated", "correct_response", "adapted"}
    if unknown:
        raise RuleParseError(doc, rule_id, f"unknown feedback fields: {sorted(unknown)}")
    adapted = feedback_raw.get("adapted", {})
    if not isinstance(adapted, dict) or set(adapted) - set(ADAPTED_TIERS):
        raise RuleParseError(doc, rule_id,
                             f"adapted tiers must be among {ADAPTED_TIERS}")
    feedback = FeedbackTemplates(
        elaborated=feedback_raw["elaborated"],
        correct_response=feedback_raw.get("correct_response"),
        adapted=dict(adapted),
    )

    enabled = raw.get("enabled", True)
    if not isinstance(enabled, bool):
        raise RuleParseError(doc, rule_id, "'enabled' must be a boolean")

    return Constraint(id=rule_id, category=category, relevance=relevance,
                      satisfaction=satisfaction, feedback=feedback, enabled=enabled)


def load_knowledge_base(documents, names=None) -> KnowledgeBase:
    """Parse and merge rule documents; constraints come out sorted by id."""
    constraints: dict[str, Constraint] = {}
    vocabulary: set[str] = set()
    version = "0"
    for index, text in enumerate(documents):
        doc = names[index] if names else f"document {index}"
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise RuleParseError(doc, None, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise RuleParseError(doc, None, "rule document root must be an object")
        unknown = set(data) - {"version", "tag_vocabulary", "rules"}
        if unknown:
            raise RuleParseError(doc, None, f"unknown document fields: {sorted(unknown)}")
        if "version" in data:
            version = str(data["version"])
        vocab = data.get("tag_vocabulary", [])
        if not isinstance(vocab, list) or not all(isinstance(t, str) for t in vocab):
            raise RuleParseError(doc, None, "'tag_vocabulary' must be a list of strings")
        vocabulary.update(vocab)
        rules = data.get("rules", [])
        if not isinstance(rules, list):
            raise RuleParseError(doc, None, "'rules' must be a list")
        for raw in rules:
            constraint = _parse_rule(raw, doc)
            if constraint.id in constraints:
                raise DuplicateRuleId(constraint.id)
            constraints[constraint.id] = constraint

    ordered = tuple(constraints[k] for k in sorted(constraints))
    return KnowledgeBase(constraints=ordered, tag_vocabulary=frozenset(vocabulary),
                         version=version)
