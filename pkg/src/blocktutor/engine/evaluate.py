"""Constraint evaluation: match relevance patterns, test satisfaction.

Every rule is independently checkable, so evaluation is a direct tree
match per constraint with no chaining.  Output is deterministic: the
knowledge base is id-sorted and per-constraint bindings are ordered by
their bound block ids.

Predicate semantics worth knowing:

* A type comparison whose sides cannot be resolved (missing attribute,
  unresolvable expression type) is vacuously satisfied.  Unresolvable
  types are some other rule's violation; repeating them here would pile
  duplicate feedback onto one mistake.
* ``valid-expression`` fails on a missing/empty attribute and on an
  internal type error, but treats an undeclared variable as vacuous:
  declaredness belongs to the missing-reference rules.
"""
from __future__ import annotations

import itertools
import re

from ..codec.expr import print_expression
from ..codec.typenotation import print_type
from ..model.nodes import (
    Call,
    DataType,
    Expr,
    Index,
    Unary,
    UnaryOp,
    Var,
    BlockKind,
    Program,
    walk_expr,
)
from ..model.traverse import NodeInfo, enumerate_nodes
from ..model.typecheck import (
    TypeMismatch,
    UnboundVariable,
    collect_scopes,
    infer_type,
)
from .kb import (
    AttrPred,
    Constraint,
    KnowledgeBase,
    Pred,
    RuleCategory,
    Violation,
)


class EvalContext:
    """Precomputed program facts shared by every constraint check."""

    def __init__(self, program: Program):
        self.program = program
        self.nodes = enumerate_nodes(program, "all")
        self.scopes = collect_scopes(program)
        # name -> sorted preorder positions where it is declared
        self.declaration_positions: dict[str, list[int]] = {}
        for node in self.nodes:
            if node.kind is BlockKind.DECLARATION:
                name = node.attrs.get("name")
                if name:
                    self.declaration_positions.setdefault(name, []).append(node.position)
            elif node.kind is BlockKind.FUNCTION_DEF:
                for param in node.attrs.get("params", ()) or ():
                    self.declaration_positions.setdefault(param.name, []).append(node.position)

    def scope_for(self, node: NodeInfo) -> dict:
        return self.scopes.per_block.get(node.block_id, self.scopes.globals)

    def descendants(self, node: NodeInfo) -> list[NodeInfo]:
        return [n for n in self.nodes if node.block_id in n.ancestors]

    def declared_before(self, name: str, position: int) -> bool:
        return any(p < position for p in self.declaration_positions.get(name, ()))


def _present(value) -> bool:
    return value is not None and value != "" and value != ()


def _scalar_repr(value):
    if isinstance(value, Expr):
        return print_expression(value)
    if isinstance(value, DataType):
        return print_type(value)
    return value


def _attr_exprs(node: NodeInfo, attr: str) -> list[Expr]:
    value = node.attrs.get(attr)
    if isinstance(value, Expr):
        return [value]
    if isinstance(value, tuple):
        return [v for v in value if isinstance(v, Expr)]
    return []


def _expr_uses(node: NodeInfo, attr: str, test) -> bool:
    return any(test(sub) for expr in _attr_exprs(node, attr) for sub in walk_expr(expr))


def _resolve_type(node: NodeInfo, attr: str, ctx: EvalContext) -> DataType | None:
    """Type of an attribute: declared types directly, expressions by inference."""
    value = node.attrs.get(attr)
    if isinstance(value, DataType):
        return value
    if isinstance(value, Expr):
        try:
            return infer_type(value, ctx.scope_for(node),
                              functions=ctx.scopes.functions, structs=ctx.scopes.structs)
        except (UnboundVariable, TypeMismatch):
            return None
    return None


def _match_attr_pred(node: NodeInfo, pred: AttrPred, ctx: EvalContext) -> bool:
    value = node.attrs.get(pred.attr)
    if pred.op == "exists":
        return _present(value)
    if pred.op == "absent":
        return not _present(value)
    if pred.op == "equals":
        return _present(value) and _scalar_repr(value) == pred.value
    if pred.op == "not-equals":
        return _present(value) and _scalar_repr(value) != pred.value
    if pred.op == "in":
        return _present(value) and _scalar_repr(value) in pred.value
    if pred.op == "type-kind":
        resolved = _resolve_type(node, pred.attr, ctx)
        return resolved is not None and resolved.kind.value == pred.value
    if pred.op == "uses-deref":
        return _expr_uses(node, pred.attr,
                          lambda e: isinstance(e, Unary) and e.op is UnaryOp.DEREF)
    if pred.op == "uses-address-of":
        return _expr_uses(node, pred.attr,
                          lambda e: isinstance(e, Unary) and e.op is UnaryOp.ADDR)
    if pred.op == "uses-index":
        return _expr_uses(node, pred.attr, lambda e: isinstance(e, Index))
    if pred.op == "uses-call":
        return _expr_uses(node, pred.attr, lambda e: isinstance(e, Call))
    raise ValueError(f"unknown attribute predicate op {pred.op!r}")


def _node_matches(node: NodeInfo, kinds, where, ctx: EvalContext) -> bool:
    if kinds is not None and node.kind not in kinds:
        return False
    return all(_match_attr_pred(node, pred, ctx) for pred in where)


# Identifier attributes that count as *uses* for declared-before-use.
_IDENT_USE_ATTRS = {
    BlockKind.FOR_LOOP: ("var",),
    BlockKind.FILE_OP: ("handle",),
}


def _used_names(node: NodeInfo):
    for attr in _IDENT_USE_ATTRS.get(node.kind, ()):
        name = node.attrs.get(attr)
        if name:
            yield name
    for attr_name in node.attrs:
        for expr in _attr_exprs(node, attr_name):
            for sub in walk_expr(expr):
                if isinstance(sub, Var):
                    yield sub.name


def _called_functions(node: NodeInfo):
    """(callee, arg count) pairs reachable from a block."""
    if node.kind is BlockKind.FUNCTION_CALL:
        callee = node.attrs.get("callee")
        if callee:
            yield callee, len(node.attrs.get("args", ()) or ())
    for attr_name in node.attrs:
        for expr in _attr_exprs(node, attr_name):
            for sub in walk_expr(expr):
                if isinstance(sub, Call):
                    yield sub.callee, len(sub.args)


def _eval_pred(pred: Pred, binding: dict, ctx: EvalContext):
    """Returns (satisfied, details-for-feedback)."""
    if pred.type in ("exists-node", "count-at-least"):
        candidates = ctx.nodes
        if pred.within:
            candidates = ctx.descendants(binding[pred.within])
        if pred.before:
            limit = binding[pred.before].position
            candidates = [n for n in candidates if n.position < limit]
        found = [n for n in candidates if _node_matches(n, pred.kinds, pred.where, ctx)]
        wanted = sorted(k.value for k in pred.kinds) if pred.kinds else ["any"]
        if pred.type == "exists-node":
            return bool(found), {"wanted_kinds": ", ".join(wanted)}
        return len(found) >= pred.n, {"wanted_kinds": ", ".join(wanted),
                                      "found_count": len(found), "needed_count": pred.n}
    if pred.type == "type-equals":
        left = _resolve_type(binding[pred.left[0]], pred.left[1], ctx)
        right = _resolve_type(binding[pred.right[0]], pred.right[1], ctx)
        if left is None or right is None:
            return True, {}
        return left == right, {"left_type": print_type(left), "right_type": print_type(right)}
    if pred.type == "type-kind-is":
        resolved = _resolve_type(binding[pred.binding], pred.attr, ctx)
        if resolved is None:
            return True, {}
        return resolved.kind.value == pred.kind, {
            "found_type": print_type(resolved), "wanted_kind": pred.kind}
    if pred.type == "attribute-equals":
        value = binding[pred.binding].attrs.get(pred.attr)
        return (_present(value) and _scalar_repr(value) == pred.value), {}
    if pred.type == "attribute-exists":
        value = binding[pred.binding].attrs.get(pred.attr)
        return _present(value), {"missing_attr": pred.attr}
    if pred.type == "attribute-matches":
        value = binding[pred.binding].attrs.get(pred.attr)
        if not _present(value):
            return False, {"missing_attr": pred.attr}
        text = str(_scalar_repr(value))
        return re.fullmatch(pred.pattern, text) is not None, {"found_value": text}
    if pred.type == "valid-expression":
        node = binding[pred.binding]
        value = node.attrs.get(pred.attr)
        if not _present(value) or not isinstance(value, Expr):
            return False, {"missing_attr": pred.attr}
        try:
            infer_type(value, ctx.scope_for(node),
                       functions=ctx.scopes.functions, structs=ctx.scopes.structs)
        except UnboundVariable:
            return True, {}
        except TypeMismatch as exc:
            return False, {"type_error": str(exc)}
        return True, {}
    if pred.type == "declared-before-use":
        node = binding[pred.binding]
        undeclared = sorted({name for name in _used_names(node)
                             if not ctx.declared_before(name, node.position)})
        return not undeclared, {"undeclared": ", ".join(undeclared)}
    if pred.type == "call-target-defined":
        node = binding[pred.binding]
        undefined = sorted({callee for callee, _ in _called_functions(node)
                            if callee not in ctx.scopes.functions})
        return not undefined, {"undefined": ", ".join(undefined)}
    if pred.type == "call-arity-matches":
        node = binding[pred.binding]
        mismatched = []
        for callee, arg_count in _called_functions(node):
            sig = ctx.scopes.functions.get(callee)
            if sig is not None and len(sig.params) != arg_count:
                mismatched.append(f"{callee} (expects {len(sig.params)}, got {arg_count})")
        return not mismatched, {"mismatched": "; ".join(sorted(mismatched))}
    if pred.type == "not":
        satisfied, details = _eval_pred(pred.args[0], binding, ctx)
        return not satisfied, details
    if pred.type == "all":
        merged: dict = {}
        for arg in pred.args:
            satisfied, details = _eval_pred(arg, binding, ctx)
            if not satisfied:
                return False, details
            merged.update(details)
        return True, merged
    if pred.type == "any":
        last_details: dict = {}
        for arg in pred.args:
            satisfied, details = _eval_pred(arg, binding, ctx)
            if satisfied:
                return True, details
            last_details = details
        return False, last_details
    raise ValueError(f"unknown predicate type {pred.type!r}")


def _relevance_bindings(constraint: Constraint, exercise_tags, ctx: EvalContext):
    """All bindings the relevance pattern produces; empty list = not relevant."""
    if not constraint.relevance.tag_requirements <= frozenset(exercise_tags):
        return []
    matchers = constraint.relevance.node_matchers
    if not matchers:
        return [{}]
    candidate_lists = []
    for matcher in matchers:
        candidates = [n for n in ctx.nodes
                      if _node_matches(n, matcher.kinds, matcher.where, ctx)]
        if not candidates:
            return []
        candidate_lists.append(candidates)
    bindings = []
    for combo in itertools.product(*candidate_lists):
        bindings.append({matcher.bind: node for matcher, node in zip(matchers, combo)})
    return bindings


def check_constraint(constraint: Constraint, program: Program, exercise,
                     ctx: EvalContext | None = None):
    """One (binding, satisfied) entry per relevance binding, ordered by block ids."""
    ctx = ctx or EvalContext(program)
    tags = exercise.problem_tags if exercise is not None else frozenset()
    results = []
    for binding in _relevance_bindings(constraint, tags, ctx):
        satisfied, details = _eval_pred(constraint.satisfaction, binding, ctx)
        results.append((binding, satisfied, details))
    results.sort(key=lambda item: tuple(node.block_id for node in item[0].values()))
    return results


def evaluate(program: Program, exercise, kb: KnowledgeBase) -> list[Violation]:
    """All violations of enabled constraints, deterministically ordered."""
    ctx = EvalContext(program)
    disabled = exercise.disabled_constraints() if exercise is not None else set()
    force_enabled = exercise.enabled_overrides() if exercise is not None else set()
    violations: list[Violation] = []
    for constraint in kb.constraints:
        active = (constraint.enabled or constraint.id in force_enabled)
        if constraint.id in disabled or not active:
            continue
        for binding, satisfied, details in check_constraint(constraint, program, exercise, ctx):
            if satisfied:
                continue
            ids = {name: node.block_id for name, node in binding.items()}
            violations.append(Violation(
                constraint_id=constraint.id,
                category=constraint.category,
                bindings=ids,
                explanation_data={**ids, **details},
            ))
    return violations


def kb_stats(kb: KnowledgeBase) -> dict:
    """Rule count per category; every category is present in the result."""
    stats = {category: 0 for category in RuleCategory}
    for constraint in kb.constraints:
        stats[constraint.category] += 1
    return stats
