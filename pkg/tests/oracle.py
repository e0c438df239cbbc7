"""Naive exhaustive constraint checker, independent of the engine.

Works straight off the raw rule-document dictionaries and a parsed
program: walks the tree itself, enumerates every (constraint, binding)
combination by brute force and interprets predicates recursively.  Used
to cross-check engine output violation-for-violation on small programs.
"""
from __future__ import annotations

import re

from blocktutor.codec.expr import print_expression
from blocktutor.codec.typenotation import print_type
from blocktutor.model.nodes import (
    BlockKind,
    Call,
    DataType,
    Expr,
    Index,
    TypedName,
    Unary,
    UnaryOp,
    Var,
)
from blocktutor.model.typecheck import FunctionSig, TypeMismatch, UnboundVariable, infer_type


class OracleNode:
    def __init__(self, block, position, ancestors, scope):
        self.block = block
        self.position = position
        self.ancestors = ancestors  # list of block ids, root first
        self.scope = scope


def flatten(program):
    """Preorder walk with per-node scopes, built from scratch."""
    globals_scope = {}
    functions = {}
    for top in program.blocks:
        if top.kind is BlockKind.DECLARATION:
            name = top.attrs.get("name")
            data_type = top.attrs.get("data_type")
            if name and isinstance(data_type, DataType) and name not in globals_scope:
                globals_scope[name] = data_type
        if top.kind is BlockKind.FUNCTION_DEF:
            name = top.attrs.get("name")
            return_type = top.attrs.get("return_type")
            if name and isinstance(return_type, DataType) and name not in functions:
                functions[name] = FunctionSig(
                    name, return_type, tuple(top.attrs.get("params", ()) or ()))

    nodes = []
    counter = [0]

    def function_scope(fn_block):
        scope = dict(globals_scope)
        for param in fn_block.attrs.get("params", ()) or ():
            if isinstance(param, TypedName):
                scope[param.name] = param.data_type
        stack = list(fn_block.children)
        while stack:
            inner = stack.pop()
            if inner.kind is BlockKind.DECLARATION:
                name = inner.attrs.get("name")
                data_type = inner.attrs.get("data_type")
                if name and isinstance(data_type, DataType) and name not in scope:
                    scope[name] = data_type
            stack.extend(inner.children)
        return scope

    def visit(b, ancestors, scope):
        position = counter[0]
        counter[0] += 1
        if b.kind is BlockKind.FUNCTION_DEF:
            scope = function_scope(b)
        nodes.append(OracleNode(b, position, ancestors, scope))
        for child in b.children:
            visit(child, ancestors + [b.id], scope)

    for top in program.blocks:
        visit(top, [], globals_scope)
    return nodes, functions, dict(program.struct_defs)


def _exprs_of(block, attr):
    value = block.attrs.get(attr)
    if isinstance(value, Expr):
        return [value]
    if isinstance(value, tuple):
        return [v for v in value if isinstance(v, Expr)]
    return []


def _all_exprs(block):
    out = []
    for attr in block.attrs:
        out.extend(_exprs_of(block, attr))
    return out


def _walk(expr):
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        for name in ("operand", "left", "right", "base", "index"):
            child = getattr(node, name, None)
            if isinstance(child, Expr):
                stack.append(child)
        if isinstance(node, Call):
            stack.extend(node.args)


def _present(value):
    return value is not None and value != "" and value != ()


def _scalar(value):
    if isinstance(value, Expr):
        return print_expression(value)
    if isinstance(value, DataType):
        return print_type(value)
    return value


class Oracle:
    def __init__(self, program, exercise_tags, rule_dicts):
        self.nodes, self.functions, self.structs = flatten(program)
        self.tags = set(exercise_tags)
        self.rules = sorted(rule_dicts, key=lambda r: r["id"])
        self.decl_positions = {}
        for node in self.nodes:
            if node.block.kind is BlockKind.DECLARATION:
                name = node.block.attrs.get("name")
                if name:
                    self.decl_positions.setdefault(name, []).append(node.position)
            if node.block.kind is BlockKind.FUNCTION_DEF:
                for param in node.block.attrs.get("params", ()) or ():
                    self.decl_positions.setdefault(param.name, []).append(node.position)

    # -- attribute-level tests -------------------------------------------

    def type_of(self, node, attr):
        value = node.block.attrs.get(attr)
        if isinstance(value, DataType):
            return value
        if isinstance(value, Expr):
            try:
                return infer_type(value, node.scope, functions=self.functions,
                                  structs=self.structs)
            except (UnboundVariable, TypeMismatch):
                return None
        return None

    def attr_pred(self, node, pred):
        value = node.block.attrs.get(pred["attr"])
        op = pred["op"]
        if op == "exists":
            return _present(value)
        if op == "absent":
            return not _present(value)
        if op == "equals":
            return _present(value) and _scalar(value) == pred["value"]
        if op == "not-equals":
            return _present(value) and _scalar(value) != pred["value"]
        if op == "in":
            return _present(value) and _scalar(value) in pred["value"]
        if op == "type-kind":
            t = self.type_of(node, pred["attr"])
            return t is not None and t.kind.value == pred["value"]
        tests = {
            "uses-deref": lambda e: isinstance(e, Unary) and e.op is UnaryOp.DEREF,
            "uses-address-of": lambda e: isinstance(e, Unary) and e.op is UnaryOp.ADDR,
            "uses-index": lambda e: isinstance(e, Index),
            "uses-call": lambda e: isinstance(e, Call),
        }
        test = tests[op]
        return any(test(sub) for expr in _exprs_of(node.block, pred["attr"])
                   for sub in _walk(expr))

    def node_matches(self, node, kinds, where):
        if kinds is not None and node.block.kind.value not in kinds:
            return False
        return all(self.attr_pred(node, p) for p in where)

    # -- satisfaction predicates -------------------------------------------

    def used_names(self, node):
        names = []
        if node.block.kind is BlockKind.FOR_LOOP and node.block.attrs.get("var"):
            names.append(node.block.attrs["var"])
        if node.block.kind is BlockKind.FILE_OP and node.block.attrs.get("handle"):
            names.append(node.block.attrs["handle"])
        for expr in _all_exprs(node.block):
            for sub in _walk(expr):
                if isinstance(sub, Var):
                    names.append(sub.name)
        return names

    def calls_of(self, node):
        pairs = []
        if node.block.kind is BlockKind.FUNCTION_CALL:
            callee = node.block.attrs.get("callee")
            if callee:
                pairs.append((callee, len(node.block.attrs.get("args", ()) or ())))
        for expr in _all_exprs(node.block):
            for sub in _walk(expr):
                if isinstance(sub, Call):
                    pairs.append((sub.callee, len(sub.args)))
        return pairs

    def satisfied(self, pred, binding):
        ptype = pred["type"]
        if ptype in ("exists-node", "count-at-least"):
            pool = self.nodes
            if pred.get("within"):
                anchor = binding[pred["within"]]
                pool = [n for n in pool if anchor.block.id in n.ancestors]
            if pred.get("before"):
                anchor = binding[pred["before"]]
                pool = [n for n in pool if n.position < anchor.position]
            kinds = pred.get("kinds")
            where = pred.get("where", [])
            hits = [n for n in pool if self.node_matches(n, kinds, where)]
            if ptype == "exists-node":
                return bool(hits)
            return len(hits) >= pred["n"]
        if ptype == "type-equals":
            left = self.type_of(binding[pred["left"]["binding"]], pred["left"]["attr"])
            right = self.type_of(binding[pred["right"]["binding"]], pred["right"]["attr"])
            if left is None or right is None:
                return True
            return left == right
        if ptype == "type-kind-is":
            t = self.type_of(binding[pred["binding"]], pred["attr"])
            if t is None:
                return True
            return t.kind.value == pred["kind"]
        if ptype == "attribute-equals":
            value = binding[pred["binding"]].block.attrs.get(pred["attr"])
            return _present(value) and _scalar(value) == pred["value"]
        if ptype == "attribute-exists":
            return _present(binding[pred["binding"]].block.attrs.get(pred["attr"]))
        if ptype == "attribute-matches":
            value = binding[pred["binding"]].block.attrs.get(pred["attr"])
            if not _present(value):
                return False
            return re.fullmatch(pred["pattern"], str(_scalar(value))) is not None
        if ptype == "valid-expression":
            node = binding[pred["binding"]]
            value = node.block.attrs.get(pred["attr"])
            if not _present(value) or not isinstance(value, Expr):
                return False
            try:
                infer_type(value, node.scope, functions=self.functions,
                           structs=self.structs)
            except UnboundVariable:
                return True
            except TypeMismatch:
                return False
            return True
        if ptype == "declared-before-use":
            node = binding[pred["binding"]]
            for name in self.used_names(node):
                positions = self.decl_positions.get(name, [])
                if not any(p < node.position for p in positions):
                    return False
            return True
        if ptype == "call-target-defined":
            node = binding[pred["binding"]]
            return all(callee in self.functions for callee, _ in self.calls_of(node))
        if ptype == "call-arity-matches":
            node = binding[pred["binding"]]
            for callee, count in self.calls_of(node):
                sig = self.functions.get(callee)
                if sig is not None and len(sig.params) != count:
                    return False
            return True
        if ptype == "not":
            return not self.satisfied(pred["arg"], binding)
        if ptype == "all":
            return all(self.satisfied(p, binding) for p in pred["args"])
        if ptype == "any":
            return any(self.satisfied(p, binding) for p in pred["args"])
        raise ValueError(f"oracle does not know predicate {ptype!r}")

    # -- whole-rule evaluation -------------------------------------------

    def bindings_for(self, rule):
        cr = rule.get("cr", {})
        if not set(cr.get("tags", [])) <= self.tags:
            return []
        matchers = cr.get("match", [])
        if not matchers:
            return [{}]
        per_matcher = []
        for matcher in matchers:
            kinds = matcher.get("kinds")
            where = matcher.get("where", [])
            candidates = [n for n in self.nodes if self.node_matches(n, kinds, where)]
            if not candidates:
                return []
            per_matcher.append((matcher["bind"], candidates))

        combos = [{}]
        for bind, candidates in per_matcher:
            combos = [{**combo, bind: node}
                      for combo in combos for node in candidates]
        return combos

    def violations(self, disabled=()):
        out = []
        for rule in self.rules:
            if not rule.get("enabled", True) or rule["id"] in disabled:
                continue
            failing = []
            for binding in self.bindings_for(rule):
                if not self.satisfied(rule["cs"], binding):
                    failing.append({name: node.block.id
                                    for name, node in binding.items()})
            failing.sort(key=lambda ids: tuple(ids.values()))
            out.extend((rule["id"], ids) for ids in failing)
        return out
