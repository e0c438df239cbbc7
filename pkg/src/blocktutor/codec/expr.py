"""Recursive-descent parser and canonical printer for the expression mini-language.

Grammar (lowest binding first, all binary operators left-associative):

    or      := and ("||" and)*
    and     := cmp ("&&" cmp)*
    cmp     := add (("<"|"<="|">"|">="|"=="|"!=") add)*
    add     := mul (("+"|"-") mul)*
    mul     := unary (("*"|"/"|"%") unary)*
    unary   := ("-"|"+"|"!"|"*"|"&") unary | postfix
    postfix := primary ("[" expr "]" | "." IDENT | "->" IDENT | "(" args ")")*
    primary := INT | FLOAT | CHAR | STRING | IDENT | "(" expr ")"

Calls are permitted only on plain identifiers.  The printer emits a
canonical spelling whose reparse is structurally identical.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..model.nodes import (
    Binary,
    BinaryOp,
    Call,
    CharLit,
    Expr,
    FloatLit,
    Index,
    IntLit,
    Member,
    StrLit,
    Unary,
    UnaryOp,
    Var,
)


class ExprSyntaxError(Exception):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.message = message
        self.position = position


@dataclass(frozen=True)
class _Token:
    kind: str  # int, float, char, string, ident, op, end
    text: str
    position: int


_TWO_CHAR_OPS = ("<=", ">=", "==", "!=", "&&", "||", "->")
_ONE_CHAR_OPS = "+-*/%<>!&(),[]."

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "0": "\0", "\\": "\\", "'": "'", '"': '"'}


def _lex(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit():
            start = i
            while i < n and text[i].isdigit():
                i += 1
            if i < n and text[i] == "." and i + 1 < n and text[i + 1].isdigit():
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
                tokens.append(_Token("float", text[start:i], start))
            else:
                tokens.append(_Token("int", text[start:i], start))
            continue
        if c.isalpha() or c == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(_Token("ident", text[start:i], start))
            continue
        if c == "'":
            start = i
            i += 1
            if i < n and text[i] == "\\":
                if i + 1 >= n or text[i + 1] not in _ESCAPES:
                    raise ExprSyntaxError("bad escape in character literal", i)
                value = _ESCAPES[text[i + 1]]
                i += 2
            elif i < n and text[i] != "'":
                value = text[i]
                i += 1
            else:
                raise ExprSyntaxError("empty character literal", start)
            if i >= n or text[i] != "'":
                raise ExprSyntaxError("unterminated character literal", start)
            i += 1
            tokens.append(_Token("char", value, start))
            continue
        if c == '"':
            start = i
            i += 1
            parts: list[str] = []
            while i < n and text[i] != '"':
                if text[i] == "\\":
                    if i + 1 >= n or text[i + 1] not in _ESCAPES:
                        raise ExprSyntaxError("bad escape in string literal", i)
                    parts.append(_ESCAPES[text[i + 1]])
                    i += 2
                else:
                    parts.append(text[i])
                    i += 1
            if i >= n:
                raise ExprSyntaxError("unterminated string literal", start)
            i += 1
            tokens.append(_Token("string", "".join(parts), start))
            continue
        two = text[i:i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(_Token("op", two, i))
            i += 2
            continue
        if c in _ONE_CHAR_OPS:
            tokens.append(_Token("op", c, i))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def accept_op(self, *ops: str) -> _Token | None:
        token = self.peek()
        if token.kind == "op" and token.text in ops:
            return self.next()
        return None

    def expect_op(self, op: str) -> _Token:
        token = self.next()
        if token.kind != "op" or token.text != op:
            raise ExprSyntaxError(f"expected {op!r}", token.position)
        return token

    def parse(self) -> Expr:
        expr = self.or_expr()
        trailing = self.peek()
        if trailing.kind != "end":
            raise ExprSyntaxError(f"unexpected {trailing.text!r}", trailing.position)
        return expr

    def or_expr(self) -> Expr:
        expr = self.and_expr()
        while self.accept_op("||"):
            expr = Binary(BinaryOp.OR, expr, self.and_expr())
        return expr

    def and_expr(self) -> Expr:
        expr = self.cmp_expr()
        while self.accept_op("&&"):
            expr = Binary(BinaryOp.AND, expr, self.cmp_expr())
        return expr

    def cmp_expr(self) -> Expr:
        expr = self.add_expr()
        while True:
            token = self.accept_op("<", "<=", ">", ">=", "==", "!=")
            if token is None:
                return expr
            expr = Binary(BinaryOp(token.text), expr, self.add_expr())

    def add_expr(self) -> Expr:
        expr = self.mul_expr()
        while True:
            token = self.accept_op("+", "-")
            if token is None:
                return expr
            expr = Binary(BinaryOp(token.text), expr, self.mul_expr())

    def mul_expr(self) -> Expr:
        expr = self.unary_expr()
        while True:
            token = self.accept_op("*", "/", "%")
            if token is None:
                return expr
            expr = Binary(BinaryOp(token.text), expr, self.unary_expr())

    def unary_expr(self) -> Expr:
        token = self.accept_op("-", "+", "!", "*", "&")
        if token is not None:
            return Unary(UnaryOp(token.text), self.unary_expr())
        return self.postfix_expr()

    def postfix_expr(self) -> Expr:
        expr = self.primary()
        while True:
            if self.accept_op("["):
                index = self.or_expr()
                self.expect_op("]")
                expr = Index(expr, index)
            elif self.accept_op("."):
                name = self.next()
                if name.kind != "ident":
                    raise ExprSyntaxError("expected member name after '.'", name.position)
                expr = Member(expr, name.text, arrow=False)
            elif self.accept_op("->"):
                name = self.next()
                if name.kind != "ident":
                    raise ExprSyntaxError("expected member name after '->'", name.position)
                expr = Member(expr, name.text, arrow=True)
            elif self.peek().kind == "op" and self.peek().text == "(":
                if not isinstance(expr, Var):
                    raise ExprSyntaxError("calls are only allowed on function names",
                                          self.peek().position)
                self.next()
                args: list[Expr] = []
                if not self.accept_op(")"):
                    args.append(self.or_expr())
                    while self.accept_op(","):
                        args.append(self.or_expr())
                    self.expect_op(")")
                expr = Call(expr.name, tuple(args))
            else:
                return expr

    def primary(self) -> Expr:
        token = self.next()
        if token.kind == "int":
            return IntLit(int(token.text))
        if token.kind == "float":
            return FloatLit(float(token.text))
        if token.kind == "char":
            return CharLit(token.text)
        if token.kind == "string":
            return StrLit(token.text)
        if token.kind == "ident":
            return Var(token.text)
        if token.kind == "op" and token.text == "(":
            expr = self.or_expr()
            self.expect_op(")")
            return expr
        raise ExprSyntaxError(f"expected an expression, found {token.text or 'end of input'!r}",
                              token.position)


def parse_expression(text: str) -> Expr:
    """Parse an expression string; raises ExprSyntaxError on malformed input."""
    return _Parser(_lex(text)).parse()


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_PRECEDENCE = {
    BinaryOp.OR: 1,
    BinaryOp.AND: 2,
    BinaryOp.LT: 3, BinaryOp.LE: 3, BinaryOp.GT: 3,
    BinaryOp.GE: 3, BinaryOp.EQ: 3, BinaryOp.NE: 3,
    BinaryOp.ADD: 4, BinaryOp.SUB: 4,
    BinaryOp.MUL: 5, BinaryOp.DIV: 5, BinaryOp.MOD: 5,
}
_UNARY_PRECEDENCE = 6
_POSTFIX_PRECEDENCE = 7

_REVERSE_ESCAPES = {"\n": "\\n", "\t": "\\t", "\r": "\\r", "\0": "\\0", "\\": "\\\\"}


def _escape(text: str, quote: str) -> str:
    out = []
    for ch in text:
        if ch in _REVERSE_ESCAPES:
            out.append(_REVERSE_ESCAPES[ch])
        elif ch == quote:
            out.append("\\" + quote)
        else:
            out.append(ch)
    return "".join(out)


def _prec(expr: Expr) -> int:
    if isinstance(expr, Binary):
        return _PRECEDENCE[expr.op]
    if isinstance(expr, Unary):
        return _UNARY_PRECEDENCE
    if isinstance(expr, (Index, Member, Call)):
        return _POSTFIX_PRECEDENCE
    return 8


def print_expression(expr: Expr) -> str:
    """Canonical spelling; parse_expression(print_expression(e)) == e."""
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, FloatLit):
        text = repr(expr.value)
        return text if "." in text or "e" in text else text + ".0"
    if isinstance(expr, CharLit):
        return "'" + _escape(expr.value, "'") + "'"
    if isinstance(expr, StrLit):
        return '"' + _escape(expr.value, '"') + '"'
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Unary):
        inner = print_expression(expr.operand)
        if _prec(expr.operand) < _UNARY_PRECEDENCE:
            inner = f"({inner})"
        return expr.op.value + inner
    if isinstance(expr, Binary):
        me = _PRECEDENCE[expr.op]
        left = print_expression(expr.left)
        if _prec(expr.left) < me:
            left = f"({left})"
        right = print_expression(expr.right)
        if _prec(expr.right) <= me:
            right = f"({right})"
        return f"{left} {expr.op.value} {right}"
    if isinstance(expr, Call):
        args = ", ".join(print_expression(a) for a in expr.args)
        return f"{expr.callee}({args})"
    if isinstance(expr, Index):
        base = print_expression(expr.base)
        if _prec(expr.base) < _POSTFIX_PRECEDENCE:
            base = f"({base})"
        return f"{base}[{print_expression(expr.index)}]"
    if isinstance(expr, Member):
        base = print_expression(expr.base)
        if _prec(expr.base) < _POSTFIX_PRECEDENCE:
            base = f"({base})"
        return f"{base}{'->' if expr.arrow else '.'}{expr.name}"
    raise TypeError(f"unknown expression node {expr!r}")
