"""Compact textual notation for data types inside documents.

    int        float*       char[10]      struct point      int*[4]

Suffixes apply left to right: ``int*[4]`` is an array of four int
pointers, ``int[4]*`` a pointer to an array of four ints.
"""
from __future__ import annotations

import re

from ..model.nodes import (
    CHAR,
    FILE,
    FLOAT,
    INT,
    VOID,
    DataType,
    TypeKind,
    array_of,
    pointer_to,
)

_BASES = {"int": INT, "float": FLOAT, "char": CHAR, "void": VOID, "file": FILE}
_IDENT = re.compile(r"[A-Za-z_]\w*")


class TypeNotationError(Exception):
    def __init__(self, message: str, text: str):
        super().__init__(f"{message} in type {text!r}")
        self.message = message
        self.text = text


def parse_type(text: str) -> DataType:
    source = text.strip()
    if source.startswith("struct"):
        rest = source[len("struct"):]
        if not rest[:1].isspace():
            raise TypeNotationError("expected a name after 'struct'", text)
        rest = rest.strip()
        match = _IDENT.match(rest)
        if not match:
            raise TypeNotationError("expected a struct name", text)
        base = DataType(TypeKind.STRUCT, struct_name=match.group(0))
        suffix = rest[match.end():].strip()
    else:
        match = _IDENT.match(source)
        if not match or match.group(0) not in _BASES:
            raise TypeNotationError("unknown base type", text)
        base = _BASES[match.group(0)]
        suffix = source[match.end():].strip()

    while suffix:
        if suffix.startswith("*"):
            base = pointer_to(base)
            suffix = suffix[1:].strip()
        elif suffix.startswith("["):
            end = suffix.find("]")
            if end < 0:
                raise TypeNotationError("unterminated array length", text)
            digits = suffix[1:end].strip()
            if not digits.isdigit():
                raise TypeNotationError("array length must be a non-negative integer", text)
            base = array_of(base, int(digits))
            suffix = suffix[end + 1:].strip()
        else:
            raise TypeNotationError(f"unexpected {suffix[0]!r}", text)
    return base


def print_type(data_type: DataType) -> str:
    suffixes: list[str] = []
    t = data_type
    while t.kind in (TypeKind.POINTER, TypeKind.ARRAY):
        if t.kind is TypeKind.POINTER:
            suffixes.append("*")
        else:
            suffixes.append(f"[{t.length}]")
        t = t.elem
    if t.kind is TypeKind.STRUCT:
        base = f"struct {t.struct_name}"
    else:
        base = t.kind.value
    return base + "".join(reversed(suffixes))
