"""Typed errors raised while reading platform documents.

Parsing arbitrary bytes must never abort the process: every failure mode
maps to one of these classes so callers (service, CLI) can report it
structurally.
"""
from __future__ import annotations


class CodecError(Exception):
    """Base class for all document parsing/serialization failures."""


class DocumentSyntaxError(CodecError):
    def __init__(self, message: str, line: int | None = None,
                 column: int | None = None, path: str | None = None):
        where = ""
        if line is not None:
            where = f" at line {line}" + (f", column {column}" if column is not None else "")
        elif path:
            where = f" at {path}"
        super().__init__(message + where)
        self.message = message
        self.line = line
        self.column = column
        self.path = path


class UnknownBlockKind(CodecError):
    def __init__(self, name: str, block_id: str | None = None):
        super().__init__(f"unknown block kind {name!r}")
        self.name = name
        self.block_id = block_id


class ExpressionParseError(CodecError):
    def __init__(self, block_id: str | None, message: str):
        prefix = f"block {block_id!r}: " if block_id else ""
        super().__init__(prefix + message)
        self.block_id = block_id
        self.message = message


class UnknownTag(CodecError):
    def __init__(self, name: str):
        super().__init__(f"problem tag {name!r} is not in the tag vocabulary")
        self.name = name


class InvalidReferenceSolution(CodecError):
    def __init__(self, report):
        details = "; ".join(f"{d.kind.value}({d.block_id})" for d in report)
        super().__init__(f"reference solution fails validation: {details}")
        self.report = report
