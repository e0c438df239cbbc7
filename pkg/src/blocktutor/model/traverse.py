"""Program traversal: the node stream the rule engine matches against."""
from __future__ import annotations

from dataclasses import dataclass

from .nodes import Block, BlockKind, Program


@dataclass(frozen=True)
class NodeInfo:
    """One traversed block with its position and enclosing block ids (root first)."""

    block_id: str
    kind: BlockKind
    attrs: dict
    ancestors: tuple[str, ...]
    position: int  # preorder index over the whole program
    block: Block


def enumerate_nodes(program: Program, kinds="all") -> list[NodeInfo]:
    """Preorder, stable enumeration of program blocks.

    ``kinds`` is either the string ``"all"`` or a set of BlockKind values to
    keep.  Ancestor chains always reflect the full tree, independent of the
    filter.
    """
    wanted = None if kinds == "all" else {BlockKind(k) for k in kinds}
    out: list[NodeInfo] = []
    counter = 0

    def visit(block: Block, ancestors: tuple[str, ...]) -> None:
        nonlocal counter
        position = counter
        counter += 1
        if wanted is None or block.kind in wanted:
            out.append(NodeInfo(block.id, block.kind, block.attrs, ancestors, position, block))
        for child in block.children:
            visit(child, ancestors + (block.id,))

    for top in program.blocks:
        visit(top, ())
    return out
