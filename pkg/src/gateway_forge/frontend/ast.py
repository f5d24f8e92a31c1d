"""Concrete syntax tree produced by the parser, before elaboration."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Optional

from ..errors import SourceSpan


@dataclass
class AstNode:
    kind: str
    span: SourceSpan
    value: Optional[str] = None
    children: list["AstNode"] = field(default_factory=list)
    attrs: dict[str, Any] = field(default_factory=dict)

    def of_kind(self, kind: str) -> Iterator["AstNode"]:
        return (c for c in self.children if c.kind == kind)

    def walk(self) -> Iterator["AstNode"]:
        yield self
        for c in self.children:
            yield from c.walk()


def dump(node: AstNode, indent: int = 0) -> str:
    """Indented one-node-per-line rendering, used by ``parse --emit-ast``."""
    label = node.kind if node.value is None else f"{node.kind} {node.value}"
    parts = [label, f"@{node.span.line}:{node.span.column}"]
    parts += [f"{k}={v!r}" for k, v in node.attrs.items() if v is not None]
    line = "  " * indent + " ".join(parts)
    return "\n".join([line] + [dump(c, indent + 1) for c in node.children])
