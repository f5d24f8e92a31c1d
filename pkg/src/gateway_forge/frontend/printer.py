"""Canonical text rendering of models, constructs and infrastructure files."""

from __future__ import annotations

import json
import re
from typing import Union

from ..constructs import Construct, Include, Remove, Rename, Replicate, Scope, Unify
from ..model import (ArchElement, ArchitectureModel, BehaviourBlock, ConstraintAnnotation, ServiceKind, Stage,
                     Statement)
from .lexer import KEYWORDS

INDENT = "  "
_BARE_VALUE = re.compile(r"(?:[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*|\d+(?:\.\d+)?|\*)\Z")


def _value(text: str) -> str:
    if _BARE_VALUE.match(text):
        return text
    return json.dumps(text, ensure_ascii=False)


def format_annotation(ann: ConstraintAnnotation) -> str:
    prefix = "resolved " if ann.resolved else ""
    return f"{prefix}--<{ann.category}::{ann.name}::{_value(ann.value)}>--"


def _join_tokens(tokens: tuple[str, ...]) -> str:
    out = ""
    prev = None
    for tok in tokens:
        if prev is None:
            out = tok
        else:
            tight = (tok in (")", ",", ";") or prev == "("
                     or (tok == "(" and prev not in KEYWORDS and re.match(r"[A-Za-z_$]", prev)))
            out += tok if tight else " " + tok
        prev = tok
    return out


class _Writer:
    def __init__(self):
        self.lines: list[str] = []
        self.level = 0

    def line(self, text: str = ""):
        self.lines.append(INDENT * self.level + text if text else "")

    def open(self, text: str):
        self.line(text + " {")
        self.level += 1

    def close(self, suffix: str = ""):
        self.level -= 1
        self.line("}" + suffix)

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _statement(stmt: Statement) -> str:
    return _join_tokens(stmt.tokens) + ";"


def _behaviour(w: _Writer, block: BehaviourBlock):
    w.open("behaviour is")
    for d in block.definitions:
        head = ("recursive " if d.recursive else "") + f"value {d.name} is abstraction({', '.join(d.parameters)});"
        w.line(head)
        if d.body:
            w.line("{")
            w.level += 1
            for stmt in d.body:
                w.line(_statement(stmt))
            w.close(";")
    if block.composition:
        w.line("compose { " + " and ".join(f"{n}()" for n in block.composition) + " }")
    w.close()


def _element(w: _Writer, e: ArchElement, prefix: str = ""):
    head = f"{prefix}{e.name} is "
    head += f"style {e.style_ref}" if e.style_ref else e.kind.value
    w.open(head)
    structure = []
    if e.service_kind is not ServiceKind.UNSPECIFIED:
        structure.append(f"service: {e.service_kind.value};")
    if e.stateless:
        structure.append("stateless: true;")
    if e.idempotent:
        structure.append("idempotent: true;")
    if structure or e.ports or e.parts:
        w.open("structure is")
        for s in structure:
            w.line(s)
        for port in e.ports:
            if not port.points:
                w.line(f"port {port.name} {{ }}")
                continue
            w.open(f"port {port.name}")
            for p in port.points:
                w.line(f"{p.direction.value} point {p.name}")
            w.close()
        for part in e.parts:
            _element(w, part)
        w.close()
    if e.annotations:
        w.open("constraint is")
        for a in e.annotations:
            w.line(format_annotation(a))
        w.close()
    if e.behaviour is not None:
        _behaviour(w, e.behaviour)
    if e.metadata:
        w.open("metadata is")
        for k, v in e.metadata:
            w.line(f"{k}: {json.dumps(v, ensure_ascii=False)};")
        w.close()
    w.close()


def print_model(model: ArchitectureModel) -> str:
    w = _Writer()
    stage = "" if model.stage is Stage.GEIM else f" stage {model.stage.value}"
    w.open(f"{model.name} is style {model.style}{stage} where")
    w.open("structure is")
    for e in model.elements:
        _element(w, e)
    w.close()
    if model.attachments:
        w.open("connection is")
        for att in model.attachments:
            w.line(f"unify {att.source} with {att.target};")
        w.close()
    if model.annotations:
        w.open("constraint is")
        for a in model.annotations:
            w.line(format_annotation(a))
        w.close()
    w.close()
    return w.text()


def _scope(w: _Writer, scope: Scope):
    w.open(f"on {scope.target}:{scope.level} actions")
    for item in scope.body:
        if isinstance(item, Scope):
            _scope(w, item)
        elif isinstance(item, Include):
            _element(w, item.element, prefix="include ")
        elif isinstance(item, Replicate):
            w.line(f"replicate {item.source} to {item.target};")
        elif isinstance(item, Unify):
            w.line(f"unify {item.first} with {item.second};")
        elif isinstance(item, Remove):
            w.line(f"remove {item.name};")
        elif isinstance(item, Rename):
            w.line(f"rename {item.old} to {item.new};")
    w.close()


def print_construct(construct: Construct) -> str:
    w = _Writer()
    key = construct.key
    w.open(f"{construct.name} is {construct.kind.value} --<{key.category}::{key.name}::{_value(key.value)}>--")
    for scope in construct.scopes:
        _scope(w, scope)
    w.close()
    return w.text()


def print_infrastructure(infra) -> str:
    w = _Writer()
    w.open(f"{infra.name} is infrastructure")
    for node in infra.nodes:
        attrs = [f"capacity: {node.capacity}"]
        attrs += [f"{k}: {_value(v) if v != '*' else json.dumps(v)}" for k, v in node.attributes]
        w.line(f"node {node.name} {{ {', '.join(attrs)} }}")
    for a, b in infra.links:
        w.line(f"link {a} -- {b}")
    w.close()
    return w.text()


def pretty_print(value: Union[ArchitectureModel, Construct, object]) -> str:
    """Canonical, byte-stable text for a model, construct or infrastructure model."""
    if isinstance(value, ArchitectureModel):
        return print_model(value)
    if isinstance(value, Construct):
        return print_construct(value)
    if hasattr(value, "nodes") and hasattr(value, "links"):
        return print_infrastructure(value)
    raise TypeError(f"cannot pretty-print {type(value).__name__}")
