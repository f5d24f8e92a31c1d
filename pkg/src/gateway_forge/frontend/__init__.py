"""DSL frontend: lexing, parsing, elaboration and pretty-printing."""

from __future__ import annotations

from pathlib import Path
from typing import Union

from ..constructs import Construct
from ..model import ArchitectureModel
from .ast import AstNode, dump
from .elaborate import elaborate_construct, elaborate_infrastructure, elaborate_model, infer_direction
from .lexer import Token, tokenize
from .parser import detect_kind, parse_construct_ast, parse_infrastructure_ast, parse_model_ast
from .printer import format_annotation, pretty_print

__all__ = [
    "AstNode", "Token", "dump", "tokenize", "parse_model", "elaborate_model", "parse_construct",
    "parse_infrastructure", "pretty_print", "format_annotation", "infer_direction", "read_model",
    "read_construct", "read_infrastructure", "load_model", "load_construct", "load_infrastructure",
    "parse_ast", "detect_kind",
]


def parse_model(tokens: list[Token], file: str = "<input>") -> AstNode:
    return parse_model_ast(tokens, file)


def parse_construct(tokens: list[Token], file: str = "<input>", provenance: str = None) -> Construct:
    return elaborate_construct(parse_construct_ast(tokens, file), provenance)


def parse_infrastructure(tokens: list[Token], file: str = "<input>"):
    return elaborate_infrastructure(parse_infrastructure_ast(tokens, file))


def parse_ast(text: str, file: str = "<input>") -> AstNode:
    tokens = tokenize(text, file)
    kind = detect_kind(tokens)
    if kind == "construct":
        return parse_construct_ast(tokens, file)
    if kind == "infrastructure":
        return parse_infrastructure_ast(tokens, file)
    return parse_model_ast(tokens, file)


def read_model(text: str, file: str = "<input>") -> ArchitectureModel:
    return elaborate_model(parse_model(tokenize(text, file), file))


def read_construct(text: str, file: str = "<input>") -> Construct:
    return parse_construct(tokenize(text, file), file, provenance=file)


def read_infrastructure(text: str, file: str = "<input>"):
    return parse_infrastructure(tokenize(text, file), file)


def _read(path: Union[str, Path]) -> tuple[str, str]:
    path = Path(path)
    return path.read_text(encoding="utf-8"), str(path)


def load_model(path) -> ArchitectureModel:
    return read_model(*_read(path))


def load_construct(path) -> Construct:
    return read_construct(*_read(path))


def load_infrastructure(path):
    return read_infrastructure(*_read(path))
