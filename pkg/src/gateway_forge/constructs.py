"""Construct scripts: constraint-keyed lists of rewrite actions."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Union

from .model import ArchElement, ConstraintAnnotation, PortPath

WILDCARD = "*"

ARCHITECTURE = "architecture"
ARCHITECTURAL_ELEMENT = "architecturalElement"
SCOPE_LEVELS = (ARCHITECTURE, ARCHITECTURAL_ELEMENT)


class ConstructKind(str, Enum):
    QOS = "qualityOfServiceProperty"
    PLATFORM = "executionPlatformProperty"

    @property
    def label(self) -> str:
        return "QoS" if self is ConstructKind.QOS else "Platform"


@dataclass(frozen=True)
class ConstraintPattern:
    category: str
    name: str
    value: str = WILDCARD

    @property
    def is_wildcard(self) -> bool:
        return self.value == WILDCARD

    def matches(self, annotation: ConstraintAnnotation) -> bool:
        return (annotation.category == self.category and annotation.name == self.name
                and (self.is_wildcard or annotation.value == self.value))

    def __str__(self):
        return f"--<{self.category}::{self.name}::{self.value}>--"


@dataclass(frozen=True)
class Include:
    element: ArchElement
    verb = "include"


@dataclass(frozen=True)
class Replicate:
    source: str
    target: str
    verb = "replicate"


@dataclass(frozen=True)
class Unify:
    first: PortPath
    second: PortPath
    verb = "unify"


@dataclass(frozen=True)
class Remove:
    name: str
    verb = "remove"


@dataclass(frozen=True)
class Rename:
    old: str
    new: str
    verb = "rename"


RewriteAction = Union[Include, Replicate, Unify, Remove, Rename]
ACTION_VERBS = ("include", "replicate", "unify", "remove", "rename")


@dataclass(frozen=True)
class Scope:
    """``on <target>:<level> actions { ... }``; the body mixes actions and nested scopes."""

    target: str
    level: str
    body: tuple[Union[RewriteAction, "Scope"], ...] = ()

    def walk(self) -> Iterator[tuple["Scope", RewriteAction]]:
        for item in self.body:
            if isinstance(item, Scope):
                yield from item.walk()
            else:
                yield self, item

    def flatten(self) -> Iterator["Scope"]:
        yield self
        for item in self.body:
            if isinstance(item, Scope):
                yield from item.flatten()


@dataclass(frozen=True)
class Construct:
    name: str
    kind: ConstructKind
    key: ConstraintPattern
    scopes: tuple[Scope, ...]
    provenance: Optional[str] = field(default=None, compare=False)

    def actions(self) -> list[tuple[Scope, RewriteAction]]:
        """Actions in script order, each paired with its innermost scope."""
        out = []
        for scope in self.scopes:
            out.extend(scope.walk())
        return out

    def all_scopes(self) -> list[Scope]:
        out = []
        for scope in self.scopes:
            out.extend(scope.flatten())
        return out
