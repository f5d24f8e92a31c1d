"""Exception hierarchy shared by every stage of the toolchain."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class SourceSpan:
    """1-based start/end positions of a fragment of source text."""

    file: str
    line: int
    column: int
    end_line: int
    end_column: int

    def __post_init__(self):
        if (self.end_line, self.end_column) < (self.line, self.column):
            raise ValueError(f"span end precedes start: {self!r}")

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


class ForgeError(Exception):
    """Base class for all toolchain errors."""


# -- frontend ---------------------------------------------------------------

class FrontendError(ForgeError):
    def __init__(self, message: str, span: Optional[SourceSpan] = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self):
        if self.span is None:
            return self.message
        return f"{self.span}: {self.message}"


class LexError(FrontendError):
    pass


class ParseError(FrontendError):
    def __init__(self, message, span=None, expected=()):
        super().__init__(message, span)
        self.expected = frozenset(expected)


class UnknownActionKind(ParseError):
    pass


class ElaborationError(FrontendError):
    pass


# -- core model -------------------------------------------------------------

class PathError(ForgeError, LookupError):
    """A PortPath segment could not be resolved."""

    def __init__(self, segment: str, path: str):
        super().__init__(f"{self.what} {segment!r} in path {path}")
        self.segment = segment
        self.path = path

    what = "unknown segment"


class UnknownElement(PathError):
    what = "unknown element"


class UnknownPort(PathError):
    what = "unknown port"


class UnknownPoint(PathError):
    what = "unknown connection point"


# -- rewriting --------------------------------------------------------------

class RewriteError(ForgeError):
    pass


class NameCollision(RewriteError):
    pass


class UnknownPath(RewriteError):
    pass


class DirectionConflict(RewriteError):
    pass


class SelfUnify(RewriteError):
    pass


class ScopeTargetMissing(RewriteError):
    pass


class ConstructMismatch(RewriteError):
    pass


class ConstructError(RewriteError):
    """An action inside a construct failed; the input model is left untouched."""

    def __init__(self, construct: str, index: int, cause: Exception):
        super().__init__(f"construct {construct}: action #{index} failed: {cause}")
        self.construct = construct
        self.index = index
        self.cause = cause


# -- library ----------------------------------------------------------------

class LibraryError(ForgeError):
    def __init__(self, failures):
        self.failures = list(failures)
        lines = [f"{path}: {exc}" for path, exc in self.failures]
        super().__init__("failed to load construct library:\n  " + "\n  ".join(lines))


class DuplicateKey(ForgeError):
    pass


# -- infrastructure / deployment --------------------------------------------

class InfrastructureError(FrontendError):
    pass


class DuplicateNode(InfrastructureError):
    pass


class UnknownNode(InfrastructureError):
    pass


class InvalidSpec(ForgeError):
    pass


class Infeasible(ForgeError):
    def __init__(self, witness: str):
        super().__init__(f"deployment infeasible: {witness}")
        self.witness = witness


class PlanningCancelled(ForgeError):
    pass
