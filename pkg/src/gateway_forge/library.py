"""Repository of off-the-shelf constructs, indexed by constraint key."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .constructs import Construct
from .errors import DuplicateKey, ForgeError, LibraryError
from .model import ConstraintAnnotation

CONSTRUCT_SUFFIX = ".gcon"


@dataclass(frozen=True)
class Library:
    constructs: tuple[Construct, ...] = ()

    def __len__(self):
        return len(self.constructs)

    def __iter__(self):
        return iter(self.constructs)

    def names(self) -> list[str]:
        return [c.name for c in self.constructs]

    def candidates(self, category: str, name: str) -> list[Construct]:
        return [c for c in self.constructs if c.key.category == category and c.key.name == name]

    def lookup(self, annotation: ConstraintAnnotation) -> Optional[Construct]:
        return lookup(self, annotation)


def build_library(constructs) -> Library:
    """Index ``constructs`` (already in load order), rejecting clashing exact keys."""
    seen = {}
    for c in constructs:
        if c.key.is_wildcard:
            continue
        k = (c.key.category, c.key.name, c.key.value)
        if k in seen:
            raise DuplicateKey(
                f"constructs {seen[k].name} ({seen[k].provenance}) and {c.name} ({c.provenance}) "
                f"share key {c.key}")
        seen[k] = c
    return Library(tuple(constructs))


def load_library(directory: Union[str, Path]) -> Library:
    """Parse every ``.gcon`` file in ``directory``, in file-name order."""
    from .frontend import load_construct

    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"library directory not found: {directory}")
    constructs, failures = [], []
    for path in sorted(directory.iterdir(), key=lambda p: p.name):
        if path.suffix != CONSTRUCT_SUFFIX or not path.is_file():
            continue
        try:
            constructs.append(load_construct(path))
        except ForgeError as exc:
            failures.append((path.name, exc))
    if failures:
        raise LibraryError(failures)
    return build_library(constructs)


def builtin_library_path() -> Path:
    return Path(str(resources.files("gateway_forge") / "data" / "constructs"))


def builtin_library() -> Library:
    """The constructs shipped with the package (fault-tolerant reliability, gLite 3 proxy)."""
    return load_library(builtin_library_path())


def lookup(library: Library, annotation: ConstraintAnnotation) -> Optional[Construct]:
    """Construct keyed by ``annotation``, or None; an exact value beats a wildcard."""
    wildcard = None
    for c in library.candidates(annotation.category, annotation.name):
        if c.key.value == annotation.value:
            return c
        if c.key.is_wildcard and wildcard is None:
            wildcard = c
    return wildcard
