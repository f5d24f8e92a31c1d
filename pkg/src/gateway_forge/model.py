"""Architecture graph: elements, ports, connection points, attachments, annotations.

Every type here is an immutable value. Ordered maps are stored as tuples in
insertion order; lookups go through small helper methods.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Mapping, Optional

from .errors import UnknownElement, UnknownPoint, UnknownPort

IDENT_RE = re.compile(r"[A-Za-z_](?:[A-Za-z0-9_]|-(?!-))*\Z")

# words the DSL reserves; they cannot name anything
RESERVED_WORDS = frozenset("""
    is style where structure connection constraint behaviour archetype component
    connector on actions include replicate to unify with compose and recursive value
    abstraction if qualityOfServiceProperty executionPlatformProperty infrastructure
    node link port in out point resolved stage metadata
""".split())

SCIENCE_GATEWAY_STYLE = "SOAScienceGateway"


def is_identifier(text) -> bool:
    return isinstance(text, str) and IDENT_RE.match(text) is not None and text not in RESERVED_WORDS


class ElementKind(str, Enum):
    COMPONENT = "component"
    CONNECTOR = "connector"


class ServiceKind(str, Enum):
    ATOMIC = "atomic"
    COMPOSITE = "composite"
    UNSPECIFIED = "unspecified"


class Direction(str, Enum):
    IN = "in"
    OUT = "out"


class Stage(str, Enum):
    GEIM = "GEIM"
    WOVEN_QOS = "WOVEN_QOS"
    WOVEN_PLATFORM = "WOVEN_PLATFORM"

    @property
    def rank(self) -> int:
        return list(Stage).index(self)


@dataclass(frozen=True)
class ConnectionPoint:
    name: str
    direction: Direction


@dataclass(frozen=True)
class Port:
    name: str
    points: tuple[ConnectionPoint, ...] = ()

    def point(self, name: str) -> Optional[ConnectionPoint]:
        for p in self.points:
            if p.name == name:
                return p
        return None

    def with_point(self, point: ConnectionPoint) -> "Port":
        return replace(self, points=self.points + (point,))


@dataclass(frozen=True, order=True)
class PortPath:
    element: str
    port: str
    point: str

    def __str__(self):
        return f"{self.element}::{self.port}::{self.point}"

    @classmethod
    def parse(cls, text: str) -> "PortPath":
        parts = text.split("::")
        if len(parts) != 3 or not all(parts):
            raise ValueError(f"malformed port path {text!r}")
        return cls(*parts)

    def with_element(self, name: str) -> "PortPath":
        return replace(self, element=name)


@dataclass(frozen=True)
class Attachment:
    """A directed link from an Out connection point to an In connection point."""

    source: PortPath
    target: PortPath

    def touches(self, element: str) -> bool:
        return self.source.element == element or self.target.element == element

    def __str__(self):
        return f"{self.source} -> {self.target}"


@dataclass(frozen=True)
class ConstraintAnnotation:
    category: str
    name: str
    value: str
    resolved: bool = False
    # None means the annotation applies to the whole model.
    target: Optional[str] = None

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.category, self.name, self.value)

    def __str__(self):
        return f"--<{self.category}::{self.name}::{self.value}>--"


@dataclass(frozen=True)
class Statement:
    """One behaviour statement, kept as its token lexemes.

    Only the names it invokes and whether it is a conditional are interpreted.
    """

    tokens: tuple[str, ...]
    invocations: tuple[str, ...] = ()
    conditional: bool = False


@dataclass(frozen=True)
class AbstractionDef:
    name: str
    recursive: bool = False
    parameters: tuple[str, ...] = ()
    body: tuple[Statement, ...] = ()


@dataclass(frozen=True)
class BehaviourBlock:
    definitions: tuple[AbstractionDef, ...] = ()
    composition: tuple[str, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.definitions and not self.composition

    def invoked_names(self) -> Iterator[str]:
        yield from self.composition
        for d in self.definitions:
            for stmt in d.body:
                yield from stmt.invocations


@dataclass(frozen=True)
class ArchElement:
    name: str
    kind: ElementKind = ElementKind.COMPONENT
    service_kind: ServiceKind = ServiceKind.UNSPECIFIED
    stateless: bool = False
    idempotent: bool = False
    style_ref: Optional[str] = None
    ports: tuple[Port, ...] = ()
    behaviour: Optional[BehaviourBlock] = None
    annotations: tuple[ConstraintAnnotation, ...] = ()
    # sorted (key, value) pairs
    metadata: tuple[tuple[str, str], ...] = ()
    # nested lower-order elements owned by this one
    parts: tuple["ArchElement", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "metadata", tuple(sorted(dict(self.metadata).items())))

    @property
    def meta(self) -> dict[str, str]:
        return dict(self.metadata)

    def with_metadata(self, **entries: str) -> "ArchElement":
        merged = self.meta
        merged.update(entries)
        return replace(self, metadata=tuple(merged.items()))

    def with_meta_items(self, items: Mapping[str, str]) -> "ArchElement":
        merged = self.meta
        merged.update(items)
        return replace(self, metadata=tuple(merged.items()))

    def port(self, name: str) -> Optional[Port]:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def with_port(self, port: Port) -> "ArchElement":
        ports = list(self.ports)
        for i, p in enumerate(ports):
            if p.name == port.name:
                ports[i] = port
                break
        else:
            ports.append(port)
        return replace(self, ports=tuple(ports))

    def endpoints(self) -> Iterator[tuple[Port, ConnectionPoint]]:
        for port in self.ports:
            for point in port.points:
                yield port, point


@dataclass(frozen=True)
class ArchitectureModel:
    name: str
    style: str
    elements: tuple[ArchElement, ...] = ()
    attachments: tuple[Attachment, ...] = ()
    annotations: tuple[ConstraintAnnotation, ...] = ()
    stage: Stage = Stage.GEIM

    def get(self, name: str) -> Optional[ArchElement]:
        for e in self.elements:
            if e.name == name:
                return e
        return None

    def element(self, name: str) -> ArchElement:
        e = self.get(name)
        if e is None:
            raise UnknownElement(name, name)
        return e

    @property
    def element_names(self) -> list[str]:
        return [e.name for e in self.elements]

    def components(self) -> list[ArchElement]:
        return [e for e in self.elements if e.kind is ElementKind.COMPONENT]

    def connectors(self) -> list[ArchElement]:
        return [e for e in self.elements if e.kind is ElementKind.CONNECTOR]

    def replace_element(self, name: str, new: ArchElement) -> "ArchitectureModel":
        elements = tuple(new if e.name == name else e for e in self.elements)
        return replace(self, elements=elements)

    def add_element(self, new: ArchElement) -> "ArchitectureModel":
        return replace(self, elements=self.elements + (new,))

    def all_annotations(self) -> list[ConstraintAnnotation]:
        """Annotations in declaration order: element-owned first, then model-level."""
        out = []
        for e in self.elements:
            out.extend(e.annotations)
        out.extend(self.annotations)
        return out


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    subject: Optional[str] = field(default=None, compare=False)

    def __str__(self):
        return f"{self.kind}: {self.message}"


def resolve_path(model: ArchitectureModel, path: PortPath) -> ConnectionPoint:
    element = model.get(path.element)
    if element is None:
        raise UnknownElement(path.element, str(path))
    port = element.port(path.port)
    if port is None:
        raise UnknownPort(path.port, str(path))
    point = port.point(path.point)
    if point is None:
        raise UnknownPoint(path.point, str(path))
    return point


def _duplicates(names: Iterable[str]) -> list[str]:
    seen, dups = set(), []
    for n in names:
        if n in seen and n not in dups:
            dups.append(n)
        seen.add(n)
    return dups


def _check_annotation(ann: ConstraintAnnotation, where: str) -> list[Violation]:
    return [Violation("InvalidIdentifier", f"{where}: bad annotation {label} {text!r}", ann.target)
            for label, text in (("category", ann.category), ("name", ann.name)) if not is_identifier(text)]


def _check_element(element: ArchElement, where: str) -> list[Violation]:
    out = []
    if not is_identifier(element.name):
        out.append(Violation("InvalidIdentifier", f"{where}: bad element name {element.name!r}", element.name))
    for dup in _duplicates(p.name for p in element.ports):
        out.append(Violation("DuplicateName", f"{where}: port {dup!r} declared twice", element.name))
    for port in element.ports:
        if not is_identifier(port.name):
            out.append(Violation("InvalidIdentifier", f"{where}: bad port name {port.name!r}", element.name))
        for dup in _duplicates(p.name for p in port.points):
            out.append(Violation("DuplicateName", f"{where}::{port.name}: point {dup!r} declared twice",
                                 element.name))
        for point in port.points:
            if not is_identifier(point.name):
                out.append(Violation("InvalidIdentifier", f"{where}::{port.name}: bad point name {point.name!r}",
                                     element.name))
    if element.style_ref is not None:
        if element.kind is not ElementKind.COMPONENT:
            out.append(Violation("InvalidStyleRef", f"{where}: only components take a style reference",
                                 element.name))
        elif not is_identifier(element.style_ref):
            out.append(Violation("InvalidIdentifier", f"{where}: bad style name {element.style_ref!r}",
                                 element.name))
    for key, _ in element.metadata:
        if not is_identifier(key):
            out.append(Violation("InvalidIdentifier", f"{where}: bad metadata key {key!r}", element.name))
    if element.behaviour is not None:
        b = element.behaviour
        names = [d.name for d in b.definitions] + [p for d in b.definitions for p in d.parameters]
        for name in names + list(b.composition):
            if not is_identifier(name):
                out.append(Violation("InvalidIdentifier", f"{where}: bad behaviour name {name!r}", element.name))
        for dup in _duplicates(d.name for d in b.definitions):
            out.append(Violation("DuplicateName", f"{where}: abstraction {dup!r} defined twice", element.name))
    for ann in element.annotations:
        out.extend(_check_annotation(ann, where))
        if ann.target != element.name:
            out.append(Violation("DanglingAnnotation",
                                 f"{ann} on {where} targets {ann.target!r}", element.name))
    for dup in _duplicates(p.name for p in element.parts):
        out.append(Violation("DuplicateName", f"{where}: part {dup!r} declared twice", element.name))
    for part in element.parts:
        out.extend(_check_element(part, f"{where}.{part.name}"))
    return out


def check_well_formed(model: ArchitectureModel) -> list[Violation]:
    """Return every structural violation in ``model``; empty means well-formed."""
    out: list[Violation] = []
    for label, ident in (("model name", model.name), ("style", model.style)):
        if not is_identifier(ident):
            out.append(Violation("InvalidIdentifier", f"bad {label} {ident!r}"))
    for dup in _duplicates(model.element_names):
        out.append(Violation("DuplicateName", f"element {dup!r} declared twice", dup))
    for element in model.elements:
        out.extend(_check_element(element, element.name))

    seen = set()
    for att in model.attachments:
        try:
            src = resolve_path(model, att.source)
            dst = resolve_path(model, att.target)
        except (UnknownElement, UnknownPort, UnknownPoint) as exc:
            out.append(Violation("DanglingAttachment", f"{att}: {exc}", str(att)))
            continue
        if src.direction is not Direction.OUT or dst.direction is not Direction.IN:
            out.append(Violation("DirectionMismatch",
                                 f"{att}: expected out -> in, got {src.direction.value} -> {dst.direction.value}",
                                 str(att)))
        if (att.source, att.target) in seen:
            out.append(Violation("DuplicateAttachment", f"{att} declared twice", str(att)))
        seen.add((att.source, att.target))

    names = set(model.element_names)
    for ann in model.annotations:
        out.extend(_check_annotation(ann, model.name))
        if ann.target is None:
            continue
        if ann.target not in names:
            out.append(Violation("DanglingAnnotation", f"{ann} targets missing element {ann.target!r}", ann.target))
        else:
            # element constraints live on the element itself
            out.append(Violation("MisplacedAnnotation", f"model-level {ann} targets element {ann.target}; "
                                 f"declare it in the element's constraint section", ann.target))
    return out


def _rename_element(element: ArchElement, rename: Mapping[str, str]) -> ArchElement:
    r = lambda n: rename.get(n, n)  # noqa: E731
    ports = tuple(
        Port(r(p.name), tuple(ConnectionPoint(r(c.name), c.direction) for c in p.points))
        for p in element.ports
    )
    behaviour = None
    if element.behaviour is not None:
        behaviour = BehaviourBlock(
            definitions=tuple(
                AbstractionDef(
                    r(d.name), d.recursive, tuple(r(x) for x in d.parameters),
                    tuple(Statement(tuple(r(t) for t in s.tokens), tuple(r(i) for i in s.invocations),
                                    s.conditional) for s in d.body),
                )
                for d in element.behaviour.definitions
            ),
            composition=tuple(r(n) for n in element.behaviour.composition),
        )
    annotations = tuple(replace(a, target=r(a.target) if a.target else None) for a in element.annotations)
    return replace(
        element,
        name=r(element.name),
        ports=ports,
        behaviour=behaviour,
        annotations=annotations,
        metadata=(),
        parts=tuple(_rename_element(p, rename) for p in element.parts),
    )


def _strip_metadata(element: ArchElement) -> ArchElement:
    return replace(element, metadata=(), parts=tuple(_strip_metadata(p) for p in element.parts))


def structurally_isomorphic(a: ArchElement, b: ArchElement, rename: Optional[Mapping[str, str]] = None) -> bool:
    """True iff ``b`` equals ``a`` once ``rename`` is applied to a's own identifiers.

    Metadata is ignored on both sides.
    """
    return _rename_element(a, rename or {}) == _strip_metadata(b)
