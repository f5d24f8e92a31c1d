"""Turn parser trees into core-model, construct and infrastructure values."""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

from ..constructs import (ConstraintPattern, Construct, ConstructKind, Include, Remove, Rename, Replicate, Scope,
                          Unify)
from ..errors import DuplicateNode, ElaborationError, SourceSpan, UnknownNode
from ..model import (AbstractionDef, ArchElement, ArchitectureModel, Attachment, BehaviourBlock, ConnectionPoint,
                     ConstraintAnnotation, Direction, ElementKind, Port, PortPath, ServiceKind, Stage, Statement,
                     is_identifier)
from .ast import AstNode

BOOLEANS = {"true": True, "false": False}


def infer_direction(point_name: str, span: Optional[SourceSpan] = None) -> Direction:
    """Direction of an undeclared connection point, read off its name.

    ``...OutC0`` is an Out point, ``...IncC0`` / ``...InC0`` an In point.
    Names containing both markers, or neither, are rejected.
    """
    has_out = "Out" in point_name
    has_in = "In" in point_name  # also covers "Inc"
    if has_out and not has_in:
        return Direction.OUT
    if has_in and not has_out:
        return Direction.IN
    raise ElaborationError(
        f"cannot infer direction of undeclared connection point {point_name!r}; declare it with "
        f"'in point' or 'out point'", span)


def _check_ident(name: str, span: SourceSpan, what: str):
    if not is_identifier(name):
        raise ElaborationError(f"invalid {what} {name!r}", span)


def _path(node: AstNode) -> PortPath:
    return PortPath(node.attrs["element"], node.attrs["port"], node.attrs["point"])


class _ElementBuilder:
    def __init__(self, node: AstNode, templated: bool):
        self.node = node
        self.templated = templated
        self.ports: dict[str, dict[str, ConnectionPoint]] = {}
        self.props: dict[str, str] = {}
        self.meta: dict[str, str] = {}
        self.annotations: list[ConstraintAnnotation] = []
        self.definitions: list[AbstractionDef] = []
        self.composition: list[str] = []
        self.has_behaviour = False
        self.parts: list[ArchElement] = []
        self.part_names: set[str] = set()
        self.attachments: list[tuple[AstNode, AstNode]] = []

    def ident(self, name, span, what):
        if not self.templated:
            _check_ident(name, span, what)

    def build(self) -> ArchElement:
        node = self.node
        self.ident(node.value, node.span, "element name")
        for child in node.children:
            self.item(child, None)
        kind = ElementKind(node.attrs["kind"])
        service = ServiceKind(self.props.get("service", "unspecified"))
        behaviour = None
        if self.has_behaviour:
            behaviour = BehaviourBlock(tuple(self.definitions), tuple(self.composition))
        return ArchElement(
            name=node.value,
            kind=kind,
            service_kind=service,
            stateless=BOOLEANS[self.props.get("stateless", "false")],
            idempotent=BOOLEANS[self.props.get("idempotent", "false")],
            style_ref=node.attrs.get("style_ref"),
            ports=tuple(Port(p, tuple(points.values())) for p, points in self.ports.items()),
            behaviour=behaviour,
            annotations=tuple(replace(a, target=node.value) for a in self.annotations),
            metadata=tuple(self.meta.items()),
            parts=tuple(self.parts),
        )

    def item(self, child: AstNode, section: Optional[str]):
        k = child.kind
        if k == "section":
            if child.value == "behaviour":
                self.has_behaviour = True
            for c in child.children:
                self.item(c, child.value)
        elif k == "annotation":
            self.annotations.append(_annotation(child))
        elif k == "port":
            self.port(child)
        elif k == "property":
            self.prop(child)
        elif k == "meta":
            if child.value in self.meta:
                raise ElaborationError(f"metadata key {child.value!r} set twice", child.span)
            self.meta[child.value] = child.attrs["value"]
        elif k == "attachment":
            self.attachments.append((child.children[0], child.children[1]))
        elif k == "abstraction":
            self.has_behaviour = True
            self.abstraction(child)
        elif k == "compose":
            self.has_behaviour = True
            self.composition.extend(child.attrs["names"])
        elif k == "element":
            if child.value in self.part_names:
                raise ElaborationError(f"duplicate part {child.value!r} in {self.node.value}", child.span)
            self.part_names.add(child.value)
            sub = _ElementBuilder(child, self.templated)
            self.parts.append(sub.build())
            self.attachments.extend(sub.attachments)
        else:  # pragma: no cover - parser guarantees the set of kinds
            raise ElaborationError(f"unexpected {k} in element body", child.span)

    def port(self, node: AstNode):
        self.ident(node.value, node.span, "port name")
        points = self.ports.setdefault(node.value, {})
        for p in node.children:
            self.ident(p.value, p.span, "connection point name")
            if p.value in points:
                raise ElaborationError(f"connection point {p.value!r} declared twice in port {node.value}",
                                       p.span)
            points[p.value] = ConnectionPoint(p.value, Direction(p.attrs["direction"]))

    def prop(self, node: AstNode):
        key, value = node.value, node.attrs["value"]
        if key in self.props:
            raise ElaborationError(f"property {key!r} set twice", node.span)
        if key == "service":
            if value not in ("atomic", "composite"):
                raise ElaborationError(f"service kind must be atomic or composite, not {value!r}", node.span)
        elif key in ("stateless", "idempotent"):
            if value not in BOOLEANS:
                raise ElaborationError(f"{key} must be true or false, not {value!r}", node.span)
        else:
            raise ElaborationError(f"unknown property {key!r}", node.span)
        self.props[key] = value

    def abstraction(self, node: AstNode):
        if any(d.name == node.value for d in self.definitions):
            raise ElaborationError(f"abstraction {node.value!r} defined twice", node.span)
        body = tuple(
            Statement(tuple(s.attrs["tokens"]), tuple(s.attrs["invocations"]), s.attrs["conditional"])
            for s in node.children
        )
        self.definitions.append(AbstractionDef(node.value, node.attrs["recursive"],
                                               tuple(node.attrs["parameters"]), body))


def _annotation(node: AstNode) -> ConstraintAnnotation:
    a = node.attrs
    return ConstraintAnnotation(a["category"], a["name"], a["value"], a["resolved"])


def _ensure_point(element: ArchElement, path: PortPath, span: SourceSpan) -> ArchElement:
    port = element.port(path.port)
    if port is not None and port.point(path.point) is not None:
        return element
    direction = infer_direction(path.point, span)
    if port is None:
        port = Port(path.port)
    return element.with_port(port.with_point(ConnectionPoint(path.point, direction)))


def elaborate_model(ast: AstNode) -> ArchitectureModel:
    """Build a model from a ``model`` tree.

    Attachments declared inside element bodies are hoisted to the model.
    Connection points that appear only in a ``unify`` path are declared on
    the fly, with a direction inferred from the point name; paths naming an
    unknown element are kept and reported later by the well-formedness check.
    """
    _check_ident(ast.value, ast.span, "model name")
    _check_ident(ast.attrs["style"], ast.span, "style name")
    stage = Stage.GEIM
    if ast.attrs.get("stage"):
        try:
            stage = Stage(ast.attrs["stage"])
        except ValueError:
            raise ElaborationError(f"unknown stage {ast.attrs['stage']!r}", ast.span) from None

    elements: dict[str, ArchElement] = {}
    attachment_nodes: list[tuple[AstNode, AstNode]] = []
    annotations: list[ConstraintAnnotation] = []

    def add_element(node: AstNode):
        if node.value in elements:
            raise ElaborationError(f"duplicate element {node.value!r}", node.span)
        builder = _ElementBuilder(node, templated=False)
        elements[node.value] = builder.build()
        attachment_nodes.extend(builder.attachments)

    for child in ast.children:
        if child.kind == "annotation":
            annotations.append(_annotation(child))
            continue
        for item in child.children:
            if item.kind == "element":
                add_element(item)
            elif item.kind == "attachment":
                attachment_nodes.append((item.children[0], item.children[1]))
            elif item.kind == "annotation":
                annotations.append(_annotation(item))

    attachments = []
    for first, second in attachment_nodes:
        paths = []
        for node in (first, second):
            path = _path(node)
            for seg in (path.element, path.port, path.point):
                _check_ident(seg, node.span, "path segment")
            owner = elements.get(path.element)
            if owner is not None:
                elements[path.element] = _ensure_point(owner, path, node.span)
            paths.append(path)
        attachments.append(_orient(elements, paths[0], paths[1]))

    return ArchitectureModel(
        name=ast.value,
        style=ast.attrs["style"],
        elements=tuple(elements.values()),
        attachments=tuple(attachments),
        annotations=tuple(annotations),
        stage=stage,
    )


def _orient(elements: dict[str, ArchElement], a: PortPath, b: PortPath) -> Attachment:
    """Put the Out endpoint first when both directions are known."""
    da, db = _direction(elements, a), _direction(elements, b)
    if da is Direction.IN and db is Direction.OUT:
        return Attachment(b, a)
    return Attachment(a, b)


def _direction(elements, path: PortPath) -> Optional[Direction]:
    e = elements.get(path.element)
    port = e.port(path.port) if e else None
    point = port.point(path.point) if port else None
    return point.direction if point else None


def elaborate_element(node: AstNode, templated: bool = False) -> ArchElement:
    return _ElementBuilder(node, templated).build()


def elaborate_construct(ast: AstNode, provenance: Optional[str] = None) -> Construct:
    """Build a construct from a ``construct`` tree.

    Points referenced by a ``unify`` but missing from an element the same
    construct includes are added to that element's declaration.
    """
    _check_ident(ast.value, ast.span, "construct name")
    key_node, *scope_nodes = ast.children
    if key_node.attrs["resolved"]:
        raise ElaborationError("a construct key cannot be marked resolved", key_node.span)
    key = ConstraintPattern(key_node.attrs["category"], key_node.attrs["name"], key_node.attrs["value"])
    if not scope_nodes:
        raise ElaborationError(f"construct {ast.value} has no 'on ... actions' scope", ast.span)

    included: dict[str, ArchElement] = {}
    for node in ast.walk():
        if node.kind == "action" and node.value == "include":
            el = elaborate_element(node.children[0], templated=True)
            if el.name in included:
                raise ElaborationError(f"element {el.name!r} included twice", node.span)
            included[el.name] = el
    for node in ast.walk():
        if node.kind == "action" and node.value == "unify":
            for p in node.children:
                path = _path(p)
                if path.element in included:
                    included[path.element] = _ensure_point(included[path.element], path, p.span)

    def scope(node: AstNode) -> Scope:
        body = []
        for child in node.children:
            if child.kind == "scope":
                body.append(scope(child))
                continue
            verb = child.value
            if verb == "include":
                body.append(Include(included[child.children[0].value]))
            elif verb == "replicate":
                body.append(Replicate(child.attrs["source"], child.attrs["target"]))
            elif verb == "unify":
                body.append(Unify(_path(child.children[0]), _path(child.children[1])))
            elif verb == "remove":
                body.append(Remove(child.attrs["name"]))
            elif verb == "rename":
                body.append(Rename(child.attrs["old"], child.attrs["new"]))
        return Scope(node.value, node.attrs["level"], tuple(body))

    return Construct(
        name=ast.value,
        kind=ConstructKind(ast.attrs["kind"]),
        key=key,
        scopes=tuple(scope(s) for s in scope_nodes),
        provenance=provenance,
    )


def elaborate_infrastructure(ast: AstNode):
    from ..deploy import InfrastructureModel, Node

    nodes: dict[str, Node] = {}
    for child in ast.of_kind("node"):
        if child.value in nodes:
            raise DuplicateNode(f"node {child.value!r} declared twice", child.span)
        capacity = None
        attributes = {}
        for key, value, span in child.attrs["attributes"]:
            if key in attributes or (key == "capacity" and capacity is not None):
                raise ElaborationError(f"attribute {key!r} set twice on node {child.value}", span)
            if key == "capacity":
                if not value.isdigit():
                    raise ElaborationError(f"capacity must be a non-negative integer, not {value!r}", span)
                capacity = int(value)
            else:
                attributes[key] = value
        if capacity is None:
            raise ElaborationError(f"node {child.value} has no capacity", child.span)
        nodes[child.value] = Node(child.value, capacity, tuple(sorted(attributes.items())))
    links = []
    for child in ast.of_kind("link"):
        a, b = child.attrs["a"], child.attrs["b"]
        for n in (a, b):
            if n not in nodes:
                raise UnknownNode(f"link references unknown node {n!r}", child.span)
        if a == b:
            raise ElaborationError(f"node {a} linked to itself", child.span)
        pair = tuple(sorted((a, b)))
        if pair not in links:
            links.append(pair)
    return InfrastructureModel(ast.value, tuple(nodes.values()), tuple(sorted(links)))
