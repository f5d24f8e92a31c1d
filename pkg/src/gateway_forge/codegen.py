"""GESA emission: service manifests, connector descriptors and a DOT graph."""

from __future__ import annotations

import json
import logging
from enum import Enum
from pathlib import Path
from typing import Optional, Protocol

from .errors import NameCollision
from .model import ArchElement, ArchitectureModel, ElementKind, ServiceKind, Stage

log = logging.getLogger(__name__)

INDEX_FILE = "gesa-index.json"
MANIFEST_SUFFIX = ".manifest.json"


class Granularity(str, Enum):
    COMPLEX_OBJECTS = "complex-objects"
    MONOLITH = "monolith"


class Emitter(Protocol):
    suffix: str

    def render(self, document: dict) -> str: ...


class JsonEmitter:
    suffix = MANIFEST_SUFFIX

    def render(self, document: dict) -> str:
        return json.dumps(document, indent=2, ensure_ascii=False) + "\n"


def _service_kind(e: ArchElement) -> str:
    if e.service_kind is ServiceKind.UNSPECIFIED:
        return "atomic" if e.stateless else "composite"
    return e.service_kind.value


def _operations(e: ArchElement) -> list[str]:
    return [d.name for d in e.behaviour.definitions] if e.behaviour else []


def _endpoints(e: ArchElement, qualify: bool = False) -> list[dict]:
    prefix = f"{e.name}::" if qualify else ""
    return [{"port": prefix + port.name, "point": point.name, "direction": point.direction.value}
            for port, point in e.endpoints()]


def _object(e: ArchElement) -> dict:
    doc = {"name": e.name, "kind": e.kind.value, "operations": _operations(e), "endpoints": _endpoints(e)}
    if e.parts:
        doc["objects"] = [_object(p) for p in e.parts]
    return doc


def _wiring(model: ArchitectureModel, e: ArchElement) -> list[dict]:
    """Outgoing links; calls into a connector are followed to the services behind it."""
    out = []
    for att in model.attachments:
        if att.source.element != e.name:
            continue
        target = model.get(att.target.element)
        if target is None:
            continue
        if target.kind is ElementKind.CONNECTOR:
            behind = [a.target.element for a in model.attachments
                      if a.source.element == target.name and a.target.element != e.name]
            if behind:
                out.extend({"to_service": s, "via": target.name} for s in behind)
                continue
        out.append({"to_service": target.name, "via": None})
    return out


def service_manifest(model: ArchitectureModel, e: ArchElement) -> dict:
    doc = {
        "service": e.name,
        "kind": _service_kind(e),
        "stateless": e.stateless,
        "operations": _operations(e),
        "endpoints": _endpoints(e),
        "wiring": _wiring(model, e),
        "metadata": dict(e.metadata),
    }
    if e.parts:
        doc["objects"] = [_object(p) for p in e.parts]
    return doc


def connector_descriptor(model: ArchitectureModel, e: ArchElement) -> dict:
    routing = []
    for att in model.attachments:
        if att.target.element == e.name:
            routing.append({"service": att.source.element, "endpoint": str(att.source), "direction": "in"})
        elif att.source.element == e.name:
            routing.append({"service": att.target.element, "endpoint": str(att.target), "direction": "out"})
    return {
        "connector": e.name,
        "kind": "connector",
        "operations": _operations(e),
        "endpoints": _endpoints(e),
        "routing": routing,
        "metadata": dict(e.metadata),
    }


def monolith_manifest(model: ArchitectureModel) -> dict:
    ops, endpoints = [], []
    for e in model.elements:
        ops.extend(f"{e.name}::{op}" for op in _operations(e))
        endpoints.extend(_endpoints(e, qualify=True))
    return {
        "service": model.name,
        "kind": "composite",
        "stateless": False,
        "operations": ops,
        "endpoints": endpoints,
        "wiring": [],
        "metadata": {"granularity": Granularity.MONOLITH.value},
    }


def build_artifacts(model: ArchitectureModel, granularity: Granularity) -> list[tuple[str, dict]]:
    """(file stem, document) pairs in emission order."""
    granularity = Granularity(granularity)
    if granularity is Granularity.MONOLITH:
        return [(model.name, monolith_manifest(model))] if model.elements else []
    docs = []
    for e in model.elements:
        if e.kind is ElementKind.COMPONENT:
            docs.append((e.name, service_manifest(model, e)))
        else:
            docs.append((e.name, connector_descriptor(model, e)))
    return docs


def emit_manifests(model: ArchitectureModel, granularity: Granularity, out_dir,
                   emitter: Optional[Emitter] = None) -> list[Path]:
    """Write one manifest per first-order component, one descriptor per connector, and the index."""
    emitter = emitter or JsonEmitter()
    if model.stage is not Stage.WOVEN_PLATFORM:
        log.warning("generating artifacts for %s at stage %s (expected %s)",
                    model.name, model.stage.value, Stage.WOVEN_PLATFORM.value)
    docs = build_artifacts(model, granularity)
    seen = {}
    for stem, _ in docs:
        folded = stem.casefold()
        if folded in seen:
            raise NameCollision(f"artifacts for {seen[folded]} and {stem} collide on case-insensitive filesystems")
        seen[folded] = stem
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    names = []
    for stem, doc in docs:
        path = out_dir / f"{stem}{emitter.suffix}"
        path.write_text(emitter.render(doc), encoding="utf-8")
        written.append(path)
        names.append(path.name)
    index = {"model": model.name, "stage": model.stage.value, "artifacts": names}
    index_path = out_dir / INDEX_FILE
    index_path.write_text(json.dumps(index, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    written.append(index_path)
    return written


def _dot_id(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def render_graph(model: ArchitectureModel) -> str:
    lines = [f"digraph {_dot_id(model.name)} {{", "  rankdir=LR;"]
    for e in model.elements:
        shape = "box" if e.kind is ElementKind.COMPONENT else "diamond"
        lines.append(f"  {_dot_id(e.name)} [shape={shape}];")
    for att in model.attachments:
        label = f"{att.source.port}::{att.source.point} → {att.target.port}::{att.target.point}"
        lines.append(f"  {_dot_id(att.source.element)} -> {_dot_id(att.target.element)} [label={_dot_id(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_graph(model: ArchitectureModel, out_path=None) -> str:
    """Graphviz DOT rendering of ``model``; also written to ``out_path`` when given."""
    text = render_graph(model)
    if out_path is not None:
        Path(out_path).write_text(text, encoding="utf-8")
    return text
