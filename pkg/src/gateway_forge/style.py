"""Science Gateway architectural style rules and behaviour reference checks."""

from __future__ import annotations

from typing import Iterator

from .model import SCIENCE_GATEWAY_STYLE, ArchElement, ArchitectureModel, ElementKind, ServiceKind, Violation


def _walk(elements) -> Iterator[ArchElement]:
    for e in elements:
        yield e
        yield from _walk(e.parts)


def check_gateway_style(model: ArchitectureModel) -> list[Violation]:
    """Atomic services are stateless and idempotent; composite services are
    stateful and declare the behaviour that orchestrates them."""
    out = []
    if model.style == SCIENCE_GATEWAY_STYLE and not any(e.kind is ElementKind.COMPONENT for e in model.elements):
        out.append(Violation("NoComponents", f"{model.name} follows {SCIENCE_GATEWAY_STYLE} but has no component"))
    for e in _walk(model.elements):
        if e.service_kind is ServiceKind.ATOMIC:
            if not e.stateless:
                out.append(Violation("StatelessViolation", f"atomic service {e.name} must be stateless", e.name))
            if not e.idempotent:
                out.append(Violation("IdempotenceViolation", f"atomic service {e.name} must be declared idempotent",
                                     e.name))
        elif e.service_kind is ServiceKind.COMPOSITE:
            if e.stateless:
                out.append(Violation("StatefulnessViolation", f"composite service {e.name} must be stateful",
                                     e.name))
            if e.behaviour is None or e.behaviour.is_empty:
                out.append(Violation("MissingBehaviour",
                                     f"composite service {e.name} declares no orchestration behaviour", e.name))
    return out


def check_behaviour_refs(model: ArchitectureModel) -> list[Violation]:
    out = []
    for e in _walk(model.elements):
        if e.behaviour is None:
            continue
        defined = {d.name for d in e.behaviour.definitions}
        reported = set()
        for name in e.behaviour.invoked_names():
            if name not in defined and name not in reported:
                reported.add(name)
                out.append(Violation("UndefinedAbstraction", f"{e.name} invokes undefined abstraction {name}()",
                                     e.name))
    return out
