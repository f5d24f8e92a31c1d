"""Weaving constructs into architecture models by deterministic rewriting."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields, is_dataclass, replace
from enum import Enum
from typing import Optional

from .constructs import (ARCHITECTURAL_ELEMENT, ARCHITECTURE, Construct, ConstructKind, Include, Remove, Rename,
                         Replicate, Scope, Unify)
from .errors import (ConstructError, ConstructMismatch, DirectionConflict, ForgeError, NameCollision, PathError,
                     RewriteError, ScopeTargetMissing, SelfUnify, UnknownElement, UnknownPath)
from .library import Library, lookup
from .model import (ArchElement, ArchitectureModel, Attachment, ConstraintAnnotation, Direction, Stage, Violation,
                    check_well_formed, is_identifier, resolve_path)

ORIGIN_KEY = "origin-construct"
REPLICA_KEY = "replica-group"
MAX_WEAVE_ROUNDS = 1000

_PLACEHOLDER = re.compile(r"\$\{([A-Za-z_]\w*)\}")


class StageFilter(str, Enum):
    QOS = "qos"
    PLATFORM = "platform"
    ALL = "all"

    def admits(self, kind: ConstructKind) -> bool:
        if self is StageFilter.ALL:
            return True
        return (self is StageFilter.QOS) == (kind is ConstructKind.QOS)


STAGE_AFTER = {ConstructKind.QOS: Stage.WOVEN_QOS, ConstructKind.PLATFORM: Stage.WOVEN_PLATFORM}


class WeaveError(ForgeError):
    """A construct failed during weaving; carries the partial report and model."""

    def __init__(self, cause: Exception, report: "WeaveReport", model: ArchitectureModel):
        super().__init__(str(cause))
        self.cause = cause
        self.report = report
        self.model = model


# -- single actions ---------------------------------------------------------

def _require(model: ArchitectureModel, name: str) -> ArchElement:
    element = model.get(name)
    if element is None:
        raise UnknownElement(name, name)
    return element


def _check_new_name(model: ArchitectureModel, name: str):
    if not is_identifier(name):
        raise RewriteError(f"invalid element name {name!r}")
    if model.get(name) is not None:
        raise NameCollision(f"element {name!r} already exists")


def apply_action(model: ArchitectureModel, action) -> ArchitectureModel:
    """Apply one rewrite action, returning a new model."""
    if isinstance(action, Include):
        new = action.element
        _check_new_name(model, new.name)
        bad = [v for v in check_well_formed(ArchitectureModel("m", "s", (new,))) if v.kind != "DanglingAnnotation"]
        if bad:
            raise RewriteError(f"included element {new.name} is malformed: {bad[0].message}")
        return model.add_element(replace(new, annotations=tuple(replace(a, target=new.name)
                                                                     for a in new.annotations)))

    if isinstance(action, Replicate):
        source = _require(model, action.source)
        _check_new_name(model, action.target)
        group = source.meta.get(REPLICA_KEY, source.name)
        source = source.with_metadata(**{REPLICA_KEY: group})
        clone = replace(source, name=action.target,
                        annotations=tuple(replace(a, target=action.target) for a in source.annotations))
        return model.replace_element(source.name, source).add_element(clone)

    if isinstance(action, Unify):
        if action.first == action.second:
            raise SelfUnify(f"cannot unify {action.first} with itself")
        points = []
        for path in (action.first, action.second):
            try:
                points.append(resolve_path(model, path))
            except PathError as exc:
                raise UnknownPath(str(exc)) from exc
        a, b = points
        if a.direction is b.direction:
            raise DirectionConflict(
                f"{action.first} and {action.second} are both {a.direction.value} points")
        att = Attachment(action.first, action.second)
        if a.direction is Direction.IN:
            att = Attachment(action.second, action.first)
        if att in model.attachments:
            return model
        return replace(model, attachments=model.attachments + (att,))

    if isinstance(action, Remove):
        _require(model, action.name)
        return replace(
            model,
            elements=tuple(e for e in model.elements if e.name != action.name),
            attachments=tuple(a for a in model.attachments if not a.touches(action.name)),
            annotations=tuple(a for a in model.annotations if a.target != action.name),
        )

    if isinstance(action, Rename):
        _require(model, action.old)
        _check_new_name(model, action.new)
        return _rename(model, action.old, action.new)

    raise TypeError(f"not a rewrite action: {action!r}")


def _rename(model: ArchitectureModel, old: str, new: str) -> ArchitectureModel:
    def fix_path(p):
        return p.with_element(new) if p.element == old else p

    def fix_ann(a):
        return replace(a, target=new) if a.target == old else a

    elements = []
    for e in model.elements:
        if e.name == old:
            e = replace(e, name=new, annotations=tuple(fix_ann(a) for a in e.annotations))
        if e.meta.get(REPLICA_KEY) == old:
            e = e.with_metadata(**{REPLICA_KEY: new})
        elements.append(e)
    return replace(
        model,
        elements=tuple(elements),
        attachments=tuple(Attachment(fix_path(a.source), fix_path(a.target)) for a in model.attachments),
        annotations=tuple(fix_ann(a) for a in model.annotations),
    )


# -- constructs -------------------------------------------------------------

def _substitute(obj, env: dict[str, str]):
    if isinstance(obj, Enum):
        return obj
    if isinstance(obj, str):
        def sub(m):
            if m.group(1) not in env:
                raise RewriteError(f"unknown placeholder ${{{m.group(1)}}}")
            return env[m.group(1)]
        return _PLACEHOLDER.sub(sub, obj)
    if isinstance(obj, tuple):
        return tuple(_substitute(x, env) for x in obj)
    if is_dataclass(obj):
        return replace(obj, **{f.name: _substitute(getattr(obj, f.name), env) for f in fields(obj) if f.init})
    return obj


def instantiate(construct: Construct, annotation: ConstraintAnnotation, model_name: str = "") -> Construct:
    """Fill ``${value}``-style placeholders from the matched annotation."""
    env = {
        "value": annotation.value,
        "category": annotation.category,
        "name": annotation.name,
        "target": annotation.target or model_name,
    }
    return _substitute(construct, env)


def _find_annotation(model: ArchitectureModel, annotation: ConstraintAnnotation):
    """(owner name or None, index) of the first unresolved copy of ``annotation``."""
    if annotation.target is None:
        pool = model.annotations
    else:
        owner = model.get(annotation.target)
        if owner is None:
            raise ConstructMismatch(f"annotation {annotation} targets missing element {annotation.target!r}")
        pool = owner.annotations
    for i, a in enumerate(pool):
        if a.key == annotation.key and not a.resolved:
            return i
    raise ConstructMismatch(f"no unresolved annotation {annotation} on {annotation.target or model.name}")


def mark_resolved(model: ArchitectureModel, annotation: ConstraintAnnotation) -> ArchitectureModel:
    i = _find_annotation(model, annotation)
    if annotation.target is None:
        anns = list(model.annotations)
        anns[i] = replace(anns[i], resolved=True)
        return replace(model, annotations=tuple(anns))
    owner = model.element(annotation.target)
    anns = list(owner.annotations)
    anns[i] = replace(anns[i], resolved=True)
    return model.replace_element(owner.name, replace(owner, annotations=tuple(anns)))


def apply_construct(model: ArchitectureModel, construct: Construct,
                    annotation: ConstraintAnnotation) -> ArchitectureModel:
    """Weave ``construct`` into ``model`` in response to ``annotation``.

    All actions run as one step: on any failure the exception propagates and
    the caller's model is untouched. The consumed annotation is marked
    resolved before the actions run, so replicas copy it as resolved.
    """
    if annotation.resolved:
        raise ConstructMismatch(f"annotation {annotation} is already resolved")
    if not construct.key.matches(annotation):
        raise ConstructMismatch(f"construct {construct.name} (key {construct.key}) does not match {annotation}")
    work = mark_resolved(model, annotation)
    script = instantiate(construct, annotation, model.name)
    counter = 0

    def run(scope: Scope):
        nonlocal work, counter
        if scope.level == ARCHITECTURAL_ELEMENT and work.get(scope.target) is None:
            raise ScopeTargetMissing(f"construct {construct.name}: scope target {scope.target!r} not in model")
        for item in scope.body:
            if isinstance(item, Scope):
                run(item)
                continue
            if isinstance(item, Include):
                item = Include(item.element.with_metadata(**{ORIGIN_KEY: construct.name}))
            try:
                work = apply_action(work, item)
            except ForgeError as exc:
                raise ConstructError(construct.name, counter, exc) from exc
            counter += 1

    for scope in script.scopes:
        run(scope)
    return work


# -- resolution and weaving -------------------------------------------------

@dataclass(frozen=True)
class Resolution:
    annotation: ConstraintAnnotation
    construct: Optional[Construct]
    kind: ConstructKind

    @property
    def matched(self) -> bool:
        return self.construct is not None


def _unmatched_kind(library: Library, category: str) -> ConstructKind:
    platform = {c.key.category for c in library if c.kind is ConstructKind.PLATFORM}
    qos = {c.key.category for c in library if c.kind is ConstructKind.QOS}
    if category in platform and category not in qos:
        return ConstructKind.PLATFORM
    return ConstructKind.QOS


def resolve_constraints(model: ArchitectureModel, library: Library,
                        stage: StageFilter = StageFilter.ALL) -> list[Resolution]:
    """Pair each unresolved annotation admitted by ``stage`` with its construct.

    Annotations without a construct come back with ``construct=None``. An
    unmatched annotation counts as Platform only when its category is used
    exclusively by Platform constructs in the library.
    """
    stage = StageFilter(stage)
    out = []
    for ann in model.all_annotations():
        if ann.resolved:
            continue
        construct = lookup(library, ann)
        kind = construct.kind if construct else _unmatched_kind(library, ann.category)
        if stage.admits(kind):
            out.append(Resolution(ann, construct, kind))
    return out


@dataclass(frozen=True)
class ModelSummary:
    name: str
    stage: str
    elements: int
    attachments: int
    unresolved: int

    @classmethod
    def of(cls, model: ArchitectureModel) -> "ModelSummary":
        return cls(model.name, model.stage.value, len(model.elements), len(model.attachments),
                   sum(1 for a in model.all_annotations() if not a.resolved))


@dataclass(frozen=True)
class AppliedConstruct:
    annotation: ConstraintAnnotation
    construct: str
    kind: ConstructKind
    action_count: int
    element_actions: int = 0

    @property
    def architecture_actions(self) -> int:
        return self.action_count - self.element_actions


@dataclass
class WeaveReport:
    stage_filter: StageFilter
    before: ModelSummary
    after: Optional[ModelSummary] = None
    applied: list[AppliedConstruct] = field(default_factory=list)
    unmatched: list[ConstraintAnnotation] = field(default_factory=list)
    violations: list[Violation] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [f"weave {self.before.name} (stage filter: {self.stage_filter.value})",
                 f"  before: {_summary(self.before)}"]
        if self.after is not None:
            lines.append(f"  after:  {_summary(self.after)}")
        lines.append(f"  applied: {len(self.applied)}")
        for a in self.applied:
            where = a.annotation.target or "<model>"
            lines.append(f"    {a.annotation} on {where} -> {a.construct} ({a.kind.label}, {a.action_count} actions: "
                         f"{a.architecture_actions} architecture-scope, {a.element_actions} element-scope)")
        lines.append(f"  unmatched: {len(self.unmatched)}")
        for ann in self.unmatched:
            lines.append(f"    {ann} on {ann.target or '<model>'}")
        lines.append(f"  violations: {len(self.violations)}")
        for v in self.violations:
            lines.append(f"    {v}")
        return "\n".join(lines) + "\n"

    def to_keyvalue(self) -> str:
        """``key=value`` lines, one fact per line."""
        kv = [("model", self.before.name), ("stage-filter", self.stage_filter.value)]
        for label, s in (("before", self.before), ("after", self.after)):
            if s is None:
                continue
            kv += [(f"{label}.stage", s.stage), (f"{label}.elements", s.elements),
                   (f"{label}.attachments", s.attachments), (f"{label}.unresolved", s.unresolved)]
        kv.append(("applied.count", len(self.applied)))
        for i, a in enumerate(self.applied):
            kv += [(f"applied.{i}.annotation", f"{a.annotation.category}::{a.annotation.name}::{a.annotation.value}"),
                   (f"applied.{i}.target", a.annotation.target or ""),
                   (f"applied.{i}.construct", a.construct),
                   (f"applied.{i}.kind", a.kind.label),
                   (f"applied.{i}.actions", a.action_count),
                   (f"applied.{i}.element-actions", a.element_actions)]
        kv.append(("unmatched.count", len(self.unmatched)))
        for i, ann in enumerate(self.unmatched):
            kv += [(f"unmatched.{i}.annotation", f"{ann.category}::{ann.name}::{ann.value}"),
                   (f"unmatched.{i}.target", ann.target or "")]
        kv.append(("violations.count", len(self.violations)))
        for i, v in enumerate(self.violations):
            kv.append((f"violations.{i}", str(v)))
        return "".join(f"{k}={v}\n" for k, v in kv)


def _summary(s: ModelSummary) -> str:
    return (f"stage {s.stage}, {s.elements} elements, {s.attachments} attachments, "
            f"{s.unresolved} unresolved annotations")


def weave(model: ArchitectureModel, library: Library,
          stage: StageFilter = StageFilter.ALL) -> tuple[ArchitectureModel, WeaveReport]:
    """Resolve and apply constructs until no admitted annotation is left to weave.

    QoS constructs are applied before Platform ones; within a stage the
    order is declaration order. Annotations introduced by a construct (for
    instance on a replica) are picked up in the same call, so a second call
    is the identity.
    """
    stage = StageFilter(stage)
    order = [StageFilter.QOS, StageFilter.PLATFORM] if stage is StageFilter.ALL else [stage]
    report = WeaveReport(stage, ModelSummary.of(model))
    current = model
    rounds = 0
    progressed = True
    while progressed:
        progressed = False
        for st in order:
            while True:
                pending = [r for r in resolve_constraints(current, library, st) if r.matched]
                if not pending:
                    break
                rounds += 1
                if rounds > MAX_WEAVE_ROUNDS:
                    raise WeaveError(RewriteError("weaving does not terminate"), report, current)
                r = pending[0]
                try:
                    woven = apply_construct(current, r.construct, r.annotation)
                except ForgeError as exc:
                    report.after = ModelSummary.of(current)
                    raise WeaveError(exc, report, current) from exc
                target = STAGE_AFTER[r.construct.kind]
                if target.rank > woven.stage.rank:
                    woven = replace(woven, stage=target)
                current = woven
                actions = r.construct.actions()
                scoped = sum(1 for scope, _ in actions if scope.level != ARCHITECTURE)
                report.applied.append(AppliedConstruct(r.annotation, r.construct.name, r.construct.kind,
                                                       len(actions), scoped))
                progressed = True
        if len(order) == 1:
            break
    report.unmatched = [r.annotation for r in resolve_constraints(current, library, stage) if not r.matched]
    report.after = ModelSummary.of(current)
    report.violations = check_refinement(model, current)
    return current, report


def check_refinement(before: ArchitectureModel, after: ArchitectureModel) -> list[Violation]:
    """Structural preservation of ``before`` inside ``after``; empty means preserved."""
    out = []
    for old in before.elements:
        new = after.get(old.name)
        if new is None:
            out.append(Violation("MissingElement", f"element {old.name} disappeared", old.name))
            continue
        if new.kind is not old.kind:
            out.append(Violation("KindChanged", f"{old.name} changed from {old.kind.value} to {new.kind.value}",
                                 old.name))
        for port, point in old.endpoints():
            new_port = new.port(port.name)
            if new_port is None:
                out.append(Violation("MissingPort", f"{old.name}::{port.name} disappeared", old.name))
                continue
            new_point = new_port.point(point.name)
            if new_point is None:
                out.append(Violation("MissingPoint", f"{old.name}::{port.name}::{point.name} disappeared",
                                     old.name))
            elif new_point.direction is not point.direction:
                out.append(Violation("DirectionChanged", f"{old.name}::{port.name}::{point.name} changed direction",
                                     old.name))
    kept = set(after.attachments)
    for att in before.attachments:
        if att not in kept:
            out.append(Violation("MissingAttachment", f"attachment {att} disappeared", str(att)))
    known = {a.key for a in before.all_annotations()}
    for ann in after.all_annotations():
        if ann.resolved and ann.key not in known:
            out.append(Violation("UnjustifiedResolution",
                                 f"{ann} on {ann.target or after.name} is resolved but was never required",
                                 ann.target))
    out.extend(check_well_formed(after))
    return out
