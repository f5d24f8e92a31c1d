"""GEDM planning: place generated services on GERM infrastructure nodes.

Hard constraints are node capacity (in abstract slots), architect pins and
replica anti-affinity; the objective is the number of distinct nodes used.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol

from .errors import Infeasible, InvalidSpec, PlanningCancelled
from .model import ArchitectureModel, ElementKind, Violation

REPLICA_KEY = "replica-group"
EXHAUSTIVE_LIMIT = 10


@dataclass(frozen=True)
class Node:
    name: str
    capacity: int
    attributes: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class InfrastructureModel:
    name: str
    nodes: tuple[Node, ...] = ()
    # sorted pairs of node names
    links: tuple[tuple[str, str], ...] = ()

    def node(self, name: str) -> Optional[Node]:
        for n in self.nodes:
            if n.name == name:
                return n
        return None

    @property
    def node_names(self) -> list[str]:
        return [n.name for n in self.nodes]


@dataclass
class DeploymentSpec:
    pins: dict[str, str] = field(default_factory=dict)
    weights: dict[str, int] = field(default_factory=dict)

    def weight(self, component: str) -> int:
        return self.weights.get(component, 1)

    @classmethod
    def from_dict(cls, data: dict) -> "DeploymentSpec":
        if not isinstance(data, dict):
            raise InvalidSpec("deployment spec must be a JSON object")
        unknown = set(data) - {"pins", "weights"}
        if unknown:
            raise InvalidSpec(f"unknown deployment spec keys: {', '.join(sorted(unknown))}")
        pins = data.get("pins", {})
        weights = data.get("weights", {})
        if not isinstance(pins, dict) or not all(isinstance(v, str) for v in pins.values()):
            raise InvalidSpec("'pins' must map component names to node names")
        if not isinstance(weights, dict) or not all(
                isinstance(v, int) and not isinstance(v, bool) for v in weights.values()):
            raise InvalidSpec("'weights' must map component names to integers")
        return cls(dict(pins), dict(weights))

    @classmethod
    def load(cls, path) -> "DeploymentSpec":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"{path}: {exc}") from None
        return cls.from_dict(data)


@dataclass
class DeploymentPlan:
    assignment: dict[str, str]
    optimal: bool
    satisfied: list[str] = field(default_factory=list)
    links: list[tuple[str, str]] = field(default_factory=list)

    @property
    def nodes_used(self) -> int:
        return len(set(self.assignment.values()))

    # spec name for the objective value
    objective = nodes_used

    def to_dict(self) -> dict:
        return {
            "assignment": dict(self.assignment),
            "nodes_used": self.nodes_used,
            "optimal": self.optimal,
            "satisfied": list(self.satisfied),
            "links": [list(link) for link in self.links],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


class CancelToken(Protocol):
    def is_set(self) -> bool: ...


def deployable_components(model: ArchitectureModel) -> list[str]:
    """First-order components, i.e. the services produced by code generation."""
    return [e.name for e in model.elements if e.kind is ElementKind.COMPONENT]


def anti_affinity_groups(model: ArchitectureModel) -> list[tuple[str, ...]]:
    """Replica groups of two or more deployable components, from ``replica-group`` metadata."""
    groups: dict[str, list[str]] = {}
    for e in model.elements:
        if e.kind is ElementKind.COMPONENT and REPLICA_KEY in e.meta:
            groups.setdefault(e.meta[REPLICA_KEY], []).append(e.name)
    return [tuple(sorted(members)) for _, members in sorted(groups.items()) if len(members) > 1]


def _validate_spec(components: list[str], infra: InfrastructureModel, spec: DeploymentSpec):
    known = set(components)
    nodes = set(infra.node_names)
    if len(nodes) != len(infra.nodes):
        raise InvalidSpec("infrastructure declares a node twice")
    for c, n in sorted(spec.pins.items()):
        if c not in known:
            raise InvalidSpec(f"pin for unknown component {c!r}")
        if n not in nodes:
            raise InvalidSpec(f"component {c} pinned to unknown node {n!r}")
    for c, w in sorted(spec.weights.items()):
        if c not in known:
            raise InvalidSpec(f"weight for unknown component {c!r}")
        if w < 0:
            raise InvalidSpec(f"weight of {c} must be non-negative")
    for n in infra.nodes:
        if n.capacity < 0:
            raise InvalidSpec(f"node {n.name} has negative capacity")


class _Search:
    def __init__(self, components, weights, nodes, capacity, groups, pins, cancel, exhaustive):
        self.components = components
        self.weights = weights
        self.nodes = nodes
        self.capacity = capacity
        self.group_of = {}
        for gi, members in enumerate(groups):
            for m in members:
                self.group_of[m] = gi
        self.cancel = cancel
        self.exhaustive = exhaustive
        self.load = {n: 0 for n in nodes}
        self.count = {n: 0 for n in nodes}
        self.group_nodes = [set() for _ in groups]
        self.assignment = {}
        for c, n in pins.items():
            self._place(c, n)
        self.best = None
        self.best_used = len(nodes) + 1
        self.remaining = sum(weights[c] for c in components)

    def _place(self, c, n):
        self.assignment[c] = n
        self.load[n] += self.weights[c]
        self.count[n] += 1
        if c in self.group_of:
            self.group_nodes[self.group_of[c]].add(n)

    def _unplace(self, c, n):
        del self.assignment[c]
        self.load[n] -= self.weights[c]
        self.count[n] -= 1
        if c in self.group_of:
            self.group_nodes[self.group_of[c]].discard(n)

    def used(self) -> int:
        return sum(1 for n in self.nodes if self.count[n])

    def candidates(self, c):
        w = self.weights[c]
        g = self.group_of.get(c)
        empty_seen = set()
        order = self.nodes
        if not self.exhaustive:
            busy = [n for n in self.nodes if self.count[n]]
            idle = sorted((n for n in self.nodes if not self.count[n]), key=lambda n: (-self.capacity[n], n))
            order = busy + idle
        for n in order:
            if self.load[n] + w > self.capacity[n]:
                continue
            if g is not None and n in self.group_nodes[g]:
                continue
            if not self.count[n]:
                # idle nodes of equal capacity are interchangeable
                if self.capacity[n] in empty_seen:
                    continue
                empty_seen.add(self.capacity[n])
            yield n

    def run(self, i: int = 0) -> bool:
        if self.cancel is not None and self.cancel.is_set():
            raise PlanningCancelled("deployment search cancelled")
        used = self.used()
        if used >= self.best_used:
            return False
        if i == len(self.components):
            self.best = dict(self.assignment)
            self.best_used = used
            return not self.exhaustive
        c = self.components[i]
        for n in self.candidates(c):
            self._place(c, n)
            try:
                if self.run(i + 1):
                    return True
            finally:
                self._unplace(c, n)
        return False


def _precheck(components, weights, infra, groups, pins):
    caps = {n.name: n.capacity for n in infra.nodes}
    for members in groups:
        if len(members) > len(infra.nodes):
            raise Infeasible(f"anti-affinity group {{{', '.join(members)}}} needs {len(members)} distinct nodes "
                             f"but {infra.name} has {len(infra.nodes)}")
        pinned = [pins[m] for m in members if m in pins]
        if len(pinned) != len(set(pinned)):
            raise Infeasible(f"anti-affinity group {{{', '.join(members)}}} has two members pinned to one node")
    pinned_load = {}
    for c, n in sorted(pins.items()):
        pinned_load[n] = pinned_load.get(n, 0) + weights[c]
    for n, load in sorted(pinned_load.items()):
        if load > caps[n]:
            raise Infeasible(f"components pinned to {n} need {load} slots but its capacity is {caps[n]}")
    biggest = max(caps.values(), default=0)
    for c in components:
        if weights[c] > biggest:
            raise Infeasible(f"component {c} needs {weights[c]} slots but no node has more than {biggest}")
    total = sum(weights[c] for c in components)
    if total > sum(caps.values()):
        raise Infeasible(f"services need {total} slots but {infra.name} offers {sum(caps.values())}")


def plan_deployment(model: ArchitectureModel, infra: InfrastructureModel, spec: Optional[DeploymentSpec] = None,
                    *, cancel: Optional[CancelToken] = None,
                    exhaustive_limit: int = EXHAUSTIVE_LIMIT) -> DeploymentPlan:
    """Assign every first-order component to a node, using as few nodes as possible.

    With at most ``exhaustive_limit`` unpinned components the search is
    exhaustive and the plan is optimal; beyond that a first-fit-decreasing
    search with backtracking returns the first feasible plan. Ties resolve
    to the lexicographically smallest assignment. Raises Infeasible.
    """
    spec = spec or DeploymentSpec()
    components = deployable_components(model)
    _validate_spec(components, infra, spec)
    weights = {c: spec.weight(c) for c in components}
    groups = anti_affinity_groups(model)
    _precheck(components, weights, infra, groups, spec.pins)

    free = sorted(c for c in components if c not in spec.pins)
    exhaustive = len(free) <= exhaustive_limit
    if not exhaustive:
        free.sort(key=lambda c: (-weights[c], c))
    search = _Search(free, weights, sorted(infra.node_names), {n.name: n.capacity for n in infra.nodes},
                     groups, spec.pins, cancel, exhaustive)
    search.run()
    if search.best is None:
        raise Infeasible("no placement satisfies the capacity and anti-affinity constraints")

    assignment = {c: search.best[c] for c in components}
    satisfied = []
    for n in infra.nodes:
        load = sum(weights[c] for c, m in assignment.items() if m == n.name)
        if load:
            satisfied.append(f"capacity: {n.name} holds {load}/{n.capacity} slots")
    for c, n in sorted(spec.pins.items()):
        satisfied.append(f"pin: {c} on {n}")
    for members in groups:
        satisfied.append(f"anti-affinity: {', '.join(members)} on distinct nodes")
    return DeploymentPlan(assignment, exhaustive, satisfied, list(infra.links))


def validate_plan(model: ArchitectureModel, infra: InfrastructureModel, spec: Optional[DeploymentSpec],
                  plan: DeploymentPlan) -> list[Violation]:
    """Independent check that ``plan`` meets every placement constraint."""
    spec = spec or DeploymentSpec()
    out = []
    components = deployable_components(model)
    caps = {n.name: n.capacity for n in infra.nodes}
    for c in components:
        if c not in plan.assignment:
            out.append(Violation("Unassigned", f"{c} is not placed", c))
    for c, n in plan.assignment.items():
        if c not in components:
            out.append(Violation("UnknownComponent", f"{c} is not a deployable component", c))
        if n not in caps:
            out.append(Violation("UnknownNode", f"{c} placed on unknown node {n}", c))
    load = {}
    for c, n in plan.assignment.items():
        load[n] = load.get(n, 0) + spec.weights.get(c, 1)
    for n, used in load.items():
        if n in caps and used > caps[n]:
            out.append(Violation("CapacityViolation", f"{n} holds {used} slots, capacity {caps[n]}", n))
    for c, n in spec.pins.items():
        if plan.assignment.get(c) != n:
            out.append(Violation("PinViolation", f"{c} pinned to {n} but placed on {plan.assignment.get(c)}", c))
    for members in anti_affinity_groups(model):
        placed = [plan.assignment[m] for m in members if m in plan.assignment]
        if len(placed) != len(set(placed)):
            out.append(Violation("AntiAffinityViolation", f"replicas {', '.join(members)} share a node",
                                 members[0]))
    return out


def load_spec(path) -> DeploymentSpec:
    return DeploymentSpec.load(path)
