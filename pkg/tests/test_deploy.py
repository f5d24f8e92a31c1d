from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gateway_forge import (DeploymentPlan, DeploymentSpec, anti_affinity_groups, plan_deployment, read_infrastructure,
                           validate_plan)
from gateway_forge.errors import Infeasible, InvalidSpec, PlanningCancelled
from oracles import brute_force, enumerate_instances, placement_instance


def test_mammogrid_two_nodes(woven_mammogrid, fixtures):
    infra = read_infrastructure((fixtures / "two-node.germ").read_text())
    plan = plan_deployment(woven_mammogrid, infra)
    assert plan.optimal and plan.nodes_used == 2
    assert plan.assignment["mammogridDataProxy"] != plan.assignment["mammogridDataProxyClone0"]
    assert sorted(plan.assignment) == sorted(e.name for e in woven_mammogrid.components())
    assert validate_plan(woven_mammogrid, infra, None, plan) == []
    feasible, used, _ = brute_force(woven_mammogrid, infra, DeploymentSpec())
    assert feasible and used == plan.objective
    assert anti_affinity_groups(woven_mammogrid) == [("mammogridDataProxy", "mammogridDataProxyClone0")]


def test_single_node_takes_everything(mammogrid, fixtures):
    infra = read_infrastructure((fixtures / "one-node.germ").read_text())
    plan = plan_deployment(mammogrid, infra)
    assert set(plan.assignment.values()) == {"onlyNode"}


def test_single_node_with_replicas_is_infeasible(woven_mammogrid, fixtures):
    infra = read_infrastructure((fixtures / "one-node.germ").read_text())
    with pytest.raises(Infeasible) as info:
        plan_deployment(woven_mammogrid, infra)
    assert "mammogridDataProxyClone0" in str(info.value)


def test_plan_json_shape(woven_mammogrid, fixtures):
    infra = read_infrastructure((fixtures / "two-node.germ").read_text())
    doc = json.loads(plan_deployment(woven_mammogrid, infra).to_json())
    assert {"assignment", "nodes_used", "optimal", "satisfied"} <= set(doc)
    assert doc["nodes_used"] == 2 and doc["optimal"] is True
    assert any(s.startswith("anti-affinity") for s in doc["satisfied"])


def test_validate_plan_negatives():
    model, infra, spec = placement_instance(3, (2, 2), group=(0, 1))
    shared = DeploymentPlan({"c0": "n0", "c1": "n0", "c2": "n1"}, True)
    assert [v.kind for v in validate_plan(model, infra, spec, shared)] == ["AntiAffinityViolation"]
    # total weight = capacity + 1 on one node
    over = DeploymentPlan({"c0": "n0", "c1": "n1", "c2": "n0"}, True)
    spec = DeploymentSpec(weights={"c2": 2})
    assert [v.kind for v in validate_plan(model, infra, spec, over)] == ["CapacityViolation"]
    missing = DeploymentPlan({"c0": "n0", "c1": "n1", "cX": "n9"}, True)
    kinds = sorted(v.kind for v in validate_plan(model, infra, None, missing))
    assert kinds == ["Unassigned", "UnknownComponent", "UnknownNode"]
    pinned = DeploymentPlan({"c0": "n0", "c1": "n1", "c2": "n1"}, True)
    assert [v.kind for v in validate_plan(model, infra, DeploymentSpec(pins={"c2": "n0"}), pinned)] == \
        ["PinViolation"]


def test_pins_are_respected():
    model, infra, _ = placement_instance(3, (3, 3))
    plan = plan_deployment(model, infra, DeploymentSpec(pins={"c1": "n1"}))
    assert plan.assignment["c1"] == "n1"
    assert plan.nodes_used == 1
    assert set(plan.assignment.values()) == {"n1"}


@pytest.mark.parametrize("spec, message", [
    (DeploymentSpec(pins={"ghost": "n0"}), "unknown component"),
    (DeploymentSpec(pins={"c0": "n9"}), "unknown node"),
    (DeploymentSpec(weights={"c0": -1}), "non-negative"),
])
def test_invalid_specs(spec, message):
    model, infra, _ = placement_instance(2, (2,))
    with pytest.raises(InvalidSpec, match=message):
        plan_deployment(model, infra, spec)


def test_spec_from_json(tmp_path):
    path = tmp_path / "deploy.json"
    path.write_text('{"pins": {"c0": "n1"}, "weights": {"c1": 2}}')
    spec = DeploymentSpec.load(path)
    assert spec.pins == {"c0": "n1"} and spec.weight("c1") == 2 and spec.weight("c0") == 1
    path.write_text('{"pins": [], "extra": 1}')
    with pytest.raises(InvalidSpec):
        DeploymentSpec.load(path)
    path.write_text("{nope")
    with pytest.raises(InvalidSpec):
        DeploymentSpec.load(path)


@pytest.mark.parametrize("caps, group, weights, pins", [
    ((1,), (0, 1), None, None),
    ((3, 3), (), {"c0": 4}, None),
    ((2, 2), (), None, {"c0": "n0", "c1": "n0", "c2": "n0"}),
    ((1, 1), (0, 1), None, {"c0": "n0", "c1": "n0"}),
    ((1, 1), (), None, None),
])
def test_infeasible_witnesses(caps, group, weights, pins):
    model, infra, spec = placement_instance(3, caps, group, weights, pins)
    assert not brute_force(model, infra, spec)[0]
    with pytest.raises(Infeasible):
        plan_deployment(model, infra, spec)


def test_oracle_equivalence_small_enumeration():
    checked = 0
    for model, infra, spec in enumerate_instances(max_components=4, max_nodes=3):
        feasible, used, first = brute_force(model, infra, spec)
        try:
            plan = plan_deployment(model, infra, spec)
        except Infeasible:
            assert not feasible
            continue
        assert feasible and plan.nodes_used == used
        assert plan.assignment == first
        assert validate_plan(model, infra, spec, plan) == []
        checked += 1
    assert checked > 50


@st.composite
def weighted_instances(draw):
    n = draw(st.integers(1, 6))
    caps = draw(st.lists(st.integers(0, 4), min_size=1, max_size=4))
    group = tuple(sorted(draw(st.sets(st.integers(0, n - 1), max_size=3))))
    weights = {f"c{i}": draw(st.integers(0, 3)) for i in range(n) if draw(st.booleans())}
    pins = {f"c{i}": f"n{draw(st.integers(0, len(caps) - 1))}" for i in range(n) if draw(st.integers(0, 4)) == 0}
    return placement_instance(n, caps, group, weights, pins)


@settings(max_examples=300, deadline=None)
@given(weighted_instances(), st.booleans())
def test_planner_matches_oracle(instance, heuristic):
    model, infra, spec = instance
    feasible, used, first = brute_force(model, infra, spec)
    try:
        plan = plan_deployment(model, infra, spec, exhaustive_limit=-1 if heuristic else 10)
    except Infeasible:
        assert not feasible
        return
    assert feasible
    assert validate_plan(model, infra, spec, plan) == []
    assert plan.optimal is not heuristic
    if not heuristic:
        assert plan.nodes_used == used and plan.assignment == first
    else:
        assert plan.nodes_used >= used


def test_large_instance_uses_heuristic():
    model, infra, spec = placement_instance(14, (4, 4, 4, 4), group=(0, 1, 2))
    plan = plan_deployment(model, infra, spec)
    assert plan.optimal is False
    assert validate_plan(model, infra, spec, plan) == []
    assert plan.nodes_used == 4


class _CountingToken:
    def __init__(self, limit):
        self.calls = 0
        self.limit = limit

    def is_set(self):
        self.calls += 1
        return self.calls > self.limit


def test_cancellation():
    model, infra, spec = placement_instance(8, (2, 2, 2, 2, 2))
    token = _CountingToken(limit=10)
    with pytest.raises(PlanningCancelled):
        plan_deployment(model, infra, spec, cancel=token)
    assert token.calls == 11
    never = _CountingToken(limit=10 ** 9)
    plan_deployment(model, infra, spec, cancel=never)
    assert never.calls > 8


def test_determinism(woven_mammogrid, fixtures):
    infra = read_infrastructure((fixtures / "two-node.germ").read_text())
    first = plan_deployment(woven_mammogrid, infra).to_json()
    assert all(plan_deployment(woven_mammogrid, infra).to_json() == first for _ in range(3))
