from __future__ import annotations

from dataclasses import replace

from hypothesis import given, settings
from hypothesis import strategies as st

from gateway_forge import (AbstractionDef, ArchElement, ArchitectureModel, BehaviourBlock, ElementKind, ServiceKind,
                           check_behaviour_refs, check_gateway_style, load_model)
from strategies import identifiers, models

ATOMIC = dict(service_kind=ServiceKind.ATOMIC, stateless=True, idempotent=True)


def _kinds(violations):
    return [v.kind for v in violations]


def test_mammogrid_conforms(mammogrid, woven_mammogrid):
    assert check_gateway_style(mammogrid) == []
    assert check_behaviour_refs(mammogrid) == []
    assert check_gateway_style(woven_mammogrid) == []


def test_composite_marked_stateless(fixtures):
    m = load_model(fixtures / "composite_stateless.gdsl")
    assert _kinds(check_gateway_style(m)) == ["StatefulnessViolation"]


def test_atomic_rules():
    m = ArchitectureModel("m", "SOAScienceGateway", (ArchElement("a", service_kind=ServiceKind.ATOMIC),))
    assert _kinds(check_gateway_style(m)) == ["StatelessViolation", "IdempotenceViolation"]


def test_composite_needs_behaviour():
    empty = ArchElement("p", service_kind=ServiceKind.COMPOSITE, behaviour=BehaviourBlock())
    m = ArchitectureModel("m", "SOAScienceGateway", (empty,))
    assert _kinds(check_gateway_style(m)) == ["MissingBehaviour"]


def test_style_needs_a_component():
    m = ArchitectureModel("m", "SOAScienceGateway", (ArchElement("c", ElementKind.CONNECTOR),))
    assert _kinds(check_gateway_style(m)) == ["NoComponents"]
    assert check_gateway_style(replace(m, style="otherStyle")) == []


def test_nested_parts_are_checked():
    part = ArchElement("inner", service_kind=ServiceKind.ATOMIC, idempotent=True)
    m = ArchitectureModel("m", "SOAScienceGateway", (ArchElement("outer", parts=(part,)),))
    assert _kinds(check_gateway_style(m)) == ["StatelessViolation"]


def test_behaviour_refs(woven_mammogrid):
    assert check_behaviour_refs(woven_mammogrid) == []
    assert woven_mammogrid.element("FTConnector").behaviour.composition == ("availabilityChecking",)
    undefined = ArchElement("x", behaviour=BehaviourBlock((), ("foo", "foo")))
    m = ArchitectureModel("m", "S", (undefined,))
    assert _kinds(check_behaviour_refs(m)) == ["UndefinedAbstraction"]
    vacuous = ArchElement("y", behaviour=BehaviourBlock((AbstractionDef("bar"),), ()))
    assert check_behaviour_refs(ArchitectureModel("m", "S", (vacuous,))) == []


conforming = st.builds(
    lambda name, kind: ArchElement(name, **ATOMIC) if kind == "atomic" else ArchElement(
        name, service_kind=ServiceKind.COMPOSITE, behaviour=BehaviourBlock((AbstractionDef("run"),), ("run",))),
    identifiers, st.sampled_from(["atomic", "composite"]))


@settings(max_examples=200, deadline=None)
@given(models(), conforming)
def test_adding_conforming_elements_is_monotone(model, extra):
    if extra.name in model.element_names:
        return
    before = check_gateway_style(model)
    after = check_gateway_style(model.add_element(extra))
    assert all(v in before for v in after)
