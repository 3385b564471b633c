"""Desire clause semantics, registry loading and the shipped desire configs."""

import pytest

from intentgraph.desires import (
    ANY,
    DesireRegistry,
    DesireSpec,
    PredicateClause,
    any_desire_actions,
    in_desire_region,
    load_builtin_registry,
    load_registry,
    parse_desire,
)
from intentgraph.errors import DesireSpecError, UnknownDesireError
from intentgraph.vocab import ALL_ACTIONS, ActionLabel

from conftest import make_state

BRAKE = ActionLabel.BRAKE
STOP = ActionLabel.STOP
GAS = ActionLabel.GAS


@pytest.fixture(scope="module")
def registry():
    return load_builtin_registry()


def test_peds_at_crosswalk_region(registry):
    desire = registry.get("peds_at_crosswalk")
    moving = make_state(CrosswalkNearby="Yes", PedestrianNearby="Yes", Velocity="Slow")
    assert in_desire_region(desire, moving)
    stopped = make_state(CrosswalkNearby="Yes", PedestrianNearby="Yes", Velocity="Stopped")
    assert not in_desire_region(desire, stopped)


def test_empty_registry_matches_nothing():
    registry = DesireRegistry([])
    assert any_desire_actions(registry, make_state()) == frozenset()


def test_negated_clause():
    clause = PredicateClause("Velocity", frozenset({"Stopped"}), negated=True)
    assert clause.matches(make_state(Velocity="Slow"))
    assert not clause.matches(make_state(Velocity="Stopped"))


def test_any_desire_union_and_filter():
    d1 = DesireSpec(
        "d1", "safe",
        (PredicateClause("Velocity", frozenset({"Slow"})),),
        frozenset({BRAKE}),
    )
    d2 = DesireSpec(
        "d2", "unsafe",
        (PredicateClause("Velocity", frozenset({"Slow", "Medium"})),),
        frozenset({BRAKE, STOP}),
    )
    registry = DesireRegistry([d1, d2])
    s = make_state(Velocity="Slow")
    assert any_desire_actions(registry, s) == {BRAKE, STOP}
    assert any_desire_actions(registry, s, kind="safe") == {BRAKE}
    assert any_desire_actions(registry, make_state(Velocity="High")) == frozenset()


def test_any_goal_fulfils_matches_members():
    registry = load_builtin_registry()
    goal = registry.any_goal("all")
    # LanePosition None keeps this state out of lane_keeping's region, so the
    # only matching desires are the stop-sign pair
    s = make_state(StopAreaNearby="Stop", Velocity="Medium", LanePosition="None")
    # braking fulfils approach_stop_sign, accelerating fulfils ignore_stop_sign
    assert goal.fulfils(s, BRAKE)
    assert goal.fulfils(s, GAS)
    assert registry.any_goal("safe").fulfils(s, BRAKE)
    assert not registry.any_goal("safe").fulfils(s, GAS)


def test_builtin_configs_all_parse(registry):
    expected = {
        "lane_keeping", "turn_left", "turn_right",
        "lane_change_left", "lane_change_right",
        "approach_traffic_light", "approach_stop_sign",
        "peds_at_crosswalk", "non_crosswalk_peds",
        "ignore_two_wheel", "ignore_peds_high", "ignore_peds_low",
        "ignore_stop_sign",
    }
    assert set(registry.names()) == expected
    kinds = {d.name: d.kind for d in registry}
    assert sum(1 for k in kinds.values() if k == "unsafe") == 4


def test_ignore_peds_low_excludes_plain_steering_actions(registry):
    actions = registry.get("ignore_peds_low").actions
    assert ActionLabel.GO_STRAIGHT not in actions
    assert ActionLabel.TURN_LEFT not in actions
    assert ActionLabel.TURN_RIGHT not in actions
    assert GAS in actions


def test_complement_flag_expansion(registry):
    ignore = registry.get("ignore_stop_sign")
    braking = {BRAKE, ActionLabel.BRAKE_TURN_LEFT, ActionLabel.BRAKE_TURN_RIGHT, STOP}
    assert ignore.actions == ALL_ACTIONS - braking


def test_in_desire_region_is_pure(registry):
    desire = registry.get("lane_keeping")
    s = make_state()
    assert desire.in_region(s) == desire.in_region(s)


def test_loader_reports_all_violations(tmp_path):
    (tmp_path / "bad.yaml").write_text(
        "name: bad\nkind: safe\nclauses:\n"
        "  - predicate: WarpDrive\n    values: [On]\n"
        "  - predicate: Velocity\n    values: [Ludicrous]\n"
        "actions:\n  values: [Teleport]\n"
    )
    with pytest.raises(DesireSpecError) as exc_info:
        load_registry(tmp_path)
    text = "\n".join(exc_info.value.violations)
    assert "WarpDrive" in text
    assert "Ludicrous" in text
    assert "Teleport" in text


def test_duplicate_and_reserved_names_rejected():
    d = DesireSpec(
        "dup", "safe",
        (PredicateClause("Velocity", frozenset({"Slow"})),),
        frozenset({BRAKE}),
    )
    with pytest.raises(DesireSpecError, match="duplicate"):
        DesireRegistry([d, d])
    with pytest.raises(DesireSpecError, match="reserved"):
        DesireRegistry([DesireSpec(ANY, "safe", d.clauses, d.actions)])


def test_unknown_desire_lookup(registry):
    with pytest.raises(UnknownDesireError):
        registry.get("world_domination")


def test_parse_desire_requires_clauses_and_actions():
    with pytest.raises(DesireSpecError):
        parse_desire({"name": "x", "kind": "safe", "clauses": [], "actions": {"values": ["Gas"]}})
    with pytest.raises(DesireSpecError):
        parse_desire(
            {
                "name": "x",
                "kind": "safe",
                "clauses": [{"predicate": "Velocity", "values": ["Slow"]}],
                "actions": {"values": [], "all_except": []},
            }
        )
