"""Shared fixtures: the 3-state toy graph, state builders and fuzz generators."""

from __future__ import annotations

import itertools
import random

import pytest

from intentgraph.desires import DesireSpec, PredicateClause
from intentgraph.graph import PolicyGraph, Trajectory
from intentgraph.vocab import ActionLabel, DiscreteState, PREDICATES

BASE_ASSIGNMENT = {
    "Velocity": "Slow",
    "Steering": "Forward",
    "LanePosition": "Aligned",
    "BlockProgress": "Middle",
    "NextIntersection": "None",
    "StopAreaNearby": "None",
    "CrosswalkNearby": "No",
    "TrafficLightNearby": "No",
    "PedestrianNearby": "No",
    "TwoWheelNearby": "No",
    "ObjectsNearby": "No",
}


def make_state(**overrides: str) -> DiscreteState:
    assignment = dict(BASE_ASSIGNMENT)
    assignment.update(overrides)
    return DiscreteState.from_mapping(assignment)


def distinct_states(rng: random.Random, n: int) -> list[DiscreteState]:
    """n distinct random states, deterministic for a seeded rng."""
    seen: dict[tuple, DiscreteState] = {}
    while len(seen) < n:
        values = tuple(rng.choice(p.values) for p in PREDICATES)
        if values not in seen:
            seen[values] = DiscreteState(values)
    return list(seen.values())


def random_graph(rng: random.Random, n_states: int, terminal_prob: float = 0.15) -> PolicyGraph:
    """Random count-based graph; some actions have occurrences but no edges."""
    states = distinct_states(rng, n_states)
    nodes = {s: rng.randint(1, 20) for s in states}
    actions: dict = {}
    edges: dict = {}
    labels = list(ActionLabel)
    for s in states:
        for a in rng.sample(labels, rng.randint(1, 4)):
            actions[(s, a)] = rng.randint(1, 10)
            if rng.random() < terminal_prob:
                continue
            for t in rng.sample(states, rng.randint(1, min(3, len(states)))):
                edges[(s, a, t)] = rng.randint(1, 5)
    return PolicyGraph(nodes, actions, edges)


def random_dag(rng: random.Random, n_states: int) -> PolicyGraph:
    """Acyclic graph: edges only go forward in a fixed state order."""
    states = distinct_states(rng, n_states)
    nodes = {s: rng.randint(1, 10) for s in states}
    actions: dict = {}
    edges: dict = {}
    labels = list(ActionLabel)
    for i, s in enumerate(states):
        for a in rng.sample(labels, rng.randint(1, 3)):
            actions[(s, a)] = rng.randint(1, 8)
            later = states[i + 1 :]
            if not later or rng.random() < 0.2:
                continue
            for t in rng.sample(later, rng.randint(1, min(3, len(later)))):
                edges[(s, a, t)] = rng.randint(1, 4)
    return PolicyGraph(nodes, actions, edges)


def random_desire(rng: random.Random, name: str = "fuzz") -> DesireSpec:
    predicates = rng.sample(PREDICATES, rng.randint(1, 2))
    clauses = []
    for p in predicates:
        k = rng.randint(1, max(1, len(p.values) - 1))
        clauses.append(
            PredicateClause(p.name, frozenset(rng.sample(p.values, k)), negated=rng.random() < 0.3)
        )
    actions = frozenset(rng.sample(list(ActionLabel), rng.randint(1, 4)))
    return DesireSpec(name, "safe", tuple(clauses), actions)


def enumerate_fulfilment_probability(
    graph: PolicyGraph, desire: DesireSpec, start: DiscreteState
) -> float:
    """Independent oracle: explicit enumeration of every fulfilling path.

    Walks all path prefixes (finite on DAGs) and sums the probability mass of
    prefixes ending in a fulfilling action taken inside the desire region.
    No fixed point, no linear algebra.
    """
    total_mass = 0.0
    stack = [(start, 1.0)]
    while stack:
        state, prefix = stack.pop()
        occurrences = graph.actions_at(state)
        total = sum(occurrences.values())
        if total == 0:
            continue
        fulfilling = desire.fulfilling_actions(state)
        for action, count in occurrences.items():
            p = prefix * count / total
            if action in fulfilling:
                total_mass += p
                continue
            successors = graph.successor_counts(state, action)
            edge_total = sum(successors.values())
            for target, c in successors.items():
                stack.append((target, p * c / edge_total))
    return total_mass


# -- the toy regression graph -------------------------------------------------
#
# s2 is the desire region with Brake fulfilling at probability 0.8; Gas (0.2)
# leads back to s0. s0 splits evenly between the dead-end self-looper s1 and
# s2. Solving the 3x3 linear system by hand:
#   I(s1) = I(s1)                  -> least solution 0
#   I(s0) = 0.5 I(s1) + 0.5 I(s2)
#   I(s2) = 0.8 + 0.2 I(s0)
# gives I(s2) = 8/9 and I(s0) = 4/9.

G1_I_S0 = 4.0 / 9.0
G1_I_S1 = 0.0
G1_I_S2 = 8.0 / 9.0


@pytest.fixture(scope="session")
def g1():
    s0 = make_state(Velocity="Slow")
    s1 = make_state(Velocity="High")
    s2 = make_state(Velocity="Medium")
    go, gas, brake = ActionLabel.GO_STRAIGHT, ActionLabel.GAS, ActionLabel.BRAKE
    graph = PolicyGraph(
        {s0: 2, s1: 1, s2: 1},
        {(s0, go): 2, (s1, go): 1, (s2, brake): 8, (s2, gas): 2},
        {(s0, go, s1): 1, (s0, go, s2): 1, (s1, go, s1): 1, (s2, gas, s0): 2},
    )
    desire = DesireSpec(
        "d",
        "safe",
        (PredicateClause("Velocity", frozenset({"Medium"})),),
        frozenset({brake}),
    )
    return graph, desire, s0, s1, s2
