"""Policy graph built by frequency-counting discretised trajectories.

A :class:`PolicyGraph` keeps three count maps: state visits, per-state action
occurrences and (state, action, state') transitions. Action occurrences are
counted separately from edges because the final step of a trajectory has an
action but no successor: that step still feeds P(a|s) but creates no edge.
All probabilities are ratios of these counts; there is no smoothing.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, TextIO

from .errors import (
    ActionNotObservedError,
    InputError,
    NoObservationsError,
    StateNotObservedError,
)
from .vocab import ActionLabel, DiscreteState

PROB_ATOL = 1e-12


@dataclass(frozen=True)
class Trajectory:
    """One discretised scene: ordered (state, action) steps plus scene tags."""

    scene_id: str
    tags: frozenset[str]
    steps: tuple[tuple[DiscreteState, ActionLabel], ...]

    def __post_init__(self) -> None:
        if not self.steps:
            raise InputError(f"trajectory {self.scene_id!r} has no steps")

    def transitions(self) -> Iterable[tuple[DiscreteState, ActionLabel, DiscreteState]]:
        for (state, action), (nxt, _) in zip(self.steps, self.steps[1:]):
            yield state, action, nxt


class PolicyGraph:
    """Immutable-by-convention frequency model of observed behaviour."""

    def __init__(
        self,
        node_counts: Mapping[DiscreteState, int],
        action_counts: Mapping[tuple[DiscreteState, ActionLabel], int],
        edge_counts: Mapping[tuple[DiscreteState, ActionLabel, DiscreteState], int],
    ):
        self.node_counts: dict[DiscreteState, int] = dict(node_counts)
        self.action_counts: dict[tuple[DiscreteState, ActionLabel], int] = dict(action_counts)
        self.edge_counts: dict[tuple[DiscreteState, ActionLabel, DiscreteState], int] = dict(
            edge_counts
        )
        self._validate()
        # successor index: (s, a) -> {s': count}
        self._successors: dict[tuple[DiscreteState, ActionLabel], dict[DiscreteState, int]] = {}
        for (s, a, t), c in self.edge_counts.items():
            self._successors.setdefault((s, a), {})[t] = c
        self._actions_at: dict[DiscreteState, dict[ActionLabel, int]] = {}
        for (s, a), c in self.action_counts.items():
            self._actions_at.setdefault(s, {})[a] = c

    def _validate(self) -> None:
        for counts, what in (
            (self.node_counts.values(), "node"),
            (self.action_counts.values(), "action"),
            (self.edge_counts.values(), "edge"),
        ):
            if any(c < 0 for c in counts):
                raise InputError(f"negative {what} count")
        for s, a, t in self.edge_counts:
            if s not in self.node_counts or t not in self.node_counts:
                raise InputError("edge endpoint missing from nodes")
            if self.action_counts.get((s, a), 0) <= 0:
                raise InputError("edge without a matching action occurrence")
        for s, _ in self.action_counts:
            if s not in self.node_counts:
                raise InputError("action occurrence at unknown state")

    # -- queries -----------------------------------------------------------

    @property
    def states(self) -> list[DiscreteState]:
        """All states, canonically sorted."""
        return sorted(self.node_counts)

    def total_visits(self) -> int:
        return sum(self.node_counts.values())

    def actions_at(self, state: DiscreteState) -> dict[ActionLabel, int]:
        return self._actions_at.get(state, {})

    def successor_counts(
        self, state: DiscreteState, action: ActionLabel
    ) -> dict[DiscreteState, int]:
        return self._successors.get((state, action), {})

    def action_distribution(self, state: DiscreteState) -> dict[ActionLabel, float]:
        """P(a|s) from action occurrence counts at ``state``."""
        occurrences = self._actions_at.get(state)
        if not occurrences:
            raise StateNotObservedError(f"state not observed: {state.key}")
        total = sum(occurrences.values())
        return {a: c / total for a, c in sorted(occurrences.items())}

    def successor_distribution(
        self, state: DiscreteState, action: ActionLabel
    ) -> dict[DiscreteState, float]:
        """P(s'|s,a) from edge counts; requires at least one recorded edge."""
        if state not in self.node_counts:
            raise StateNotObservedError(f"state not observed: {state.key}")
        successors = self._successors.get((state, action))
        if not successors:
            raise ActionNotObservedError(
                f"action not observed in state: {action.value} at {state.key}"
            )
        total = sum(successors.values())
        return {t: c / total for t, c in sorted(successors.items())}

    # -- serialization -----------------------------------------------------

    def to_json_obj(self) -> dict:
        states = self.states
        index = {s: i for i, s in enumerate(states)}
        nodes = []
        for s in states:
            actions = {
                a.value: c for a, c in sorted(self._actions_at.get(s, {}).items())
            }
            nodes.append({"state": s.to_mapping(), "count": self.node_counts[s], "actions": actions})
        edges = [
            {"from": index[s], "to": index[t], "action": a.value, "count": c}
            for (s, a, t), c in sorted(
                self.edge_counts.items(), key=lambda kv: (index[kv[0][0]], kv[0][1].order, index[kv[0][2]])
            )
        ]
        return {"nodes": nodes, "edges": edges}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "PolicyGraph":
        try:
            states = [DiscreteState.from_mapping(n["state"]) for n in obj["nodes"]]
            node_counts = {s: int(n["count"]) for s, n in zip(states, obj["nodes"])}
            action_counts: dict[tuple[DiscreteState, ActionLabel], int] = {}
            for s, n in zip(states, obj["nodes"]):
                for label, c in n.get("actions", {}).items():
                    action_counts[(s, ActionLabel.parse(label))] = int(c)
            edge_counts = {
                (
                    states[e["from"]],
                    ActionLabel.parse(e["action"]),
                    states[e["to"]],
                ): int(e["count"])
                for e in obj["edges"]
            }
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise InputError(f"malformed policy-graph JSON: {exc}") from exc
        return cls(node_counts, action_counts, edge_counts)

    @classmethod
    def from_json(cls, text: str) -> "PolicyGraph":
        return cls.from_json_obj(json.loads(text))


def build_policy_graph(trajectories: Sequence[Trajectory]) -> PolicyGraph:
    """Count states, action occurrences and transitions over all trajectories.

    The last step of each trajectory contributes to node and action counts
    only; scenes are often truncated mid-manoeuvre and inventing a successor
    would bias the transition model.
    """
    if not trajectories:
        raise NoObservationsError("no observations")
    nodes: Counter = Counter()
    actions: Counter = Counter()
    edges: Counter = Counter()
    for traj in trajectories:
        for state, action in traj.steps:
            nodes[state] += 1
            actions[(state, action)] += 1
        for s, a, t in traj.transitions():
            edges[(s, a, t)] += 1
    return PolicyGraph(nodes, actions, edges)


def merge(g1: PolicyGraph, g2: PolicyGraph) -> PolicyGraph:
    """Entrywise sum of all counts; commutative and associative."""
    nodes = Counter(g1.node_counts)
    nodes.update(g2.node_counts)
    actions = Counter(g1.action_counts)
    actions.update(g2.action_counts)
    edges = Counter(g1.edge_counts)
    edges.update(g2.edge_counts)
    return PolicyGraph(nodes, actions, edges)


# -- trajectory files (JSONL, one scene per line) ---------------------------


def trajectory_to_json_obj(traj: Trajectory) -> dict:
    return {
        "scene_id": traj.scene_id,
        "tags": sorted(traj.tags),
        "steps": [
            {"state": state.to_mapping(), "action": action.value}
            for state, action in traj.steps
        ],
    }


def trajectory_from_json_obj(obj: Mapping) -> Trajectory:
    try:
        steps = tuple(
            (DiscreteState.from_mapping(step["state"]), ActionLabel.parse(step["action"]))
            for step in obj["steps"]
        )
        return Trajectory(str(obj["scene_id"]), frozenset(obj.get("tags", [])), steps)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed trajectory record: {exc}") from exc


def write_trajectories(trajectories: Iterable[Trajectory], fp: TextIO) -> None:
    for traj in trajectories:
        fp.write(json.dumps(trajectory_to_json_obj(traj), separators=(",", ":")))
        fp.write("\n")


def read_trajectories(fp: TextIO) -> list[Trajectory]:
    out = []
    for lineno, line in enumerate(fp, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InputError(f"line {lineno}: invalid JSON: {exc}") from exc
        out.append(trajectory_from_json_obj(obj))
    return out
