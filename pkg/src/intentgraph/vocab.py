"""Symbolic vocabulary: action labels, state predicates and discrete states.

The eleven predicates and their value enumerations are the closed vocabulary
every other module builds on. Their declaration order here is the canonical
order used for hashing, sorting and serialization, so it must never be
reordered.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping

from .errors import InputError


class ActionLabel(Enum):
    """Closed set of manoeuvre labels; declaration order is canonical."""

    IDLE = "Idle"
    GO_STRAIGHT = "GoStraight"
    GAS = "Gas"
    BRAKE = "Brake"
    TURN_RIGHT = "TurnRight"
    TURN_LEFT = "TurnLeft"
    GAS_TURN_RIGHT = "GasTurnRight"
    GAS_TURN_LEFT = "GasTurnLeft"
    BRAKE_TURN_RIGHT = "BrakeTurnRight"
    BRAKE_TURN_LEFT = "BrakeTurnLeft"
    STOP = "Stop"

    @classmethod
    def parse(cls, label: str) -> "ActionLabel":
        try:
            return cls(label)
        except ValueError:
            raise InputError(f"unknown action label {label!r}") from None

    @property
    def order(self) -> int:
        return _ACTION_ORDER[self]

    def __lt__(self, other: "ActionLabel") -> bool:
        return _ACTION_ORDER[self] < _ACTION_ORDER[other]

    def __repr__(self) -> str:  # keeps test output readable
        return self.value


_ACTION_ORDER = {a: i for i, a in enumerate(ActionLabel)}

ALL_ACTIONS: frozenset[ActionLabel] = frozenset(ActionLabel)


@dataclass(frozen=True)
class Predicate:
    """One discretisation feature and its closed value enumeration."""

    name: str
    values: tuple[str, ...]

    def __contains__(self, value: str) -> bool:
        return value in self.values


PREDICATES: tuple[Predicate, ...] = (
    Predicate("Velocity", ("Stopped", "Slow", "Medium", "High")),
    Predicate("Steering", ("Forward", "Right", "Left")),
    Predicate("LanePosition", ("Aligned", "Opposite", "Centre", "None")),
    Predicate("BlockProgress", ("Start", "Middle", "End", "Intersection", "None")),
    Predicate("NextIntersection", ("Left", "Right", "Straight", "None")),
    Predicate("StopAreaNearby", ("Stop", "Yield", "TurnStop", "None")),
    Predicate("CrosswalkNearby", ("Yes", "No")),
    Predicate("TrafficLightNearby", ("Yes", "No")),
    Predicate("PedestrianNearby", ("Yes", "No")),
    Predicate("TwoWheelNearby", ("Yes", "No")),
    Predicate("ObjectsNearby", ("Yes", "No")),
)

PREDICATE_NAMES: tuple[str, ...] = tuple(p.name for p in PREDICATES)
PREDICATE_BY_NAME: dict[str, Predicate] = {p.name: p for p in PREDICATES}
_PREDICATE_INDEX: dict[str, int] = {p.name: i for i, p in enumerate(PREDICATES)}


@dataclass(frozen=True)
class DiscreteState:
    """Total assignment of all eleven predicates; node identity in the graph.

    ``values`` is aligned with :data:`PREDICATES`. States compare and sort by
    that value tuple, which makes every serialization deterministic.
    """

    values: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(PREDICATES):
            raise InputError(
                f"state needs {len(PREDICATES)} predicate values, got {len(self.values)}"
            )
        for pred, value in zip(PREDICATES, self.values):
            if value not in pred.values:
                raise InputError(
                    f"invalid value {value!r} for predicate {pred.name}"
                )

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, str]) -> "DiscreteState":
        missing = [n for n in PREDICATE_NAMES if n not in mapping]
        extra = [n for n in mapping if n not in PREDICATE_BY_NAME]
        if missing or extra:
            raise InputError(
                f"state assignment must cover exactly the {len(PREDICATES)} predicates"
                f" (missing {missing}, unknown {extra})"
            )
        return cls(tuple(mapping[n] for n in PREDICATE_NAMES))

    def __getitem__(self, predicate: str) -> str:
        return self.values[_PREDICATE_INDEX[predicate]]

    def replace(self, **assignments: str) -> "DiscreteState":
        values = list(self.values)
        for name, value in assignments.items():
            values[_PREDICATE_INDEX[name]] = value
        return DiscreteState(tuple(values))

    def to_mapping(self) -> dict[str, str]:
        return dict(zip(PREDICATE_NAMES, self.values))

    def items(self) -> Iterator[tuple[str, str]]:
        return iter(zip(PREDICATE_NAMES, self.values))

    @property
    def key(self) -> str:
        """Compact canonical key: predicate values joined in canonical order."""
        return "|".join(self.values)

    @classmethod
    def from_key(cls, key: str) -> "DiscreteState":
        return cls(tuple(key.split("|")))

    def diff(self, other: "DiscreteState") -> tuple[set[tuple[str, str]], set[tuple[str, str]]]:
        """(removed, added) predicate-value pairs going from self to other."""
        removed = {(n, v) for n, v, w in zip(PREDICATE_NAMES, self.values, other.values) if v != w}
        added = {(n, w) for n, v, w in zip(PREDICATE_NAMES, self.values, other.values) if v != w}
        return removed, added

    def hamming(self, other: "DiscreteState") -> int:
        return sum(1 for v, w in zip(self.values, other.values) if v != w)

    def __lt__(self, other: "DiscreteState") -> bool:
        return self.values < other.values

    def __repr__(self) -> str:
        return f"DiscreteState({self.key})"
