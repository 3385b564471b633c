"""Declarative desire specifications and the registry of hypothesised desires.

A desire pairs a state region (conjunction of per-predicate membership
clauses) with the set of actions that fulfil it there. Desires are loaded
from small YAML documents; the loader validates every file against the
closed predicate/action vocabulary and reports all violations at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import yaml

from .errors import DesireSpecError, UnknownDesireError
from .vocab import ALL_ACTIONS, ActionLabel, DiscreteState, PREDICATE_BY_NAME

SAFE = "safe"
UNSAFE = "unsafe"

# Aggregate pseudo-desire names used by the solver and reports.
ANY = "any"
ANY_SAFE = "any_safe"
ANY_UNSAFE = "any_unsafe"
RESERVED_NAMES = frozenset({ANY, ANY_SAFE, ANY_UNSAFE})


@dataclass(frozen=True)
class PredicateClause:
    """Membership test on one predicate; ``negated`` flips it."""

    predicate: str
    allowed_values: frozenset[str]
    negated: bool = False

    def matches(self, state: DiscreteState) -> bool:
        inside = state[self.predicate] in self.allowed_values
        return not inside if self.negated else inside


@dataclass(frozen=True)
class DesireSpec:
    """Named desire: state region (clause conjunction) + fulfilling actions."""

    name: str
    kind: str
    clauses: tuple[PredicateClause, ...]
    actions: frozenset[ActionLabel]

    def in_region(self, state: DiscreteState) -> bool:
        return all(clause.matches(state) for clause in self.clauses)

    def fulfilling_actions(self, state: DiscreteState) -> frozenset[ActionLabel]:
        return self.actions if self.in_region(state) else frozenset()

    def fulfils(self, state: DiscreteState, action: ActionLabel) -> bool:
        return self.in_region(state) and action in self.actions


def in_desire_region(desire: DesireSpec, state: DiscreteState) -> bool:
    return desire.in_region(state)


@dataclass(frozen=True)
class AnyDesireGoal:
    """Union pseudo-desire: fulfilled when any member desire is fulfilled.

    Its fulfilling action set at a state is the union of the member desires'
    action sets over the desires whose region contains the state, so one
    solver pass yields the intention of fulfilling *some* desire.
    """

    name: str
    members: tuple[DesireSpec, ...]

    def in_region(self, state: DiscreteState) -> bool:
        return any(d.in_region(state) for d in self.members)

    def fulfilling_actions(self, state: DiscreteState) -> frozenset[ActionLabel]:
        out: frozenset[ActionLabel] = frozenset()
        for d in self.members:
            if d.in_region(state):
                out |= d.actions
        return out

    def fulfils(self, state: DiscreteState, action: ActionLabel) -> bool:
        return any(d.fulfils(state, action) for d in self.members)


class DesireRegistry:
    """Ordered, name-unique collection of desires."""

    def __init__(self, desires: Iterable[DesireSpec]):
        self._desires: list[DesireSpec] = []
        seen: set[str] = set()
        for d in desires:
            if d.name in seen:
                raise DesireSpecError([f"duplicate desire name {d.name!r}"])
            if d.name in RESERVED_NAMES:
                raise DesireSpecError([f"desire name {d.name!r} is reserved"])
            seen.add(d.name)
            self._desires.append(d)
        self._desires.sort(key=lambda d: d.name)

    def __iter__(self) -> Iterator[DesireSpec]:
        return iter(self._desires)

    def __len__(self) -> int:
        return len(self._desires)

    def names(self) -> list[str]:
        return [d.name for d in self._desires]

    def get(self, name: str) -> DesireSpec:
        for d in self._desires:
            if d.name == name:
                return d
        raise UnknownDesireError(f"unknown desire: {name}")

    def of_kind(self, kind: str) -> list[DesireSpec]:
        if kind == "all":
            return list(self._desires)
        return [d for d in self._desires if d.kind == kind]

    def any_goal(self, kind: str = "all") -> AnyDesireGoal:
        name = {"all": ANY, SAFE: ANY_SAFE, UNSAFE: ANY_UNSAFE}[kind]
        return AnyDesireGoal(name, tuple(self.of_kind(kind)))


def any_desire_actions(
    registry: Sequence[DesireSpec] | DesireRegistry,
    state: DiscreteState,
    kind: str = "all",
) -> frozenset[ActionLabel]:
    """Union of fulfilling action sets over desires whose region holds at ``state``."""
    out: frozenset[ActionLabel] = frozenset()
    for d in registry:
        if kind != "all" and d.kind != kind:
            continue
        if d.in_region(state):
            out |= d.actions
    return out


# -- loading -----------------------------------------------------------------


def _parse_clause(raw: Mapping, where: str, problems: list[str]) -> PredicateClause | None:
    predicate = raw.get("predicate")
    if predicate not in PREDICATE_BY_NAME:
        problems.append(f"{where}: unknown predicate {predicate!r}")
        return None
    values = raw.get("values")
    if not isinstance(values, list) or not values:
        problems.append(f"{where}: clause needs a non-empty 'values' list")
        return None
    enum = PREDICATE_BY_NAME[predicate]
    bad = [v for v in values if v not in enum.values]
    if bad:
        problems.append(f"{where}: invalid values {bad} for predicate {predicate}")
        return None
    negated = bool(raw.get("negated", False))
    return PredicateClause(predicate, frozenset(values), negated)


def _parse_actions(raw, where: str, problems: list[str]) -> frozenset[ActionLabel]:
    if not isinstance(raw, Mapping) or ("values" in raw) == ("all_except" in raw):
        problems.append(f"{where}: 'actions' needs exactly one of 'values' or 'all_except'")
        return frozenset()
    key = "values" if "values" in raw else "all_except"
    labels = raw[key]
    if not isinstance(labels, list):
        problems.append(f"{where}: actions.{key} must be a list")
        return frozenset()
    parsed: set[ActionLabel] = set()
    for label in labels:
        try:
            parsed.add(ActionLabel.parse(str(label)))
        except Exception:
            problems.append(f"{where}: unknown action label {label!r}")
    if key == "all_except":
        actions = frozenset(ALL_ACTIONS - parsed)
    else:
        actions = frozenset(parsed)
    if not actions:
        problems.append(f"{where}: fulfilling action set is empty")
    return actions


def parse_desire(doc: Mapping, where: str = "<desire>") -> DesireSpec:
    problems: list[str] = []
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        problems.append(f"{where}: missing 'name'")
        name = "<unnamed>"
    kind = doc.get("kind")
    if kind not in (SAFE, UNSAFE):
        problems.append(f"{where}: 'kind' must be 'safe' or 'unsafe', got {kind!r}")
        kind = SAFE
    raw_clauses = doc.get("clauses")
    clauses: list[PredicateClause] = []
    if not isinstance(raw_clauses, list) or not raw_clauses:
        problems.append(f"{where}: 'clauses' must be a non-empty list")
    else:
        for i, raw in enumerate(raw_clauses):
            clause = _parse_clause(raw, f"{where}.clauses[{i}]", problems)
            if clause is not None:
                clauses.append(clause)
    actions = _parse_actions(doc.get("actions"), where, problems)
    if problems:
        raise DesireSpecError(problems)
    return DesireSpec(name, kind, tuple(clauses), actions)


def load_desire_file(path: Path | str) -> DesireSpec:
    path = Path(path)
    doc = yaml.safe_load(path.read_text())
    if not isinstance(doc, Mapping):
        raise DesireSpecError([f"{path.name}: not a mapping"])
    return parse_desire(doc, where=path.name)


def load_registry(directory: Path | str) -> DesireRegistry:
    """Load every ``*.yaml`` desire file in ``directory``, collecting all errors."""
    directory = Path(directory)
    problems: list[str] = []
    desires: list[DesireSpec] = []
    paths = sorted(directory.glob("*.yaml"))
    if not paths:
        raise DesireSpecError([f"no desire files (*.yaml) in {directory}"])
    for path in paths:
        try:
            desires.append(load_desire_file(path))
        except DesireSpecError as exc:
            problems.extend(exc.violations)
    if problems:
        raise DesireSpecError(problems)
    return DesireRegistry(desires)


def builtin_desires_dir() -> Path:
    """Directory of the desire configs shipped with the package."""
    return Path(__file__).parent / "configs" / "desires"


def load_builtin_registry() -> DesireRegistry:
    return load_registry(builtin_desires_dir())
