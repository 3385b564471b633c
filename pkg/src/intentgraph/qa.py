"""Telic question answering over a policy graph and its intention table.

Three queries: what is intended in a state (desires above the commitment
threshold), why an action would be taken there (its effect on each desire's
intention), and how a desire would be fulfilled (greedy intention-ascending
plan). Plus per-scene temporal intention traces with fulfilment marks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .desires import DesireRegistry, DesireSpec
from .errors import ActionNotObservedError, StateNotObservedError
from .graph import PolicyGraph, Trajectory
from .intention import IntentionTable
from .vocab import ActionLabel, DiscreteState

EXPECTED_INCREASE = "expected_increase"
PROBABILISTIC_INCREASE = "probabilistic_increase"
UNINTENTIONAL = "unintentional"

# Expected changes below the solver's convergence tolerance are numerically
# zero; classifying tiers on that residue would be noise.
_INCREASE_EPS = 1e-9


@dataclass(frozen=True)
class WhyAnswer:
    """Effect of one action on one desire's intention.

    ``fulfils`` marks the direct case: the action is itself a fulfilling
    action in the desire's region. By convention it reports tier
    expected_increase with probability 1 and increase 1 - I_d(s) (the jump
    to certain fulfilment).
    """

    desire: str
    tier: str
    probability_of_increase: float
    conditional_increase: float
    fulfils: bool = False


@dataclass(frozen=True)
class PlanStep:
    """One step of a greedy fulfilment plan.

    ``state`` is the state the action is taken in; removed/added are the
    predicate differences to the next state (empty for the final fulfilling
    step, which absorbs).
    """

    action: ActionLabel
    removed: frozenset[tuple[str, str]]
    added: frozenset[tuple[str, str]]
    intention_after: float
    state: DiscreteState
    fulfils: bool = False


def _require_state(graph: PolicyGraph, state: DiscreteState) -> None:
    if state not in graph.node_counts:
        raise StateNotObservedError(f"state never observed: {state.key}")


def ask_what(
    table: IntentionTable, state: DiscreteState, threshold: float
) -> list[tuple[str, float]]:
    """Desires with intention >= threshold at ``state``, strongest first."""
    if not any(state in column for column in table.columns.values()):
        raise StateNotObservedError(f"state never observed: {state.key}")
    out = []
    for name in table.desires():
        value = table.value(name, state)
        if value >= threshold:
            out.append((name, value))
    out.sort(key=lambda nv: (-nv[1], nv[0]))
    return out


def ask_why(
    graph: PolicyGraph,
    table: IntentionTable,
    registry: DesireRegistry,
    state: DiscreteState,
    action: ActionLabel,
    threshold: float,
) -> list[WhyAnswer]:
    """One answer per desire; tiers are mutually exclusive and exhaustive.

    A desire answers expected_increase when the action's expected successor
    intention exceeds the current one (or the action outright fulfils it),
    probabilistic_increase when some successors increase it even though the
    mean does not, and unintentional otherwise.
    """
    _require_state(graph, state)
    if graph.actions_at(state).get(action, 0) <= 0:
        raise ActionNotObservedError(
            f"action not observed in state: {action.value} at {state.key}"
        )
    successors = graph.successor_counts(state, action)
    edge_total = sum(successors.values())
    answers = []
    for name in table.desires():
        desire = registry.get(name)
        current = table.value(name, state)
        if desire.fulfils(state, action):
            answers.append(
                WhyAnswer(name, EXPECTED_INCREASE, 1.0, 1.0 - current, fulfils=True)
            )
            continue
        p_up = 0.0
        gain = 0.0
        expected_next = 0.0
        for nxt, count in successors.items():
            p = count / edge_total
            value = table.value(name, nxt)
            expected_next += p * value
            if value > current:
                p_up += p
                gain += p * (value - current)
        if edge_total and expected_next - current > _INCREASE_EPS:
            answers.append(WhyAnswer(name, EXPECTED_INCREASE, p_up, gain / p_up))
        elif p_up > 0:
            answers.append(WhyAnswer(name, PROBABILISTIC_INCREASE, p_up, gain / p_up))
        else:
            answers.append(WhyAnswer(name, UNINTENTIONAL, 0.0, 0.0))
    tier_rank = {EXPECTED_INCREASE: 0, PROBABILISTIC_INCREASE: 1, UNINTENTIONAL: 2}
    answers.sort(key=lambda a: (tier_rank[a.tier], -a.conditional_increase, a.desire))
    return answers


def is_unintentional(
    answers: Sequence[WhyAnswer],
    table: IntentionTable,
    state: DiscreteState,
    threshold: float,
) -> bool:
    """Whole-query verdict: no desire tiered and no intention attributed here."""
    if any(a.tier != UNINTENTIONAL for a in answers):
        return False
    return not ask_what(table, state, threshold)


def ask_how(
    graph: PolicyGraph,
    table: IntentionTable,
    desire: DesireSpec,
    state: DiscreteState,
    max_len: int = 20,
) -> list[PlanStep] | None:
    """Greedy plan toward fulfilment, or None when no plan exists.

    At each state: if the desire is fulfillable here by an observed action,
    finish with the most probable fulfilling action. Otherwise follow the
    outgoing edge whose successor has the highest intention (ties: higher
    successor probability, then canonical action/state order). Revisiting a
    state or exceeding ``max_len`` aborts.
    """
    _require_state(graph, state)
    steps: list[PlanStep] = []
    current = state
    visited = {state}
    while len(steps) < max_len:
        occurrences = graph.actions_at(current)
        total = sum(occurrences.values())
        if desire.in_region(current):
            available = [
                (occurrences[a], -a.order, a)
                for a in desire.actions
                if occurrences.get(a, 0) > 0
            ]
            if available:
                _, _, action = max(available)
                steps.append(
                    PlanStep(
                        action=action,
                        removed=frozenset(),
                        added=frozenset(),
                        intention_after=1.0,
                        state=current,
                        fulfils=True,
                    )
                )
                return steps
        best = None
        for a in occurrences:
            successors = graph.successor_counts(current, a)
            edge_total = sum(successors.values())
            for nxt, c in successors.items():
                candidate = (table.value(desire.name, nxt), c / edge_total, a, nxt)
                if best is None or _better(candidate, best):
                    best = candidate
        if best is None:
            return None
        value, _, action, nxt = best
        if nxt in visited:
            return None
        removed, added = current.diff(nxt)
        steps.append(
            PlanStep(
                action=action,
                removed=frozenset(removed),
                added=frozenset(added),
                intention_after=value,
                state=current,
            )
        )
        visited.add(nxt)
        current = nxt
    return None


def _better(candidate: tuple, incumbent: tuple) -> bool:
    # higher intention, then higher probability, then earlier action order,
    # then smaller canonical state key
    if candidate[0] != incumbent[0]:
        return candidate[0] > incumbent[0]
    if candidate[1] != incumbent[1]:
        return candidate[1] > incumbent[1]
    if candidate[2] is not incumbent[2]:
        return candidate[2].order < incumbent[2].order
    return candidate[3] < incumbent[3]


@dataclass(frozen=True)
class TraceStep:
    index: int
    state: DiscreteState
    action: ActionLabel
    intentions: dict[str, float]
    fulfilled: frozenset[str]


def intention_trace(
    scene: Trajectory,
    table: IntentionTable,
    registry: DesireRegistry,
    min_peak: float = 0.2,
) -> tuple[list[str], list[TraceStep]]:
    """Per-step intention values for every desire whose trace peaks at or
    above ``min_peak``, with fulfilment marks where (state, action) fulfils."""
    columns = {}
    for name in table.desires():
        column = table.columns[name]
        values = []
        for i, (state, _) in enumerate(scene.steps):
            if state not in column:
                raise StateNotObservedError(
                    f"step {i}: state absent from intention table: {state.key}"
                )
            values.append(column[state])
        if max(values) >= min_peak:
            columns[name] = values
    kept = sorted(columns)
    steps = []
    for i, (state, action) in enumerate(scene.steps):
        fulfilled = frozenset(
            d.name for d in registry if d.fulfils(state, action) and d.name in columns
        )
        steps.append(
            TraceStep(
                index=i,
                state=state,
                action=action,
                intentions={name: columns[name][i] for name in kept},
                fulfilled=fulfilled,
            )
        )
    return kept, steps


# -- natural-language rendering ----------------------------------------------


def render_what(answers: list[tuple[str, float]]) -> str:
    if not answers:
        return "No intention above the commitment threshold in this state."
    lines = [f"I intend to fulfil {name} (intention {value:.3f})." for name, value in answers]
    return "\n".join(lines)


def render_why(
    answers: Sequence[WhyAnswer],
    table: IntentionTable,
    state: DiscreteState,
    action: ActionLabel,
    threshold: float,
) -> str:
    if is_unintentional(answers, table, state, threshold):
        return f"{action.value} is unintentional with respect to the hypothesised desires."
    lines = []
    for a in answers:
        if a.tier == UNINTENTIONAL:
            continue
        if a.fulfils:
            lines.append(f"To fulfil {a.desire} here and now.")
        else:
            lines.append(
                f"For the purpose of furthering {a.desire}, as it has a "
                f"{a.probability_of_increase:.3f} probability of an expected "
                f"intention increase of {a.conditional_increase:.3f}"
            )
    if not lines:
        return (
            f"{action.value} furthers no hypothesised desire, but intentions are "
            "attributed in this state."
        )
    return "\n".join(lines)


def render_plan(plan: list[PlanStep] | None) -> str:
    if plan is None:
        return "no plan"
    lines = []
    for i, step in enumerate(plan, start=1):
        if step.fulfils:
            lines.append(f"{i}. {step.action.value} — fulfils the desire (I=1.0)")
            continue
        removed = ", ".join(f"{p}({v})" for p, v in sorted(step.removed)) or "nothing"
        added = ", ".join(f"{p}({v})" for p, v in sorted(step.added)) or "nothing"
        lines.append(
            f"{i}. {step.action.value} — remove {removed}; add {added} "
            f"(I={step.intention_after:.3f})"
        )
    return "\n".join(lines)
