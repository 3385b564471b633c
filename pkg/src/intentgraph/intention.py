"""Per-state intention values: probability of eventual desire fulfilment.

For a goal with region S_d and fulfilling actions A_d, the intention I(s) is
the least fixed point of

    I(s) = sum_{a in F(s)} P(a|s)  +  sum_{a not in F(s)} P(a|s) * sum_{s'} P(s'|s,a) * I(s')

with F(s) = A_d when s is in S_d and empty otherwise. Taking a fulfilling
action absorbs the path, so I(s) is exactly the probability that the chain
started at s eventually executes a fulfilling action inside the region.
Actions observed without recorded successors (trajectory-final steps)
contribute nothing beyond their F(s) term.

Two routes compute the same quantity: value iteration from I = 0 (monotone,
returns the least fixed point even on cyclic graphs) and a direct linear
solve used as a verification oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Protocol

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError, InputError, UnknownDesireError
from .desires import ANY, ANY_SAFE, ANY_UNSAFE, DesireRegistry, SAFE, UNSAFE
from .graph import PolicyGraph
from .vocab import ActionLabel, DiscreteState


class IntentionGoal(Protocol):
    """Anything with a name and a per-state fulfilling action set."""

    name: str

    def fulfilling_actions(self, state: DiscreteState) -> frozenset[ActionLabel]: ...


@dataclass(frozen=True)
class SolveStats:
    iterations: int
    residual: float


class IntentionTable:
    """Columns of intention values, one per desire (plus aggregates)."""

    def __init__(self):
        self.columns: dict[str, dict[DiscreteState, float]] = {}
        self.stats: dict[str, SolveStats] = {}
        self.kinds: dict[str, str] = {}

    def add_column(
        self,
        name: str,
        values: Mapping[DiscreteState, float],
        stats: SolveStats,
        kind: str,
    ) -> None:
        self.columns[name] = dict(values)
        self.stats[name] = stats
        self.kinds[name] = kind

    def desires(self, include_aggregates: bool = False) -> list[str]:
        names = sorted(self.columns)
        if include_aggregates:
            return names
        return [n for n in names if n not in (ANY, ANY_SAFE, ANY_UNSAFE)]

    def column(self, desire: str) -> dict[DiscreteState, float]:
        try:
            return self.columns[desire]
        except KeyError:
            raise UnknownDesireError(f"unknown desire: {desire}") from None

    def value(self, desire: str, state: DiscreteState) -> float:
        return self.column(desire).get(state, 0.0)

    # -- serialization (byte-deterministic, 12 significant digits) ----------

    def to_json(self) -> str:
        parts = ["{"]
        parts.append('"desires":')
        parts.append(json.dumps({n: self.kinds.get(n, "") for n in sorted(self.columns)},
                                separators=(",", ":"), sort_keys=True))
        parts.append(',"rows":[')
        rows = []
        for name in sorted(self.columns):
            for state in sorted(self.columns[name]):
                value = format(self.columns[name][state], ".12g")
                rows.append(
                    '{"desire":%s,"state":%s,"value":%s}'
                    % (json.dumps(name), json.dumps(state.key), value)
                )
        parts.append(",".join(rows))
        parts.append('],"solver":')
        solver = {
            n: {"iterations": s.iterations, "residual": float(format(s.residual, ".6g"))}
            for n, s in sorted(self.stats.items())
        }
        parts.append(json.dumps(solver, separators=(",", ":"), sort_keys=True))
        parts.append("}")
        return "".join(parts)

    @classmethod
    def from_json(cls, text: str) -> "IntentionTable":
        try:
            obj = json.loads(text)
            table = cls()
            for name, kind in obj.get("desires", {}).items():
                table.columns[name] = {}
                table.kinds[name] = kind
            for row in obj["rows"]:
                state = DiscreteState.from_key(row["state"])
                table.columns.setdefault(row["desire"], {})[state] = float(row["value"])
            for name, s in obj.get("solver", {}).items():
                table.stats[name] = SolveStats(int(s["iterations"]), float(s["residual"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed intention table JSON: {exc}") from exc
        return table


# -- linear system assembly --------------------------------------------------


def _assemble(
    graph: PolicyGraph, goal: IntentionGoal, discount: float
) -> tuple[list[DiscreteState], np.ndarray, sp.csr_matrix]:
    """States (canonical order), one-step fulfilment vector b and the
    non-fulfilling transition operator T (row-substochastic)."""
    states = graph.states
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    b = np.zeros(n)
    data: list[float] = []
    rows: list[int] = []
    cols: list[int] = []
    for i, s in enumerate(states):
        occurrences = graph.actions_at(s)
        total = sum(occurrences.values())
        if total == 0:
            continue
        fulfilling = goal.fulfilling_actions(s)
        for a, count in occurrences.items():
            p_a = count / total
            if a in fulfilling:
                b[i] += p_a
                continue
            successors = graph.successor_counts(s, a)
            if not successors:
                continue
            edge_total = sum(successors.values())
            for t, c in successors.items():
                rows.append(i)
                cols.append(index[t])
                data.append(discount * p_a * c / edge_total)
    T = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    T.sum_duplicates()
    return states, b, T


def solve_intentions(
    graph: PolicyGraph,
    goal: IntentionGoal,
    tol: float = 1e-9,
    max_iter: int = 100_000,
    discount: float = 1.0,
) -> tuple[dict[DiscreteState, float], SolveStats]:
    """Value iteration from I = 0; monotone, so it finds the least fixed point."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    states, b, T = _assemble(graph, goal, discount)
    x = np.zeros(len(states))
    residual = float(np.max(b, initial=0.0))
    iterations = 0
    for iterations in range(1, max_iter + 1):
        x_next = b + T @ x
        residual = float(np.max(np.abs(x_next - x), initial=0.0))
        x = x_next
        if residual <= tol:
            break
    else:
        raise ConvergenceError(
            f"intention solve for {goal.name!r} did not converge within "
            f"{max_iter} iterations (residual {residual:.3e})",
            residual=residual,
            iterations=max_iter,
        )
    values = {s: float(v) for s, v in zip(states, x)}
    return values, SolveStats(iterations, residual)


def exact_intentions(
    graph: PolicyGraph,
    goal: IntentionGoal,
    discount: float = 1.0,
    max_states: int = 2000,
) -> dict[DiscreteState, float]:
    """Direct solve of (I - T) x = b, used as an oracle for the iteration.

    States with no path to a fulfilling event are pinned to zero first;
    without that elimination T can have recurrent rows summing to one (e.g.
    an everlasting self-loop) and the raw system is singular. On the
    remaining states every row leaks probability toward absorption, so the
    restricted system is nonsingular.
    """
    states, b, T = _assemble(graph, goal, discount)
    n = len(states)
    if n > max_states:
        raise ValueError(f"exact solve guard: {n} states exceeds {max_states}")
    if n == 0:
        return {}
    reachable = b > 0
    predecessors = T.transpose().tocsr()
    frontier = list(np.flatnonzero(reachable))
    while frontier:
        j = frontier.pop()
        for i in predecessors.indices[predecessors.indptr[j] : predecessors.indptr[j + 1]]:
            if not reachable[i]:
                reachable[i] = True
                frontier.append(int(i))
    x = np.zeros(n)
    idx = np.flatnonzero(reachable)
    if idx.size:
        sub_T = T[np.ix_(idx, idx)].toarray()
        sub_b = b[idx]
        solution = np.linalg.solve(np.eye(idx.size) - sub_T, sub_b)
        x[idx] = solution
    if x.min(initial=0.0) < -1e-9 or x.max(initial=0.0) > 1 + 1e-9:
        raise ArithmeticError("exact intention solve left [0,1]")
    np.clip(x, 0.0, 1.0, out=x)
    return {s: float(v) for s, v in zip(states, x)}


# -- public table builders ---------------------------------------------------


def compute_intentions(
    graph: PolicyGraph,
    goal: IntentionGoal,
    tol: float = 1e-9,
    max_iter: int = 100_000,
    discount: float = 1.0,
    kind: str = "",
) -> IntentionTable:
    values, stats = solve_intentions(graph, goal, tol=tol, max_iter=max_iter, discount=discount)
    table = IntentionTable()
    table.add_column(goal.name, values, stats, kind or getattr(goal, "kind", ""))
    return table


def exact_intentions_oracle(
    graph: PolicyGraph, goal: IntentionGoal, max_states: int = 2000
) -> IntentionTable:
    values = exact_intentions(graph, goal, max_states=max_states)
    table = IntentionTable()
    table.add_column(goal.name, values, SolveStats(0, 0.0), getattr(goal, "kind", ""))
    return table


def compute_intention_table(
    graph: PolicyGraph,
    registry: DesireRegistry,
    tol: float = 1e-9,
    max_iter: int = 100_000,
    discount: float = 1.0,
    include_aggregates: bool = True,
) -> IntentionTable:
    """One column per registered desire plus the any / any_safe / any_unsafe
    union pseudo-desires."""
    table = IntentionTable()
    for desire in registry:
        values, stats = solve_intentions(
            graph, desire, tol=tol, max_iter=max_iter, discount=discount
        )
        table.add_column(desire.name, values, stats, desire.kind)
    if include_aggregates:
        for kind, label in (("all", ANY), (SAFE, ANY_SAFE), (UNSAFE, ANY_UNSAFE)):
            goal = registry.any_goal(kind)
            if not goal.members:
                continue
            values, stats = solve_intentions(
                graph, goal, tol=tol, max_iter=max_iter, discount=discount
            )
            table.add_column(label, values, stats, "aggregate")
    return table
