"""Interpretability / reliability metrics over an intention table.

Attributed intention: visitation-weighted probability of being in a state
whose intention for a desire clears the commitment threshold C. Expected
intention: visitation-weighted mean intention over those attributed states,
i.e. the chance an attributed intention actually gets fulfilled. Weights are
the empirical visit counts from the policy graph, so frequently observed
states dominate exactly as they do in the recorded behaviour.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Callable, Sequence

from .desires import ANY, ANY_SAFE, ANY_UNSAFE, DesireRegistry
from .errors import InputError
from .graph import PolicyGraph, Trajectory, build_policy_graph
from .intention import IntentionTable, compute_intention_table


@dataclass(frozen=True)
class IntentionMetrics:
    desire: str
    kind: str
    threshold: float
    attributed: float
    expected: float
    n_states_attributed: int
    visitation_mass: int


@dataclass(frozen=True)
class MetricsRow:
    """One report line; ``no_data`` marks an empty cohort (distinct from 0/0)."""

    cohort: str
    metrics: IntentionMetrics | None
    desire: str = ""
    kind: str = ""

    @property
    def no_data(self) -> bool:
        return self.metrics is None


def _check_threshold(threshold: float) -> None:
    if not 0 < threshold <= 1:
        raise ValueError(f"commitment threshold must be in (0, 1], got {threshold}")


def _attributed_states(
    graph: PolicyGraph, table: IntentionTable, desire: str, threshold: float
) -> list[tuple[int, float]]:
    column = table.column(desire)
    out = []
    for state, visits in graph.node_counts.items():
        value = column.get(state, 0.0)
        if value >= threshold:
            out.append((visits, value))
    return out

def attributed_intention(
    graph: PolicyGraph, table: IntentionTable, desire: str, threshold: float
) -> float:
    """Share of visitation mass on states with intention >= threshold."""
    _check_threshold(threshold)
    total = graph.total_visits()
    if total == 0:
        return 0.0
    qualifying = _attributed_states(graph, table, desire, threshold)
    return sum(v for v, _ in qualifying) / total


def expected_intention(
    graph: PolicyGraph, table: IntentionTable, desire: str, threshold: float
) -> float:
    """Visitation-weighted mean intention over attributed states; 0 when none."""
    _check_threshold(threshold)
    qualifying = _attributed_states(graph, table, desire, threshold)
    mass = sum(v for v, _ in qualifying)
    if mass == 0:
        return 0.0
    return sum(v * value for v, value in qualifying) / mass


def intention_metrics(
    graph: PolicyGraph, table: IntentionTable, desire: str, threshold: float
) -> IntentionMetrics:
    _check_threshold(threshold)
    qualifying = _attributed_states(graph, table, desire, threshold)
    mass = sum(v for v, _ in qualifying)
    total = graph.total_visits()
    return IntentionMetrics(
        desire=desire,
        kind=table.kinds.get(desire, ""),
        threshold=threshold,
        attributed=mass / total if total else 0.0,
        expected=sum(v * value for v, value in qualifying) / mass if mass else 0.0,
        n_states_attributed=len(qualifying),
        visitation_mass=mass,
    )


def metrics_report(
    graph: PolicyGraph, table: IntentionTable, threshold: float, cohort: str = "all"
) -> list[MetricsRow]:
    """Per-desire rows followed by the aggregate rows present in the table."""
    rows = []
    ordered = table.desires() + [
        n for n in (ANY_SAFE, ANY_UNSAFE, ANY) if n in table.columns
    ]
    for name in ordered:
        m = intention_metrics(graph, table, name, threshold)
        rows.append(MetricsRow(cohort=cohort, metrics=m, desire=name, kind=m.kind))
    return rows


def max_over_desires(
    table: IntentionTable, kind: str = "all"
) -> dict:
    """Diagnostic alternative to the union-event aggregate: per-state maximum
    intention over the (kind-filtered) desires."""
    out: dict = {}
    for name in table.desires():
        if kind != "all" and table.kinds.get(name) != kind:
            continue
        for state, value in table.columns[name].items():
            if value > out.get(state, 0.0):
                out[state] = value
    return out


def cohort_metrics(
    trajectories: Sequence[Trajectory],
    partition: Callable[[Trajectory], str],
    registry: DesireRegistry,
    threshold: float,
    cohorts: Sequence[str] | None = None,
    tol: float = 1e-9,
    max_iter: int = 100_000,
) -> list[MetricsRow]:
    """Build one policy graph per cohort and compute metrics side by side.

    ``partition`` must assign every trajectory to exactly one cohort name.
    Cohorts listed in ``cohorts`` but absent from the data yield rows flagged
    no-data rather than zeros.
    """
    _check_threshold(threshold)
    assigned: dict[str, list[Trajectory]] = {}
    for traj in trajectories:
        label = partition(traj)
        if not isinstance(label, str):
            raise InputError(f"partition returned non-string cohort {label!r}")
        assigned.setdefault(label, []).append(traj)
    names = list(cohorts) if cohorts is not None else sorted(assigned)
    rows: list[MetricsRow] = []
    desire_order = registry.names() + [ANY_SAFE, ANY_UNSAFE, ANY]
    per_cohort: dict[str, list[MetricsRow]] = {}
    for name in names:
        members = assigned.get(name, [])
        if not members:
            per_cohort[name] = [
                MetricsRow(cohort=name, metrics=None, desire=d, kind="") for d in desire_order
            ]
            continue
        graph = build_policy_graph(members)
        table = compute_intention_table(graph, registry, tol=tol, max_iter=max_iter)
        per_cohort[name] = metrics_report(graph, table, threshold, cohort=name)
    # desire-major ordering so cohorts line up side by side
    for i in range(len(desire_order)):
        for name in names:
            cohort_rows = per_cohort[name]
            if i < len(cohort_rows):
                rows.append(cohort_rows[i])
    return rows


CSV_COLUMNS = [
    "cohort",
    "desire",
    "kind",
    "C",
    "attributed",
    "expected",
    "n_states_attributed",
    "visitation_mass",
]


def rows_to_csv(rows: Sequence[MetricsRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        if row.metrics is None:
            writer.writerow([row.cohort, row.desire, row.kind, "", "NA", "NA", "NA", "NA"])
        else:
            m = row.metrics
            writer.writerow(
                [
                    row.cohort,
                    m.desire,
                    m.kind,
                    format(m.threshold, ".12g"),
                    format(m.attributed, ".12g"),
                    format(m.expected, ".12g"),
                    m.n_states_attributed,
                    m.visitation_mass,
                ]
            )
    return buf.getvalue()


def rows_to_json(rows: Sequence[MetricsRow]) -> str:
    out = []
    for row in rows:
        if row.metrics is None:
            out.append({"cohort": row.cohort, "desire": row.desire, "no_data": True})
        else:
            m = row.metrics
            out.append(
                {
                    "cohort": row.cohort,
                    "desire": m.desire,
                    "kind": m.kind,
                    "C": m.threshold,
                    "attributed": m.attributed,
                    "expected": m.expected,
                    "n_states_attributed": m.n_states_attributed,
                    "visitation_mass": m.visitation_mass,
                }
            )
    return json.dumps(out, separators=(",", ":"))
