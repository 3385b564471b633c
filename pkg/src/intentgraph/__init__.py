"""Intention-aware policy graphs for explaining recorded driving behaviour."""

from .desires import (
    AnyDesireGoal,
    DesireRegistry,
    DesireSpec,
    PredicateClause,
    any_desire_actions,
    in_desire_region,
    load_builtin_registry,
    load_desire_file,
    load_registry,
)
from .discretize import (
    DEFAULT_CONFIG,
    Detection,
    DiscretizerConfig,
    MapOracle,
    RawFrame,
    RawScene,
    SceneMapView,
    discretize_scene,
    discretize_state,
    label_action,
)
from .errors import (
    ActionNotObservedError,
    ConvergenceError,
    DesireSpecError,
    InputError,
    IntentGraphError,
    NoObservationsError,
    StateNotObservedError,
    UnknownDesireError,
)
from .graph import PolicyGraph, Trajectory, build_policy_graph, merge
from .intention import (
    IntentionTable,
    SolveStats,
    compute_intention_table,
    compute_intentions,
    exact_intentions,
    exact_intentions_oracle,
    solve_intentions,
)
from .mapdata import FeatureMap
from .metrics import (
    IntentionMetrics,
    attributed_intention,
    cohort_metrics,
    expected_intention,
    intention_metrics,
    metrics_report,
)
from .qa import PlanStep, WhyAnswer, ask_how, ask_what, ask_why, intention_trace
from .synthworld import (
    COMPLIANT,
    RECKLESS,
    ScriptedPolicy,
    WorldConfig,
    generate_corpus,
    generate_scene,
)
from .vocab import ActionLabel, DiscreteState, PREDICATES

__version__ = "0.1.0"
