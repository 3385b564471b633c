"""Exception types shared across the package.

Every error carries a short machine-parseable ``code`` so the CLI can emit
stable one-line diagnostics without string-matching messages.
"""

from __future__ import annotations


class IntentGraphError(Exception):
    """Base class; ``code`` is stable across releases, the message is not."""

    code = "ERROR"


class NoObservationsError(IntentGraphError):
    code = "NO_OBSERVATIONS"


class StateNotObservedError(IntentGraphError):
    code = "STATE_NOT_OBSERVED"


class ActionNotObservedError(IntentGraphError):
    code = "ACTION_NOT_OBSERVED"


class UnknownDesireError(IntentGraphError):
    code = "UNKNOWN_DESIRE"


class UnknownSceneError(IntentGraphError):
    code = "UNKNOWN_SCENE"


class InputError(IntentGraphError):
    """Malformed input file or value (bad JSON, unknown labels, ...)."""

    code = "BAD_INPUT"


class DesireSpecError(IntentGraphError):
    """Desire config validation failure; ``violations`` lists every problem."""

    code = "INVALID_DESIRE_SPEC"

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ConvergenceError(IntentGraphError):
    """Fixed-point solve did not reach tolerance within the iteration cap."""

    code = "NO_CONVERGENCE"

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
