"""Exception types raised across the package."""


class GridBalanceError(Exception):
    """Base class for all package errors."""


class TopologyError(GridBalanceError):
    """Raised when a communication graph is unusable (e.g. disconnected)."""


class EigenConvergenceError(GridBalanceError):
    """Raised when the Jacobi eigensolver runs out of sweeps."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class AveragingError(GridBalanceError):
    """Raised when distributed averaging does not reach its tolerance.

    ``record`` is filled in by the protocol runner with the partial
    simulation record collected before the failure.
    """

    def __init__(self, message: str, disagreement: float, rounds: int):
        super().__init__(message)
        self.disagreement = disagreement
        self.rounds = rounds
        self.record = None


class ScenarioError(GridBalanceError):
    """Invalid scenario configuration text."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        super().__init__(message)
        self.key = key
        self.line = line


class ScenarioSyntaxError(ScenarioError):
    """A line that is not ``key = value``, a comment or blank."""


class ScenarioValidationError(ScenarioError):
    """A key with a missing, unknown or out-of-range value."""


class LengthMismatchError(ScenarioValidationError):
    """A per-building vector whose length differs from the graph size."""
