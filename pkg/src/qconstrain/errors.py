"""Exception types shared across the package."""


class QconstrainError(Exception):
    """Base class for all package errors."""


class DimensionError(QconstrainError):
    """Operator/state dimensions do not match."""


class InvalidCoordinates(QconstrainError):
    """Coordinate values violate their chart or parameterization ranges."""


class BasisError(QconstrainError):
    """A supplied basis is not orthonormal."""


class InvalidInput(QconstrainError):
    """Malformed user input (empty search sets, bad config values, ...)."""


class SingularConstraintMatrix(QconstrainError):
    """The constraint pairing matrix cannot be inverted.

    Raised eagerly for an odd number of constraints in the symplectic
    engine (the antisymmetric pairing of an odd set is always singular)
    and whenever the smallest singular value falls below the relative
    tolerance.
    """

    def __init__(self, message, condition_estimate=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class ChartSingularity(QconstrainError):
    """A coordinate chart degenerates at the requested point."""


class EvaluationError(QconstrainError):
    """A user-supplied function returned a non-finite value."""


class ProjectionFailure(QconstrainError):
    """Constraint-surface projection did not converge."""


class IntegrationError(QconstrainError):
    """Base class for integrator failures; carries the partial trajectory."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class DriftAbort(IntegrationError):
    """Constraint drift exceeded the configured abort threshold."""


class StepLimit(IntegrationError):
    """Step budget exhausted (or step size underflowed) before t_end."""


class FieldError(IntegrationError):
    """The vector field failed mid-flow; trajectory holds the last good state."""
