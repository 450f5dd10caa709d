"""Exception types raised by the simulator."""


class CdprError(Exception):
    """Base class for all simulator errors."""


class SingularityError(CdprError):
    """A kinematic map was evaluated at (or too close to) a singular
    configuration.  Carries the offending parameter value."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class MalformedMatrixError(CdprError, ValueError):
    """Input matrix violates a structural precondition (e.g. not
    antisymmetric within tolerance)."""


class DegenerateGeometryError(CdprError):
    """Cable geometry collapsed (zero-length cable)."""


class RankDeficiencyError(CdprError):
    """A matrix that must have full rank does not (payload left the
    wrench-feasible workspace, or a Jacobian became degenerate)."""


class AllocationError(CdprError):
    """Force distribution could not satisfy the tension limits.  Carries
    the worst limit violation in newtons."""

    def __init__(self, message, worst_violation=None):
        super().__init__(message)
        self.worst_violation = worst_violation


class ConvergenceError(CdprError):
    """An iterative solver hit its iteration cap.  Carries the residual
    at the last iterate."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DivergenceError(CdprError):
    """A simulated state or parameter estimate left its sanity bounds."""
