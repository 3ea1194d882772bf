"""Exception hierarchy shared by every module of the package."""


class PolygaugeError(Exception):
    """Base class for all errors raised by polygauge."""


class InputError(PolygaugeError, ValueError):
    """Malformed input: wrong shapes, non-finite entries, bad descriptors."""


class UndefinedSupportError(PolygaugeError, ValueError):
    """The H-support of the zero vector is not defined."""


class CapacityError(PolygaugeError, ValueError):
    """A builder would emit more columns than the dense representation allows."""


class PreconditionError(PolygaugeError):
    """A certification hypothesis (restricted injectivity, nonzero direction, ...) fails."""


class ConditioningError(PolygaugeError):
    """A Gram matrix that should be invertible is numerically singular."""


class SolverFailure(PolygaugeError):
    """An iterative solver hit its iteration cap or stalled.

    ``diagnostics`` carries whatever the solver knew when it gave up.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class NotOptimalError(PolygaugeError):
    """The first-order optimality condition fails at the candidate point."""
