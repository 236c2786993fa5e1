"""Exception hierarchy shared by all modules."""


class WillmoreLabError(Exception):
    """Base class for all package errors."""


class DomainError(WillmoreLabError, ValueError):
    """A point, radius or parameter lies outside the admissible region."""


class ConfigurationError(WillmoreLabError, ValueError):
    """Unknown metric family, flavor or malformed parameters."""


class DegeneracyError(WillmoreLabError, ArithmeticError):
    """Induced metric or an integral that must be positive degenerated."""


class StarShapeLossError(WillmoreLabError):
    """The evolving surface is no longer a radial graph over the sphere."""


class ProjectionError(WillmoreLabError):
    """Area projection did not converge."""


class InstabilityError(WillmoreLabError, FloatingPointError):
    """Non-finite values appeared during time stepping; try a smaller dt."""


class StabilityBoundError(WillmoreLabError, ValueError):
    """Requested dt violates the explicit stability bound."""


class FitError(WillmoreLabError):
    """Nonlinear least-squares sphere fit failed."""


class ConfigError(WillmoreLabError, ValueError):
    """Invalid experiment configuration; ``field`` names the culprit."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
