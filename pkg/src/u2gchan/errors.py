"""Exception types raised by the simulator."""


class U2GError(Exception):
    """Base class for all simulator errors."""


class DomainError(U2GError, ValueError):
    """An argument lies outside the domain of an operation."""


class DegenerateGeometryError(U2GError, ValueError):
    """Coincident points or zero-length vectors where a direction is needed."""


class GeometryError(U2GError, ValueError):
    """Geometry violates a model precondition (e.g. UAV below the horizon)."""


class ConfigurationError(U2GError, ValueError):
    """Invalid or inconsistent scenario configuration."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class TrainingDivergenceError(U2GError, RuntimeError):
    def __init__(self, epoch):
        super().__init__(f"non-finite training loss at epoch {epoch}")
        self.epoch = epoch


class InsufficientDataError(U2GError, ValueError):
    pass


class DegenerateFitError(U2GError, ValueError):
    pass


class PowerUnderflowError(U2GError, FloatingPointError):
    pass


class SequencingError(U2GError, RuntimeError):
    """Operations requested in an order the pipeline does not allow."""


class UndefinedStatisticError(U2GError, ArithmeticError):
    """A statistic has no defined value for this input (e.g. AFD with no fades)."""
