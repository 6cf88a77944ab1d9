"""Exception hierarchy shared across the package."""


class SensorSelectError(Exception):
    """Base class for all errors raised by this package."""


class ModelFormatError(SensorSelectError):
    """A model file or field failed structural validation."""


class NumericalError(SensorSelectError):
    """A matrix factorization or solve failed, or iterated redraws ran out."""


class ConsistencyError(SensorSelectError):
    """An internal identity that must hold by construction was violated."""


class BudgetError(SensorSelectError):
    """An enumeration request exceeded the hard work cap."""
