"""Exception types raised across the package."""


class FinsetError(Exception):
    """Base class for all package errors."""


class NumericalError(FinsetError):
    """Base class for failures of a numerical routine."""


class DimensionMismatch(FinsetError, ValueError):
    pass


class NotSymmetric(NumericalError, ValueError):
    pass


class NotPositiveDefinite(NumericalError, ValueError):
    pass


class RankDeficient(NumericalError):
    """Regressor matrix lacks full column rank (insufficient excitation)."""


class EmptyTrajectory(FinsetError, ValueError):
    pass


class ConfigInvalid(FinsetError, ValueError):
    """Experiment configuration failed validation.

    ``field`` names the offending key (dotted path for nested keys).
    """

    def __init__(self, field, message):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class UnknownExperiment(FinsetError, ValueError):
    pass
