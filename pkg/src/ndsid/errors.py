"""Exception hierarchy shared by every module."""


class NDSError(Exception):
    """Base class for all errors raised by ndsid."""


class ParameterError(NDSError, ValueError):
    pass


class DegenerateInputError(NDSError, ValueError):
    pass


class FormatError(NDSError, ValueError):
    pass


class ConfigError(NDSError, ValueError):
    pass


class ConstructionError(NDSError):
    pass


class AssumptionViolation(NDSError):
    """A modelling assumption (stability, homogeneity, distinguishability) fails.

    ``assumption`` names the failing assumption so reports can show it.
    """

    def __init__(self, message, assumption=None):
        super().__init__(message)
        self.assumption = assumption


class StabilityError(NDSError):
    pass


class ConditioningError(NDSError):
    pass


class LengthError(NDSError, ValueError):
    pass


class DivergenceError(NDSError):
    pass
