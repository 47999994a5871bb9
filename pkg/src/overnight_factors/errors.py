"""Exception types shared across the package."""


class DataError(ValueError):
    """Input data is missing, malformed, or too short for the request."""


class NumericalError(ArithmeticError):
    """A numerical precondition failed (rank deficiency, zero variance, ...)."""


class RankDeficientError(NumericalError):
    pass
