"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid or inconsistent model parameters."""


class InsufficientDataError(ValueError):
    """Input data cannot support the requested statistic (e.g. no exceedances)."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its stated accuracy."""


class NoTailIndexError(NumericalError):
    pass


class ConsistencyError(NumericalError):
    """A tail index does not normalize the backward increment law."""


class InsufficientConditioningError(NumericalError):
    """Too few tail-chain draws satisfy a conditioning event."""

    def __init__(self, message, count):
        super().__init__(message)
        self.count = count
