"""Exception types raised by the pipeline stages."""


class IfsError(ValueError):
    """Base class for invalid iterated function system data."""


class NonExpansive(IfsError):
    pass


class MissingZeroDigit(IfsError):
    pass


class BadProbabilities(IfsError):
    pass


class NotContractive(ArithmeticError):
    """No certified contraction bound for S^{-1} (or any power tried)."""


class TolUnreachable(ArithmeticError):
    pass


class CertificationFailed(ArithmeticError):
    pass


class SearchExhausted(RuntimeError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class Unreachable(RuntimeError):
    """Greedy code construction ran out of words before the target size."""

    def __init__(self, message, achieved):
        super().__init__(message)
        self.achieved = achieved


class UnknownDigit(ValueError):
    pass


class RhoTooLarge(ValueError):
    pass


class ScheduleViolation(ValueError):
    pass


class Divergent(ArithmeticError):
    pass


class MixedSystems(ValueError):
    pass


class TooLarge(ValueError):
    pass
