"""Exception hierarchy shared by every module of the package."""


class FpMulError(Exception):
    """Base class for all library errors."""


class NotPrimeError(FpMulError, ValueError):
    pass


class NoInverseError(FpMulError, ZeroDivisionError):
    pass


class ContextMismatchError(FpMulError, ValueError):
    """Operands live over different primes or different extension fields."""


class ParameterError(FpMulError, ValueError):
    """An argument violates a documented precondition."""


class SearchExhaustedError(FpMulError, RuntimeError):
    """A randomized or scanning search hit its iteration cap."""


class PlanningError(FpMulError, RuntimeError):
    """No valid multiplication plan could be built for the requested strategy."""
