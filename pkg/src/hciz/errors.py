"""Exception hierarchy; each class maps to one CLI exit code."""


class HCIZError(Exception):
    exit_code = 1


class DomainError(HCIZError, ValueError):
    """Input outside the domain of an operation."""

    exit_code = 2


class PrecisionError(HCIZError, ArithmeticError):
    """Requested accuracy could not be reached, or an iteration failed to converge."""

    exit_code = 3


ConvergenceError = PrecisionError


class CacheFormatError(HCIZError):
    exit_code = 4


class CrossCheckError(HCIZError):
    """Two independent computations of the same quantity disagree."""

    exit_code = 5


class ConsistencyError(HCIZError, AssertionError):
    """Internal invariant violated; indicates a bug rather than bad input."""

    exit_code = 5
