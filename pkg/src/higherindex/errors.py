"""Exception hierarchy.  Each class maps to a CLI exit code."""


class HigherIndexError(Exception):
    exit_code = 3


class HyperbolicDomainError(HigherIndexError, ValueError):
    """A point left the upper half-plane or a matrix is not in SL(2, R)."""


class DegenerateCoordinateError(HigherIndexError, ValueError):
    """Barycentric recursion hit the removable singularity at t0 = 1."""


class TruncationError(HigherIndexError):
    """An integration box does not cover the support it must cover."""


class ZeroDenominatorError(HigherIndexError, ZeroDivisionError):
    """Cut-off normalizer vanished: the bump's support is too small."""


class BoxOverflowError(HigherIndexError):
    """A lattice product left the truncation box."""


class NotIdempotentError(HigherIndexError, ValueError):
    pass


class DegreeMismatchError(HigherIndexError, ValueError):
    pass


class IntegralityError(HigherIndexError, AssertionError):
    """A trace pairing that must be an integer is not."""
    exit_code = 1
