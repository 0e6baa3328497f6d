"""Exception hierarchy shared by all subpackages."""


class HCMinimaxError(Exception):
    """Base class for every error raised by :mod:`hcminimax`."""


class IntervalError(HCMinimaxError, ArithmeticError):
    pass


class DivisorContainsZero(IntervalError, ZeroDivisionError):
    pass


class NegativeSqrtDomain(IntervalError, ValueError):
    pass


class EmptyIntersection(IntervalError):
    """Raised when an interval Newton step leaves no candidate root."""


class TolExceeded(HCMinimaxError):
    """The series tail could not be pushed below tolerance within the term cap."""


class DeltaOutOfRange(HCMinimaxError, ValueError):
    pass


class QuadratureNonConvergence(HCMinimaxError):
    pass


class DiscriminantViolation(HCMinimaxError, ValueError):
    pass


class ShapeHypothesisUnverified(HCMinimaxError):
    """The polynomial does not have the descend-then-ascend coefficient pattern."""


class ZeroVector(HCMinimaxError, ValueError):
    pass
