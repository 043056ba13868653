"""Exception types shared across the toolkit."""


class HypError(Exception):
    """Base class for all toolkit errors."""


# geometry kernel
class NotHyperbolic(HypError):
    """Matrix has |trace| <= 2 (+ tolerance): parabolic or elliptic."""


class Degenerate(HypError):
    """Geodesics share an endpoint within tolerance."""


class Crossing(HypError):
    """Geodesics intersect, so a mutual perpendicular does not exist."""


# scalar formulas
class NonPositiveLength(HypError):
    pass


class EpsilonOutOfRange(HypError):
    pass


class DegenerateStrip(HypError):
    pass


# surfaces
class InvalidGraph(HypError):
    pass


class DegenerateCoordinates(HypError):
    pass


class TrivialCurve(HypError):
    pass


class NonPrimitive(HypError):
    pass


class EnumerationNotConverged(HypError):
    pass


class WordCapExceeded(HypError):
    pass


class BersCurvesCross(HypError):
    pass


class Disjoint(HypError):
    pass


class SearchExhausted(HypError):
    pass


# currents
class EmptyEnumeration(HypError):
    pass


class NotFilling(HypError):
    pass


# minimizer
class NoConvergence(HypError):
    pass


class StepTooSmall(HypError):
    pass


# verify
class BalancingInfeasible(HypError):
    pass
