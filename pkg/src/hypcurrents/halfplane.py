"""Floating-point geometry of the hyperbolic plane, upper half-plane model.

Points live at x + iy with y > 0.  Geodesics are stored by their two
boundary endpoints (a real number, or infinity).  Orientation-preserving
isometries are unit-determinant 2x2 real matrices modulo sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import tolerances
from .errors import Crossing, Degenerate, NotHyperbolic

INF = math.inf


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"point must have y > 0, got y = {self.y}")


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the boundary circle: a real number or infinity."""

    value: float  # math.inf encodes the point at infinity

    @property
    def is_infinity(self) -> bool:
        return math.isinf(self.value)

    def sort_key(self):
        # finite reals by value, infinity greatest
        return (1, 0.0) if self.is_infinity else (0, self.value)


def _bp(v) -> BoundaryPoint:
    return v if isinstance(v, BoundaryPoint) else BoundaryPoint(float(v))


@dataclass(frozen=True)
class GeodesicLine:
    """Unoriented geodesic, canonical form: smaller endpoint first."""

    e1: BoundaryPoint
    e2: BoundaryPoint

    def __init__(self, e1, e2):
        e1, e2 = _bp(e1), _bp(e2)
        if e1.sort_key() > e2.sort_key():
            e1, e2 = e2, e1
        if _endpoints_coincide(e1, e2):
            raise ValueError("geodesic endpoints must be distinct")
        object.__setattr__(self, "e1", e1)
        object.__setattr__(self, "e2", e2)


def _endpoints_coincide(a: BoundaryPoint, b: BoundaryPoint, tol=None) -> bool:
    if a.is_infinity or b.is_infinity:
        return a.is_infinity and b.is_infinity
    if tol is None:
        tol = tolerances().geometric
    return abs(a.value - b.value) <= tol * max(1.0, abs(a.value), abs(b.value))


class Isometry:
    """2x2 real matrix with det renormalized to 1, identified with its negation.

    The stored representative is sign-normalized so the first nonzero entry
    (scanning a, b, c, d) is positive, which makes equality mod +-I a direct
    comparison.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        det = a * d - b * c
        if det <= 0:
            raise ValueError(f"matrix must have positive determinant, got {det}")
        if abs(det - 1.0) > tolerances().algebraic:
            s = 1.0 / math.sqrt(det)
            a, b, c, d = a * s, b * s, c * s, d * s
        # sign normalization
        for entry in (a, b, c, d):
            if entry != 0.0:
                if entry < 0.0:
                    a, b, c, d = -a, -b, -c, -d
                break
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(1.0, 0.0, 0.0, 1.0)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __mul__(self, other: "Isometry") -> "Isometry":
        a, b, c, d = self.a, self.b, self.c, self.d
        e, f, g, h = other.a, other.b, other.c, other.d
        return Isometry(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def inverse(self) -> "Isometry":
        return Isometry(self.d, -self.b, -self.c, self.a)

    def conjugate(self, other: "Isometry") -> "Isometry":
        """self * other * self^{-1}"""
        return self * other * self.inverse()

    def apply(self, p: Point) -> Point:
        a, b, c, d = self.a, self.b, self.c, self.d
        den = (c * p.x + d) ** 2 + (c * p.y) ** 2
        x = ((a * p.x + b) * (c * p.x + d) + a * c * p.y * p.y) / den
        y = p.y / den  # det = 1
        return Point(x, y)

    def apply_boundary(self, q) -> BoundaryPoint:
        q = _bp(q)
        a, b, c, d = self.a, self.b, self.c, self.d
        if q.is_infinity:
            return BoundaryPoint(INF if c == 0.0 else a / c)
        den = c * q.value + d
        if den == 0.0:
            return BoundaryPoint(INF)
        return BoundaryPoint((a * q.value + b) / den)

    def apply_line(self, l: GeodesicLine) -> GeodesicLine:
        return GeodesicLine(self.apply_boundary(l.e1), self.apply_boundary(l.e2))

    def close_to(self, other: "Isometry", tol=None) -> bool:
        if tol is None:
            tol = tolerances().holonomy
        return all(
            abs(x - y) <= tol for x, y in zip(self.entries(), other.entries())
        )

    def is_identity(self, tol=None) -> bool:
        return self.close_to(Isometry.identity(), tol)

    def __repr__(self):
        return f"Isometry({self.a:.6g}, {self.b:.6g}, {self.c:.6g}, {self.d:.6g})"


def distance(p: Point, q: Point) -> float:
    arg = 1.0 + ((q.x - p.x) ** 2 + (q.y - p.y) ** 2) / (2.0 * p.y * q.y)
    return math.acosh(max(arg, 1.0))


def translation_length(g: Isometry) -> float:
    t = abs(g.trace)
    if t <= 2.0 + tolerances().near_parabolic:
        raise NotHyperbolic(f"|trace| = {t} is not > 2")
    return 2.0 * math.acosh(t / 2.0)


def is_hyperbolic(g: Isometry) -> bool:
    return abs(g.trace) > 2.0 + tolerances().near_parabolic


def fixed_points(g: Isometry):
    """(attracting, repelling) boundary fixed points of a hyperbolic matrix."""
    if not is_hyperbolic(g):
        raise NotHyperbolic(f"|trace| = {abs(g.trace)} is not > 2")
    a, b, c, d = g.a, g.b, g.c, g.d
    if abs(c) < 1e-300:
        # infinity is fixed; the finite fixed point solves (a - d) t = -b
        other = BoundaryPoint(b / (d - a)) if a != d else BoundaryPoint(INF)
        inf_attracting = abs(a) > abs(d)
        if inf_attracting:
            return BoundaryPoint(INF), other
        return other, BoundaryPoint(INF)
    disc = (d - a) ** 2 + 4.0 * b * c  # = trace^2 - 4 det
    sq = math.sqrt(max(disc, 0.0))
    t1 = ((a - d) + sq) / (2.0 * c)
    t2 = ((a - d) - sq) / (2.0 * c)
    # attracting fixed point has |c t + d| > 1 (derivative < 1)
    if abs(c * t1 + d) > 1.0:
        return BoundaryPoint(t1), BoundaryPoint(t2)
    return BoundaryPoint(t2), BoundaryPoint(t1)


def axis(g: Isometry) -> GeodesicLine:
    att, rep = fixed_points(g)
    return GeodesicLine(att, rep)


def axis_oriented(g: Isometry):
    """(repelling, attracting) pair, i.e. the axis oriented along translation."""
    att, rep = fixed_points(g)
    return rep, att


def cross(l1: GeodesicLine, l2: GeodesicLine) -> bool:
    """True iff the endpoint pairs strictly interleave on the boundary circle."""
    pts = [l1.e1, l1.e2, l2.e1, l2.e2]
    for i in range(2):
        for j in range(2, 4):
            if _endpoints_coincide(pts[i], pts[j]):
                raise Degenerate("geodesics share an endpoint")
    # map boundary circle to a common circular order; use angle coordinate
    def circ(p: BoundaryPoint) -> float:
        if p.is_infinity:
            return math.pi
        return 2.0 * math.atan(p.value)  # strictly increasing, inf -> pi

    a, b = sorted((circ(l1.e1), circ(l1.e2)))
    c, d = circ(l2.e1), circ(l2.e2)
    inside_c = a < c < b
    inside_d = a < d < b
    return inside_c != inside_d


def line_normalizer(l: GeodesicLine, oriented_pair=None) -> Isometry:
    """Isometry sending l to the imaginary axis.

    With oriented_pair = (rep, att) the repelling endpoint goes to 0 and the
    attracting one to infinity; otherwise (l.e1, l.e2) is used.
    """
    if oriented_pair is None:
        u, v = l.e1, l.e2
    else:
        u, v = oriented_pair
    u, v = _bp(u), _bp(v)
    if v.is_infinity:
        return Isometry(1.0, -u.value, 0.0, 1.0)
    if u.is_infinity:
        return Isometry(0.0, -1.0, 1.0, -v.value)
    uu, vv = u.value, v.value
    if uu > vv:
        return Isometry(1.0, -uu, 1.0, -vv)
    return Isometry(1.0, -uu, -1.0, vv)


def point_on_line(l: GeodesicLine, t: float, oriented_pair=None) -> Point:
    """Unit-speed point at parameter t (parameter origin fixed by the normalizer)."""
    n = line_normalizer(l, oriented_pair)
    return n.inverse().apply(Point(0.0, math.exp(t)))


def point_line_distance(p: Point, l: GeodesicLine):
    """(distance, foot parameter along l)."""
    n = line_normalizer(l)
    q = n.apply(p)
    r = math.hypot(q.x, q.y)
    return math.asinh(abs(q.x) / q.y), math.log(r)


def crossing_param(l_base: GeodesicLine, l_other: GeodesicLine, oriented_pair=None) -> float:
    """Parameter along l_base of its crossing with l_other (they must cross)."""
    n = line_normalizer(l_base, oriented_pair)
    u = n.apply_boundary(l_other.e1).value
    v = n.apply_boundary(l_other.e2).value
    if math.isinf(u) or math.isinf(v):
        raise Crossing("geodesic through infinity after normalization: shared endpoint")
    prod = u * v
    if prod >= 0.0:
        raise Crossing("geodesics do not cross")
    return 0.5 * math.log(-prod)


def perpendicular_distance(l1: GeodesicLine, l2: GeodesicLine) -> float:
    """Length of the common perpendicular between disjoint geodesics."""
    if cross(l1, l2):
        raise Crossing("geodesics intersect; perpendicular distance undefined")
    n = line_normalizer(l1)
    u = n.apply_boundary(l2.e1).value
    v = n.apply_boundary(l2.e2).value
    if math.isinf(u) or math.isinf(v):
        raise Degenerate("geodesics share an endpoint")
    if u * v <= 0:
        raise Crossing("geodesics intersect; perpendicular distance undefined")
    p, q = sorted((abs(u), abs(v)))
    return math.acosh((q + p) / (q - p))


def perpendicular_foot_params(l1: GeodesicLine, l2: GeodesicLine):
    """Parameters (t1 on l1, t2 on l2) of the common-perpendicular feet."""
    n = line_normalizer(l1)
    u = n.apply_boundary(l2.e1).value
    v = n.apply_boundary(l2.e2).value
    if math.isinf(u) or math.isinf(v) or u * v <= 0:
        raise Crossing("geodesics cross or share an endpoint")
    t1 = 0.5 * math.log(abs(u * v))
    # foot on l2: symmetric computation
    m = line_normalizer(l2)
    s = m.apply_boundary(l1.e1).value
    w = m.apply_boundary(l1.e2).value
    t2 = 0.5 * math.log(abs(s * w))
    return t1, t2


def segment_distance(l1: GeodesicLine, i1, l2: GeodesicLine, i2) -> float:
    """Distance between the subsegments [i1] of l1 and [i2] of l2.

    i1 and i2 are (t_lo, t_hi) parameter intervals along the respective lines.
    Returns 0 when the segments cross.
    """
    try:
        if cross(l1, l2):
            t1 = crossing_param(l1, l2)
            t2 = crossing_param(l2, l1)
            if i1[0] <= t1 <= i1[1] and i2[0] <= t2 <= i2[1]:
                return 0.0
        else:
            f1, f2 = perpendicular_foot_params(l1, l2)
            if i1[0] <= f1 <= i1[1] and i2[0] <= f2 <= i2[1]:
                return perpendicular_distance(l1, l2)
    except (Crossing, Degenerate):
        pass
    # closest approach involves a segment endpoint
    best = INF
    for t in i1:
        p = point_on_line(l1, t)
        d, foot = point_line_distance(p, l2)
        foot = min(max(foot, i2[0]), i2[1])
        q = point_on_line(l2, foot)
        best = min(best, distance(p, q))
    for t in i2:
        p = point_on_line(l2, t)
        d, foot = point_line_distance(p, l1)
        foot = min(max(foot, i1[0]), i1[1])
        q = point_on_line(l1, foot)
        best = min(best, distance(p, q))
    return best
