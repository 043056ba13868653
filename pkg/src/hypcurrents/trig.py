"""Closed-form scalar formulas: collar widths, strip-surgery quantities,
polygon identities, and the explicit mixed-collar constants.

All functions work in double precision; lengths are expected in the
well-conditioned desk-scale range [0.01, 50].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateStrip, EpsilonOutOfRange, NonPositiveLength


def _require_positive(name, value):
    if not value > 0:
        raise NonPositiveLength(f"{name} must be positive, got {value}")


def collar_width_closed(ell: float) -> float:
    """Half-width of the embedded collar around a closed geodesic of length ell."""
    _require_positive("ell", ell)
    return math.asinh(1.0 / math.sinh(ell / 2.0))


def collar_width_arc(ell: float) -> float:
    """Collar width of an orthogonal geodesic arc of length ell.

    Equals collar_width_closed(2 * ell): the arc doubles across the boundary.
    """
    _require_positive("ell", ell)
    return math.asinh(1.0 / math.sinh(ell))


def epsilon_max(ell_beta: float) -> float:
    """Largest admissible strip half-separation for an arc of length ell_beta.

    Defined by sinh(e_max) = tanh(1) * tanh(Col/2) / cosh(ell_beta/2) with
    Col the arc collar width.  Always in (0, tanh 1), decaying like
    exp(-1.5 * ell_beta).
    """
    _require_positive("ell_beta", ell_beta)
    col = collar_width_arc(ell_beta)
    s = math.tanh(1.0) * math.tanh(col / 2.0) / math.cosh(ell_beta / 2.0)
    return math.asinh(s)


def strip_half_width(epsilon: float, ell_beta: float) -> float:
    """Half-width a of the strip's trace along the crossing curve.

    Lambert-quadrilateral relation: tanh(a) = tanh(epsilon) * cosh(ell_beta/2).
    """
    _check_epsilon(epsilon, ell_beta)
    t = math.tanh(epsilon) * math.cosh(ell_beta / 2.0)
    if t >= 1.0:
        raise DegenerateStrip(f"tanh(a) = {t} >= 1")
    return math.atanh(t)


def strip_angle(epsilon: float, ell_beta: float) -> float:
    """Acute angle of the strip: cos(theta) = sinh(eps) * sinh(ell_beta/2)."""
    _require_positive("ell_beta", ell_beta)
    if epsilon < 0:
        raise EpsilonOutOfRange(f"epsilon = {epsilon} < 0")
    c = math.sinh(epsilon) * math.sinh(ell_beta / 2.0)
    if c >= 1.0:
        raise DegenerateStrip(f"cos(theta) = {c} >= 1")
    return math.acos(c)


def cylinder_width(epsilon: float, ell_beta: float) -> float:
    """Width of the cylinder produced by the surgery; at most 1.

    tanh(w) = sinh(eps) * sinh(ell_beta/2) / tanh(Col/2).
    """
    _check_epsilon(epsilon, ell_beta)
    col = collar_width_arc(ell_beta)
    t = math.sinh(epsilon) * math.sinh(ell_beta / 2.0) / math.tanh(col / 2.0)
    if t >= 1.0:
        raise DegenerateStrip(f"tanh(w) = {t} >= 1")
    return math.atanh(t)


def surgered_alpha_length(ell_alpha: float, ell_beta: float, epsilon: float) -> float:
    """Length of the crossing curve after removing an epsilon-strip.

    (1 - sinh^2(eps) sinh^2(ell_beta/2)) cosh^2(ell_alpha - a) = cosh^2(l_Y/2)
    where a is the strip half-width; monotone decreasing in epsilon, equal to
    ell_alpha at epsilon = 0.
    """
    _require_positive("ell_alpha", ell_alpha)
    _check_epsilon(epsilon, ell_beta)
    a = strip_half_width(epsilon, ell_beta)
    factor = 1.0 - (math.sinh(epsilon) * math.sinh(ell_beta / 2.0)) ** 2
    if factor <= 0.0:
        raise DegenerateStrip("strip angle degenerates: sinh(eps) sinh(l/2) >= 1")
    val = factor * math.cosh(ell_alpha / 2.0 - a) ** 2
    if val < 1.0:
        raise DegenerateStrip("surgered length equation has no solution")
    return 2.0 * math.acosh(math.sqrt(val))


def ell_min(ell_alpha: float, ell_beta: float) -> float:
    """Minimal achievable surgered length, attained at epsilon_max."""
    return surgered_alpha_length(ell_alpha, ell_beta, epsilon_max(ell_beta))


def solve_epsilon_for_length(ell_alpha: float, ell_beta: float, target: float,
                             tol: float = 1e-12) -> float:
    """Inverse solve: the epsilon with surgered_alpha_length(...) = target.

    Bisection on the monotone map; target must lie in [ell_min, ell_alpha].
    """
    emax = epsilon_max(ell_beta)
    lo_val = surgered_alpha_length(ell_alpha, ell_beta, emax)
    if not (lo_val - 1e-12 <= target <= ell_alpha + 1e-12):
        raise EpsilonOutOfRange(
            f"target {target} outside [{lo_val}, {ell_alpha}]")
    lo, hi = 0.0, emax
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if surgered_alpha_length(ell_alpha, ell_beta, mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def length_saving_constant(epsilon: float, ell_beta: float) -> float:
    """C(eps) = min(eps, log(1 + exp(-ell_beta/2) * eps^2))."""
    if epsilon < 0:
        raise EpsilonOutOfRange(f"epsilon = {epsilon} < 0")
    _require_positive("ell_beta", ell_beta)
    return min(epsilon, math.log1p(math.exp(-ell_beta / 2.0) * epsilon * epsilon))


def pentagon_orthogonal_arc(ell_gamma: float, a: float) -> float:
    """Arc length from the right-angled pentagon relation
    sinh(l/2) = cosh(ell_gamma/2) / sinh(a)."""
    _require_positive("ell_gamma", ell_gamma)
    _require_positive("a", a)
    return 2.0 * math.asinh(math.cosh(ell_gamma / 2.0) / math.sinh(a))


def bridge_arc_length(perp: float, ell: float, m: float, t: float) -> float:
    """Length of the bridge arc at parameter t in [0, 1]:
    cosh L = 2 sinh^2(perp) cosh(t ell) cosh(t m) + cosh(t ell - t m)."""
    if perp < 0 or ell < 0 or m < 0:
        raise NonPositiveLength("perp, ell, m must be nonnegative")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must be in [0, 1], got {t}")
    val = (2.0 * math.sinh(perp) ** 2 * math.cosh(t * ell) * math.cosh(t * m)
           + math.cosh(t * ell - t * m))
    return math.acosh(max(val, 1.0))


@dataclass(frozen=True)
class CollarAngles:
    theta: float
    col: float


def collar_angle_identities(ell: float) -> CollarAngles:
    """The collar boundary angle computed from tan(theta/2) = exp(-Col);
    it also satisfies sin(theta) = tanh(ell/2) and sec(theta) = cosh(ell/2).
    """
    _require_positive("ell", ell)
    col = collar_width_closed(ell)
    theta = 2.0 * math.atan(math.exp(-col))
    return CollarAngles(theta=theta, col=col)


def mixed_collar_delta(ell_beta_plus: float, ell_beta_minus: float = 0.0) -> float:
    """Explicit lower-bound constant for the curve-vs-arc-system collar
    inequality, evaluated at epsilon = half the admissible maximum:

        d = C(eps) / (4 + 8 Col + 2 C(eps))

    with Col the summed arc collar widths; ell_beta_minus = 0 encodes an
    empty second arc.
    """
    _require_positive("ell_beta_plus", ell_beta_plus)
    if ell_beta_minus < 0:
        raise NonPositiveLength(f"ell_beta_minus = {ell_beta_minus} < 0")
    eps_admissible = epsilon_max(ell_beta_plus)
    col = collar_width_arc(ell_beta_plus)
    if ell_beta_minus > 0:
        eps_admissible = min(eps_admissible, epsilon_max(ell_beta_minus))
        col += collar_width_arc(ell_beta_minus)
    eps = 0.5 * eps_admissible
    c = length_saving_constant(eps, ell_beta_plus)
    return c / (4.0 + 8.0 * col + 2.0 * c)


def mixed_collar_D(ell_beta_closed: float) -> float:
    """Explicit constant for the two-curve collar inequality:
    D = 1 / (1/delta + 4 + 2 ell / Col_closed(ell)); always in (0, 1/4]."""
    _require_positive("ell_beta_closed", ell_beta_closed)
    delta = mixed_collar_delta(ell_beta_closed)
    col = collar_width_closed(ell_beta_closed)
    return 1.0 / (1.0 / delta + 4.0 + 2.0 * ell_beta_closed / col)


def _check_epsilon(epsilon: float, ell_beta: float) -> None:
    _require_positive("ell_beta", ell_beta)
    if epsilon < 0:
        raise EpsilonOutOfRange(f"epsilon = {epsilon} < 0")
    emax = epsilon_max(ell_beta)
    if epsilon > emax * (1.0 + 1e-12) + 1e-15:
        raise EpsilonOutOfRange(
            f"epsilon = {epsilon} exceeds epsilon_max = {emax}")


@dataclass(frozen=True)
class SurgeryProfile:
    """Scalar record of one epsilon-strip surgery."""

    ell_beta: float
    epsilon: float
    epsilon_max: float
    a: float
    theta: float
    w: float
    c_eps: float
    ell_alpha_before: float
    ell_alpha_after: float
    ell_min: float

    @classmethod
    def compute(cls, ell_alpha: float, ell_beta: float, epsilon: float) -> "SurgeryProfile":
        emax = epsilon_max(ell_beta)
        return cls(
            ell_beta=ell_beta,
            epsilon=epsilon,
            epsilon_max=emax,
            a=strip_half_width(epsilon, ell_beta),
            theta=strip_angle(epsilon, ell_beta),
            w=cylinder_width(epsilon, ell_beta),
            c_eps=length_saving_constant(epsilon, ell_beta),
            ell_alpha_before=ell_alpha,
            ell_alpha_after=surgered_alpha_length(ell_alpha, ell_beta, epsilon),
            ell_min=surgered_alpha_length(ell_alpha, ell_beta, emax),
        )

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= self.epsilon_max * (1 + 1e-12):
            raise EpsilonOutOfRange("epsilon outside [0, epsilon_max]")
