"""Shared numerical tolerances and run configuration.

A single Tolerances value is threaded through every module via a context
variable, so a whole run can be tightened or loosened in one place.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
from dataclasses import dataclass, field, asdict, fields


@dataclass(frozen=True)
class Tolerances:
    # absolute tolerance for algebraic identities (det = 1, identity matrices, ...)
    algebraic: float = 1e-12
    # tolerance for derived geometric quantities (distances, axes, perpendiculars)
    geometric: float = 1e-10
    # tolerance for holonomy constructions (cuff lengths, relators, spectra)
    holonomy: float = 1e-8
    # words with |trace| in (2, 2 + near_parabolic] are rejected, not rescued
    near_parabolic: float = 1e-9
    # rounding used when hashing floats for dedup (digits)
    dedup_digits: int = 6


_current: contextvars.ContextVar[Tolerances] = contextvars.ContextVar(
    "hypcurrents_tolerances", default=Tolerances()
)


def tolerances() -> Tolerances:
    return _current.get()


@contextlib.contextmanager
def tolerance_context(**overrides):
    """Temporarily override tolerance fields for the enclosed block."""
    base = asdict(_current.get())
    base.update(overrides)
    token = _current.set(Tolerances(**base))
    try:
        yield _current.get()
    finally:
        _current.reset(token)


@dataclass
class RunConfig:
    """Knobs for surface construction, enumeration, optimization and checks."""

    # tolerance overrides (None = keep defaults)
    tolerance_overrides: dict = field(default_factory=dict)
    # Bers constant; default 21 (g - 1) is filled in per-genus when <= 0
    c_b: float = 0.0
    # per-curve Bers constant c_b' = 2 log(4g + 2) when <= 0
    c_b_prime: float = 0.0
    # enumeration scope for simple curves / systoles
    L_max: float = 8.0
    # word-length cap for curve enumeration
    word_cap: int = 8
    # quasi-isometry calibration constant (word length <= ceil(qi * L_max))
    qi: float = 4.0
    # word-radius cap for intersection-counting stabilization
    radius_cap: int = 16
    # extra slack added to geometric pruning margins in translate enumeration
    prune_margin: float = 2.0
    # optimizer options
    restarts: int = 5
    max_iter: int = 4000
    simplex_xatol: float = 1e-8
    simplex_fatol: float = 1e-10
    length_floor: float = 1e-2
    length_cap: float = 50.0
    # soft-check constants
    K_collar: float = 50.0
    K_marking: float = 50.0
    K_main: float = 100.0
    # io
    output_dir: str = "."
    seed: int = 0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                if f.name in ("c_b", "c_b_prime", "seed"):
                    continue  # filled in / allowed zero
                if v <= 0 and f.name not in ("tolerance_overrides",):
                    raise ValueError(f"RunConfig.{f.name} must be positive, got {v}")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown RunConfig keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    def bers_constant(self, genus: int) -> float:
        if self.c_b > 0:
            return self.c_b
        return 21.0 * (genus - 1)

    def bers_curve_constant(self, genus: int) -> float:
        if self.c_b_prime > 0:
            return self.c_b_prime
        return 2.0 * math.log(4 * genus + 2)
