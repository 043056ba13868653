"""Weighted multicurves as a finite model of geodesic currents.

A current is a finite list of distinct primitive classes with positive
weights.  Length and intersection extend linearly from the component
curves, which keeps every functional here exactly linear in the weights.
Filling and systole questions are answered over an explicit enumeration
scope recorded in a certificate, since the underlying infima range over
infinitely many classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import words as W
from .curves import (Marking, OrthogonalArc, arc_intersection,
                     component_contains, enumerate_classes,
                     geometric_intersection, same_class, shortest_marking,
                     simple_classes)
from .errors import EmptyEnumeration, NonPositiveLength, TrivialCurve
from .config import RunConfig

_DEFAULT_CFG = RunConfig()


def _cfg(cfg):
    return _DEFAULT_CFG if cfg is None else cfg


@dataclass(frozen=True)
class FillingCertificate:
    """Scope record for a filling check or a systole scan."""

    L_max: float
    classes_checked: int
    min_intersection: float
    witness: tuple  # class realizing the minimum


@dataclass(frozen=True)
class Current:
    """Positive-weighted multicurve; components canonical and distinct."""

    components: tuple  # ((word, weight), ...) canonical, sorted
    filling_certificate: FillingCertificate = None

    def __post_init__(self):
        seen = set()
        for w, wt in self.components:
            if not (wt > 0 and math.isfinite(wt)):
                raise NonPositiveLength(f"weight {wt} must be positive")
            if w != W.canonical(w):
                raise TrivialCurve(f"component {w} is not canonical")
            if w in seen:
                raise TrivialCurve(f"duplicate component {w}")
            seen.add(w)

    @property
    def words(self):
        return tuple(w for w, _ in self.components)

    @property
    def weights(self):
        return tuple(wt for _, wt in self.components)

    def scaled(self, c):
        if not (c > 0 and math.isfinite(c)):
            raise NonPositiveLength(f"scale {c} must be positive")
        return Current(tuple((w, c * wt) for w, wt in self.components))

    def with_certificate(self, cert):
        return Current(self.components, cert)


def make_current(items):
    """Build a current from (word, weight) pairs, merging repeated classes."""
    merged = {}
    for word, weight in items:
        c = W.canonical(word)
        if not c:
            raise TrivialCurve("empty word in current")
        merged[c] = merged.get(c, 0.0) + float(weight)
    comps = tuple(sorted(merged.items(), key=lambda p: W._word_key(p[0])))
    return Current(comps)


def marking_current(X, cfg=None, weights=None):
    """Unit-weight (or given-weight) current over a shortest marking."""
    marking = shortest_marking(X, _cfg(cfg))
    curves = marking.curves
    if weights is None:
        weights = (1.0,) * len(curves)
    return make_current(zip(curves, weights))


def current_length(X, mu, cfg=None):
    """mu-length of the surface: sum of weighted geodesic lengths."""
    return sum(wt * X.curve_length(w) for w, wt in mu.components)


def current_intersection(X, mu, target, cfg=None):
    """Intersection of a current with a curve class, an arc, or a current.

    Linear in all weights; symmetric when both arguments are currents.
    For a component equal to the target class the diagonal term is twice
    the self-intersection number (zero for simple classes).
    """
    cfg = _cfg(cfg)
    if isinstance(target, Current):
        total = 0.0
        for w2, wt2 in target.components:
            total += wt2 * current_intersection(X, mu, w2, cfg)
        return total
    if isinstance(target, OrthogonalArc):
        return sum(wt * arc_intersection(X, target, w, cfg)
                   for w, wt in mu.components)
    return sum(wt * geometric_intersection(X, w, target, cfg)
               for w, wt in mu.components)


def _default_scope(X, cfg):
    """Twice the diameter proxy: longest marking curve plus two."""
    marking = shortest_marking(X, cfg)
    return 2.0 * (max(marking.lengths) + 2.0)


def is_filling(X, mu, L_max=None, cfg=None):
    """Whether every enumerated simple class crosses mu.

    Checks positivity of i(mu, alpha) for all enumerated simple classes of
    length at most L_max, and that every pants curve and transversal of a
    shortest marking is crossed.  Returns (bool, certificate); the
    certificate records the scope actually checked.
    """
    cfg = _cfg(cfg)
    if L_max is None:
        L_max = cfg.L_max
    classes = simple_classes(X, L_max, cfg)
    marking = shortest_marking(X, cfg)
    pool = list(classes)
    for w in marking.curves:
        if all(w != w2 for _, w2 in pool):
            pool.append((X.curve_length(w), w))
    best = None
    count = 0
    for ell, w in pool:
        val = current_intersection(X, mu, w, cfg)
        count += 1
        if best is None or val < best[0]:
            best = (val, w)
        if val <= 0:
            cert = FillingCertificate(L_max, count, val, w)
            return False, cert
    if best is None:
        raise EmptyEnumeration(f"no simple classes up to length {L_max}")
    cert = FillingCertificate(L_max, count, best[0], best[1])
    return True, cert


def systole(X, mu, component=None, L_max=None, cfg=None):
    """Minimal i(mu, alpha) over enumerated essential simple classes.

    With a thick component the scan is restricted to classes supported
    inside it (boundary-parallel classes excluded).  Returns
    (value, witness, certificate).
    """
    cfg = _cfg(cfg)
    if L_max is None:
        L_max = _default_scope(X, cfg)
    best = None
    count = 0
    for ell, w in simple_classes(X, L_max, cfg):
        if component is not None and not component_contains(X, component, w,
                                                            cfg):
            continue
        val = current_intersection(X, mu, w, cfg)
        count += 1
        if best is None or val < best[0]:
            best = (val, w)
    if best is None:
        raise EmptyEnumeration(
            f"no essential simple class of length <= {L_max} in scope")
    cert = FillingCertificate(L_max, count, best[0], best[1])
    return best[0], best[1], cert
