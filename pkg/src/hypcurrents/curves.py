"""Curves on a marked surface: intersection numbers, conjugacy, twisting
numbers, orthogonal arc systems, curve enumeration and shortest markings.

The workhorse is a pruned breadth-first search over axis translates.  To
count intersections of two closed geodesics, work in the frame where one
period of the base geodesic is the segment [i, i e^L] of the imaginary axis.
Translates of the other curve's axis correspond one-to-one to conjugates
M = h g h^{-1} of its translation matrix (the centralizer of a primitive
hyperbolic element is the cyclic group it generates), so the search walks
conjugates under generator conjugation and keeps a state only while its
axis stays within a margin of the base segment.  Essential crossings of the
two curves correspond to kept axes crossing the segment, reduced modulo the
base translation and deduplicated by crossing position and angle.

Crossing candidates found by the double-precision walk are recomputed
exactly (high-precision products of the stored step paths, with period
reduction through the exact base matrix), so duplicate detection needs no
geometry-dependent tolerances.  Every count is computed with growing
margins and accepted only when three consecutive margins agree, so pruning
cannot silently drop intersections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree

from . import words as W
from .config import RunConfig
from .errors import (BersCurvesCross, Crossing, Disjoint, EmptyEnumeration,
                     EnumerationNotConverged, InvalidGraph, NonPrimitive,
                     SearchExhausted, TrivialCurve)
from .surface import (_ID, _apply_bd, _apply_pt, _conj, _diag, _fixed_points,
                      _inv, _line_normalizer_pair, _mul, _renorm)
from .trig import collar_width_arc, epsilon_max

_DEFAULT_CFG = RunConfig()


def _cfg(cfg):
    return _DEFAULT_CFG if cfg is None else cfg


# ---------------------------------------------------------------------------
# vectorized 2x2 helpers; matrices are rows (a, b, c, d) of an (n, 4) array


def _vmul_const_right(H, g):
    a, b, c, d = H[:, 0], H[:, 1], H[:, 2], H[:, 3]
    e, f, gg, h = g
    return np.stack(
        (a * e + b * gg, a * f + b * h, c * e + d * gg, c * f + d * h), axis=1)


def _unit_det(m):
    """Scale a positive-determinant matrix tuple to determinant one."""
    a, b, c, d = m
    s = 1.0 / math.sqrt(a * d - b * c)
    return (a * s, b * s, c * s, d * s)


def _unit_rows(H):
    """Rows scaled to unit Frobenius norm with the sign of the largest
    entry fixed, so equal isometries give (nearly) equal points."""
    nrm = np.sqrt(np.sum(H * H, axis=1))
    R = H / nrm[:, None]
    idx = np.argmax(np.abs(R), axis=1)
    sgn = np.sign(R[np.arange(len(R)), idx])
    return R * sgn[:, None]


def _vkeys(H):
    """Hashable keys identifying rows up to sign and tiny error."""
    scale = np.max(np.abs(H), axis=1)
    R = H / scale[:, None]
    sgn = np.zeros(len(H))
    for j in range(4):
        # the first column with a significantly nonzero entry fixes the sign
        col = R[:, j]
        newly = (sgn == 0.0) & (np.abs(col) > 1e-7)
        sgn[newly] = np.sign(col[newly])
    sgn[sgn == 0.0] = 1.0
    R = R * sgn[:, None]
    R = np.round(R, 9) + 0.0  # normalize -0.0
    return [tuple(row) for row in R]


def _axis_segment_cosh(u, v, lo, hi):
    """cosh of the distance between the axis with endpoints (u, v) and the
    imaginary-axis segment between heights e^lo and e^hi.

    For crossing axes the characteristic parameter is the crossing position,
    for disjoint ones the perpendicular foot; clamping it to [lo, hi] and
    taking the point-to-line distance covers every case."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        uv = u * v
        vert = ~np.isfinite(uv)
        tchar = np.where(vert, np.inf, 0.5 * np.log(np.abs(uv)))
        t = np.clip(tchar, lo, hi)
        et = np.exp(t)
        du = np.hypot(u, et)
        dv = np.hypot(v, et)
        sep = np.abs(u - v)
        cd = np.where(
            vert,
            np.hypot(np.where(np.isfinite(u), u, v), et) / et,
            du * dv / (sep * et),
        )
    return np.where(np.isfinite(cd), np.maximum(cd, 1.0), np.inf)


# ---------------------------------------------------------------------------
# the conjugate-state search


def _gen_mats(X, gens):
    letters = list(gens) if gens is not None else list(
        range(1, X.num_generators + 1))
    out = []
    for k in letters:
        g = X.gen_mats[k - 1]
        out.append(g)
        out.append(_inv(g))
    return out


def _vapply_bd(H, x):
    """Boundary Moebius action of each row on a single boundary point."""
    a, b, c, d = H[:, 0], H[:, 1], H[:, 2], H[:, 3]
    with np.errstate(divide="ignore", invalid="ignore"):
        if math.isinf(x):
            num, den = a, c
        else:
            num, den = a * x + b, c * x + d
        out = np.where(np.abs(den) > 1e-300 * np.abs(num), num / den, np.inf)
    return out


def _vapply_pt(H, z):
    """Moebius action of each row on a single interior point."""
    a, b, c, d = H[:, 0], H[:, 1], H[:, 2], H[:, 3]
    return (a * z + b) / (c * z + d)


def _state_points(H):
    """Deduplication coordinates: log-polar positions (log |z|, arg z) of
    the images of i and 2i.  Distinct group elements keep these point pairs
    apart by roughly the injectivity radius times the angular distance from
    the boundary, far above the ~1e-12 roundoff of the coordinates."""
    cols = []
    for z in (1j, 2j):
        w = _vapply_pt(H, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            cols.append(np.log(np.abs(w)))
            cols.append(np.arctan2(np.abs(w.imag), w.real))
    return np.stack(cols, axis=1)


def _vmul_const_left(H, g):
    a, b, c, d = H[:, 0], H[:, 1], H[:, 2], H[:, 3]
    e, f, gg, h = g
    return np.stack(
        (e * a + f * c, e * b + f * d, gg * a + h * c, gg * b + h * d), axis=1)


def _axis_coords(u, v, lo, hi, sat_lo, sat_hi):
    """Deduplication coordinates of an oriented translate axis: foot
    parameter along the base axis, orientation-aware inclination angle and
    distance to the segment, computed from endpoints saturated to the
    window [sat_lo, sat_hi] in log scale.

    Saturation is what makes the coordinates reproducible: an axis nearly
    asymptotic to the base axis (in a self-intersection band the base
    curve's own translates lie exactly on it) has an endpoint whose log is
    pure noise, and clamping it to the window floor - with a fixed + sign,
    since the side of an infinitesimal endpoint is noise too - lands every
    recomputation of the same element on the same point.  Distinct
    translates inside the corridor differ by at least the injectivity
    radius in foot position, angle, separation, or the accompanying
    log-norm coordinate."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        def sat(x):
            ax = np.where(np.isfinite(x), np.abs(x), np.inf)
            lx = np.clip(np.log(np.maximum(ax, 1e-300)), sat_lo, sat_hi)
            sg = np.where(lx <= sat_lo + 1e-9, 1.0,
                          np.where(np.signbit(x), -1.0, 1.0))
            return sg * np.exp(lx)

        U, V = sat(u), sat(v)
        tc = 0.5 * (np.log(np.abs(U)) + np.log(np.abs(V)))
        phi = np.arctan2(U + V, U - V)
        cs = np.maximum(_axis_segment_cosh(u, v, lo, hi), 1.0)
        dd = np.log(cs + np.sqrt(cs * cs - 1.0))
    return np.stack((tc, phi, dd), axis=1)


@dataclass
class _Band:
    """Result of a band search: states, their axis endpoints and endpoint
    error estimates, plus the step path of every state (indices into
    step_words) for high-precision recomputation.  step_sides records,
    per step index, whether that step multiplies on the left or on the
    right."""
    H: np.ndarray
    u: np.ndarray
    v: np.ndarray
    eu: np.ndarray
    ev: np.ndarray
    paths: list
    step_words: list
    step_sides: str


_BAND_DEBUG = False


def _conjugate_band(X, frame, interval, other_word, margin, cfg, gens=None,
                    pad=1.0, base_word=None):
    """Translates h.axis(g0) of the other curve's axis that stay within
    margin of the base segment (in base-frame coordinates).

    The search walks the translate set itself with three kinds of step: a
    left multiplication by a generator moves the whole axis by a fixed
    bounded isometry, a right multiplication moves it by the conjugated
    isometry, and a right multiplication by g0 slides along the same axis
    (a different representative of the coset h<g0>).  The band is a convex
    corridor, so nearby translates are joined by short chains whose
    intermediate axes stay near the band; keeping slid representatives as
    separate states matters because the right-step neighbours of h depend
    on h itself, not only on its coset.

    States are stored unconjugated — products of the raw generator
    matrices, whose norms only grow with actual hyperbolic displacement —
    and the frame map is applied once per axis-endpoint evaluation.
    Conjugating every generator by a long frame word would inflate all the
    step norms and destroy the roundoff bounds that make deduplication
    reliable.

    Returns a _Band with element rows, oriented translate axis endpoints
    in base-frame coordinates, error estimates for each endpoint, and the
    step path of every state so ambiguous rows can be recomputed in high
    precision."""
    lo, hi = interval[0] - pad, interval[1] + pad
    letters = list(gens) if gens is not None else list(
        range(1, X.num_generators + 1))
    gens_w = [_unit_det(g) for g in _gen_mats(X, gens)]
    data = X.class_data(other_word)
    g0 = _unit_det(data["mat"])
    g0i = _inv(g0)
    u0, v0 = _fixed_points(g0)
    fa, fb, fc, fd = _unit_det(frame)
    n_left = len(gens_w)
    letter_words = [w for k in letters for w in ((k,), (-k,))]
    step_mats = gens_w + gens_w + [g0, g0i]
    step_sides = "L" * n_left + "R" * n_left + "RR"
    step_words = (letter_words + letter_words
                  + [tuple(other_word), W.inverse(other_word)])
    if base_word is not None:
        # deck translations along the base geodesic: they shift a state's
        # axis by exactly one period within the corridor, so far reaches
        # of a long band connect to the richly-connected seed region in a
        # single step and the margin needed for connectivity stops
        # growing with the base length
        P = _unit_det(X.evaluate(tuple(base_word)))
        step_mats = step_mats + [P, _inv(P)]
        step_sides = step_sides + "LL"
        step_words = step_words + [tuple(base_word), W.inverse(base_word)]
    n_steps = len(step_mats)
    step_norms = [math.sqrt(sum(x * x for x in g)) for g in step_mats]

    def apply_step(H, g_idx):
        g = step_mats[g_idx]
        if step_sides[g_idx] == "L":
            return _vmul_const_left(H, g)
        return _vmul_const_right(H, g)

    # Dijkstra step costs proportional to log-norm: slides, deck
    # translations and any badly inflated generators cost more levels, so
    # the first arrival at each dedupe cell is the best-conditioned
    # product for that element
    log_norms = [max(math.log(n), 0.35) for n in step_norms]
    cost_unit = min(log_norms[:2 * n_left])
    step_costs = [max(1, int(round(l / cost_unit))) for l in log_norms]

    def to_base(p):
        """Frame image of raw boundary points, vectorized."""
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            inf = np.isinf(p)
            num = np.where(inf, fa, fa * p + fb)
            den = np.where(inf, fc, fc * p + fd)
            out = np.where(np.abs(den) > 1e-300 * np.abs(num), num / den,
                           np.inf)
        return out

    def raw_axes(H):
        return _vapply_bd(H, u0), _vapply_bd(H, v0)

    def axes(H):
        ur, vr = raw_axes(H)
        return to_base(ur), to_base(vr)

    # norm headroom: a raw state within the band moves the basepoint by at
    # most the distance out to the pulled-back segment plus its length,
    # the margin, and sliding slack; for unit-determinant matrices the
    # squared Frobenius norm is twice the cosh of that displacement
    fz = complex(fa * 1j + fb) / complex(fc * 1j + fd)
    d_axis = math.acosh(max(abs(fz) / fz.imag, 1.0))
    t_foot = math.log(abs(fz))
    d_seg = d_axis + max(0.0, lo - t_foot, t_foot - hi)
    dmax = (d_seg + (hi - lo) + margin + 0.75 * data["length"] + 8.0)
    norm_cap2 = 2.0 * math.cosh(min(dmax, 700.0)) + 1.0

    sat_lo = lo - 2.0 * margin - 6.0
    sat_hi = hi + 2.0 * margin + 6.0

    def dedupe_pts(H, u, v):
        # axis coordinates identify the coset h<g0>; the log-norm column
        # separates its slid representatives (spaced by about half the
        # other curve's length) so each stored element stays distinct
        ln = 0.5 * np.log(np.maximum(np.sum(H * H, axis=1), 1e-300))
        return np.hstack([_axis_coords(u, v, lo, hi, sat_lo, sat_hi),
                          ln[:, None]])

    # walk the seed greedily toward the segment so the band margin never
    # has to be inflated to the (possibly large) initial axis distance
    seed = np.array([_ID])
    seed_err = np.full(1, 1e-16)
    seed_paths = [()]
    ru, rv = axes(seed)
    d0 = math.acosh(float(_axis_segment_cosh(ru, rv, lo, hi)[0]))
    for _ in range(400):
        if d0 <= margin:
            break
        best = None
        for g_idx in range(2 * n_left):
            cand = apply_step(seed, g_idx)
            cu, cv = axes(cand)
            cd = float(_axis_segment_cosh(cu, cv, lo, hi)[0])
            if math.isfinite(cd):
                d = math.acosh(max(cd, 1.0))
                if best is None or d < best[0]:
                    best = (d, g_idx, cand)
        if best is None or best[0] >= d0 - 1e-9:
            break
        d0, g_idx, seed = best
        seed_err = np.minimum(
            seed_err * step_norms[g_idx]
            + 1e-16 * np.sqrt(np.sum(seed ** 2, axis=1)), 1e300)
        seed_paths = [seed_paths[0] + (g_idx,)]
    cosh_m = math.cosh(max(margin, d0 + 0.5))

    ru, rv = axes(seed)
    seen_pts = dedupe_pts(seed, ru, rv)
    kept = [seed]
    kept_err = [seed_err]
    kept_paths = list(seed_paths)
    hard_cap = (max(cfg.radius_cap,
                    int(3.0 * (hi - lo + 2.0 * margin) + data["length"]) + 24)
                * max(step_costs[:2 * n_left]))

    def expand(frontier, front_err, front_paths, level, pending):
        # left steps move the axis by a fixed isometry, right steps by its
        # conjugate through the state, slides keep it in place; together
        # they connect the band corridor at small margins where any one
        # family alone can strand whole pockets of translates
        for g_idx in range(n_steps):
            gn = step_norms[g_idx]
            cand = apply_step(frontier, g_idx)
            cu, cv = axes(cand)
            mask = _axis_segment_cosh(cu, cv, lo, hi) <= cosh_m
            if np.any(mask):
                # entry-error bound: inherited error grows by the step
                # norm, plus fresh roundoff at the product's own scale
                e_new = np.minimum(
                    front_err[mask] * gn
                    + 1e-16 * np.sqrt(np.sum(cand[mask] ** 2, axis=1)),
                    1e300)
                p_new = [front_paths[i] + (g_idx,)
                         for i in np.nonzero(mask)[0]]
                pending.setdefault(level + step_costs[g_idx], []).append(
                    (cand[mask], e_new, p_new))

    pending = {}
    expand(seed, seed_err, kept_paths, 0, pending)
    while pending:
        level = min(pending)
        if level > hard_cap:
            raise EnumerationNotConverged(
                f"band search still growing at radius {level}")
        batch_list = pending.pop(level)
        # every step has unit determinant, so products stay
        # unit-determinant to within roundoff drift; recomputing ad - bc
        # for large entries would be pure cancellation noise, so never
        # renormalize here
        cand = np.concatenate([b for b, _, _ in batch_list])
        cerr = np.concatenate([e for _, e, _ in batch_list])
        cpaths = [p for _, _, ps in batch_list for p in ps]

        def select(mask):
            nonlocal cand, cerr, cpaths
            cand, cerr = cand[mask], cerr[mask]
            cpaths = [cpaths[i] for i in np.nonzero(mask)[0]]

        with np.errstate(invalid="ignore"):
            n2 = np.sum(cand * cand, axis=1)
            # beyond the norm cap the element cannot matter; beyond the
            # error threshold its coordinates are noise, and the
            # best-conditioned copy of the same element already arrived
            # through a cheaper path, so the row is a duplicate that
            # would only refuse to merge
            norm_ok = ((n2 <= norm_cap2)
                       & (cerr <= 1e-8 * np.sqrt(np.maximum(n2, 1e-300))))
        select(norm_ok)
        if not len(cand):
            continue
        cu, cv = axes(cand)
        pts = dedupe_pts(cand, cu, cv)
        select(np.all(np.isfinite(pts), axis=1))
        if not len(cand):
            continue
        cu, cv = axes(cand)
        pts = dedupe_pts(cand, cu, cv)
        tree = cKDTree(seen_pts)
        # distinct elements sit at least ~0.1 apart in these coordinates,
        # while recomputed duplicates of large-norm states can drift by
        # considerably more than machine epsilon, so the merge radius is
        # generous in between
        hits = tree.query_ball_point(pts, r=1e-4, workers=-1)
        select(np.array([not h for h in hits]))
        if not len(cand):
            continue
        # drop duplicates inside the batch itself, keeping the
        # best-conditioned copy of each
        order = np.argsort(cerr)
        cand, cerr = cand[order], cerr[order]
        cpaths = [cpaths[i] for i in order]
        cu, cv = axes(cand)
        pts = dedupe_pts(cand, cu, cv)
        batch = cKDTree(pts)
        dup = np.zeros(len(pts), dtype=bool)
        for i, j in batch.query_pairs(1e-4):
            dup[max(i, j)] = True
        select(~dup)
        kept.append(cand)
        kept_err.append(cerr)
        kept_paths.extend(cpaths)
        if _BAND_DEBUG:
            print("level", level, "new", len(cand), "total",
                  sum(len(k) for k in kept), flush=True)
        cu, cv = axes(cand)
        seen_pts = np.concatenate([seen_pts, dedupe_pts(cand, cu, cv)])
        expand(cand, cerr, cpaths, level, pending)
    H = np.concatenate(kept)
    E = np.concatenate(kept_err)
    u_raw, v_raw = raw_axes(H)
    u, v = to_base(u_raw), to_base(v_raw)

    def endpoint_err(x, w):
        # roundoff of (ax+b)/(cx+d) under absolute entry error E: the
        # numerator and denominator each move by about E (|x| + 1), and the
        # denominator error is further amplified by |result|; the frame
        # map then scales the error by its derivative |F'(w)|
        c, d = H[:, 2], H[:, 3]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if math.isinf(x):
                den = np.abs(c)
                scale = 1.0
            else:
                den = np.abs(c * x + d)
                scale = abs(x) + 1.0
            err = E * scale * (1.0 + np.abs(w)) / den
            err = err / (fc * w + fd) ** 2
        return np.where(np.isfinite(err), np.abs(err), np.inf)

    eu = endpoint_err(u0, u_raw)
    ev = endpoint_err(v0, v_raw)
    return _Band(H, u, v, eu, ev, kept_paths, step_words, step_sides)


# ---------------------------------------------------------------------------
# crossing records


@dataclass
class _CrossingRecord:
    t: float       # position along the base segment
    tilt: float    # (u + v) / (u - v): signed cosine-like crossing angle
    u: float       # repelling endpoint of the translate axis
    v: float       # attracting endpoint
    eu: float = 0.0   # error estimate for u
    ev: float = 0.0   # error estimate for v


def _same_crossing(r1, r2, period):
    """Whether two crossing records describe the same translate axis.

    Records are produced by exact recomputation, with period reduction
    applied through the exact base matrix.  Two states representing one
    crossing can still differ by a surface-group relator, which the
    floating-point holonomy satisfies only to roundoff, so copies of the
    same crossing can disagree at the 1e-9 scale; genuinely distinct
    crossings of the moderate-length words handled here are separated by
    many orders of magnitude more than the 1e-6 used."""
    return abs(r1.t - r2.t) <= 1e-6 and abs(r1.tilt - r2.tilt) <= 1e-6


def _mp_letter_mats(X, dps):
    cache = getattr(X, "_mp_cache", None)
    if cache is None:
        cache = X._mp_cache = {}
    key = ("letters", dps)
    if key not in cache:
        import mpmath as mp
        mats = {}
        with mp.workdps(dps):
            for k in range(1, X.num_generators + 1):
                g = X.gen_mats[k - 1]
                mats[k] = tuple(mp.mpf(x) for x in g)
                mats[-k] = tuple(mp.mpf(x) for x in _inv(g))
        cache[key] = mats
    return cache[key]


class _MpRefiner:
    """Recomputes band states in high precision from their step paths.

    The double-precision holonomy matrices are taken as exact inputs: they
    define a nearby surface with the same (integer) crossing pattern, and
    products of exact inputs at 60 digits leave no room for the
    cancellation that can corrupt states of the double-precision walk.
    Prefix products are memoized, and search paths share prefixes by
    construction, so refining a batch of states costs about one matrix
    product per state."""

    def __init__(self, X, frame, other_word, step_words, step_sides,
                 base_word=None, dps=60):
        import mpmath as mp
        self.mp = mp
        self.dps = dps
        self.sides = step_sides
        with mp.workdps(dps):
            self.letters = _mp_letter_mats(X, dps)
            self.F = tuple(mp.mpf(x) for x in frame)
            self.step_mats = [self._word_mat(w) for w in step_words]
            one, zero = mp.mpf(1), mp.mpf(0)
            self.cache = {(): (one, zero, zero, one)}
            g0 = self._conj(self._word_mat(tuple(other_word)))
            self.uhat, self.vhat = self._fixed(g0)
            self.B = self.Bi = self.period = None
            if base_word is not None:
                P = self._word_mat(tuple(base_word))
                self.B = self._conj(P)
                a, b, c, d = self.B
                self.Bi = (d, -b, -c, a)
                det = P[0] * P[3] - P[1] * P[2]
                tr = abs(P[0] + P[3]) / (2 * mp.sqrt(det))
                self.period = 2 * mp.acosh(tr)

    @staticmethod
    def _mul(m, n):
        a, b, c, d = m
        e, f, g, h = n
        return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def _word_mat(self, w):
        mp = self.mp
        m = (mp.mpf(1), mp.mpf(0), mp.mpf(0), mp.mpf(1))
        for letter in w:
            m = self._mul(m, self.letters[letter])
        return m

    def _conj(self, m):
        F = self.F
        Fi = (F[3], -F[1], -F[2], F[0])
        return self._mul(self._mul(F, m), Fi)

    def _fixed(self, m):
        mp = self.mp
        a, b, c, d = m
        scale = max(abs(a), abs(b), abs(c), abs(d))
        if abs(c) <= mp.mpf("1e-30") * scale:
            other = b / (d - a) if a != d else mp.inf
            if abs(a) > abs(d):
                return other, mp.inf
            return mp.inf, other
        disc = (d - a) ** 2 + 4 * b * c
        sq = mp.sqrt(disc) if disc > 0 else mp.mpf(0)
        t1 = ((a - d) + sq) / (2 * c)
        t2 = ((a - d) - sq) / (2 * c)
        if abs(c * t1 + d) > 1:
            return t2, t1
        return t1, t2

    def _state(self, path):
        cache = self.cache
        m = cache.get(path)
        if m is not None:
            return m
        k = len(path) - 1
        while path[:k] not in cache:
            k -= 1
        m = cache[path[:k]]
        for j in range(k, len(path)):
            idx = path[j]
            s = self.step_mats[idx]
            m = self._mul(s, m) if self.sides[idx] == "L" else self._mul(m, s)
            cache[path[:j + 1]] = m
        return m

    def _apply_bd(self, m, x):
        mp = self.mp
        a, b, c, d = m
        if x == mp.inf:
            num, den = a, c
        else:
            num, den = a * x + b, c * x + d
        if den == 0:
            return mp.inf
        return num / den

    def crossing(self, path, inverse=False):
        """Accurate (t, tilt, u, v) floats if the state's translate axis
        genuinely crosses the base axis, else None.

        With a base word the crossing is reduced into the fundamental
        period by applying the exact base matrix, so every copy of the
        same crossing — however slid or period-shifted its state — lands
        on bit-identical values.  With inverse=True the inverse element's
        axis is used instead: for self-intersections this is the partner
        strand of the same geometric crossing."""
        mp = self.mp
        with mp.workdps(self.dps):
            M = self._conj(self._state(path))
            if inverse:
                a, b, c, d = M
                M = (d, -b, -c, a)
            u = self._apply_bd(M, self.uhat)
            v = self._apply_bd(M, self.vhat)
            if not (mp.isfinite(u) and mp.isfinite(v)):
                return None
            prod = u * v
            if not prod < 0:
                return None
            tilt = (u + v) / (u - v)
            if not abs(tilt) < 1 - mp.mpf("1e-12"):
                return None
            t = mp.mpf("0.5") * mp.log(-prod)
            if self.period is not None:
                guard = 0
                while t >= self.period and guard < 200:
                    u = self._apply_bd(self.Bi, u)
                    v = self._apply_bd(self.Bi, v)
                    if not u * v < 0:
                        return None
                    t = mp.mpf("0.5") * mp.log(-u * v)
                    guard += 1
                while t < 0 and guard < 200:
                    u = self._apply_bd(self.B, u)
                    v = self._apply_bd(self.B, v)
                    if not u * v < 0:
                        return None
                    t = mp.mpf("0.5") * mp.log(-u * v)
                    guard += 1
                tilt = (u + v) / (u - v)
            return float(t), float(tilt), float(u), float(v)


def _crossings_once(X, frame, interval, period, other_word, margin, cfg,
                    gens, base_word=None):
    band = _conjugate_band(X, frame, interval, other_word, margin, cfg,
                           gens, base_word=base_word
                           if period is not None else None)
    u, v, eu, ev = band.u, band.v, band.eu, band.ev
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        prod = u * v
        rel = eu / np.abs(u) + ev / np.abs(v)
        margin_u = np.abs(u) / np.maximum(eu, 1e-300)
        margin_v = np.abs(v) / np.maximum(ev, 1e-300)
    rel = np.where(np.isfinite(rel), rel, np.inf)
    # rule out only what double precision rules out with room to spare:
    # reliably computed axes whose endpoints lie on the same side of the
    # base axis cannot cross it; everything else is recomputed exactly
    certain_miss = (np.isfinite(prod) & (prod > 0.0) & (rel <= 1e-6)
                    & (np.minimum(margin_u, margin_v) >= 10.0))
    candidates = np.nonzero(~certain_miss)[0]
    if not len(candidates):
        return []

    # states in the same coset h<g0> share an axis and refine to the same
    # record, and a band stores many slid and period-shifted copies of
    # each crossing; clustering candidates by coset-invariant axis
    # coordinates and refining only the best-conditioned representative
    # of each cluster keeps the exact arithmetic proportional to the
    # number of distinct crossings
    lo_b, hi_b = interval[0] - 1.0, interval[1] + 1.0
    pts = _axis_coords(u[candidates], v[candidates], lo_b, hi_b,
                       lo_b - 2.0 * margin - 6.0, hi_b + 2.0 * margin + 6.0)
    quality = (eu + ev)[candidates]
    order = np.argsort(quality)
    candidates = candidates[order]
    pts = pts[order]
    good = np.all(np.isfinite(pts), axis=1)
    drop = np.zeros(len(candidates), dtype=bool)
    finite_idx = np.nonzero(good)[0]
    if len(finite_idx) > 1:
        tree = cKDTree(pts[finite_idx])
        for i, j in tree.query_pairs(1e-4):
            drop[finite_idx[max(i, j)]] = True
    candidates = candidates[~drop]

    refiner = _MpRefiner(X, frame, other_word, band.step_words,
                         band.step_sides,
                         base_word=base_word if period is not None else None)
    # for a curve against itself, each crossing is seen from two strands,
    # and the partner strand's translate is the inverse element's axis:
    # producing it directly makes the records close under the pairing even
    # when the walk only reached one of the two
    self_pair = (period is not None and base_word is not None
                 and W.canonical(base_word) == W.canonical(other_word))
    lo, hi = interval
    cands = []
    for i in candidates:
        res = refiner.crossing(band.paths[i])
        if res is None:
            continue
        results = [res]
        if self_pair:
            # the partner crosses exactly when the original does
            partner = refiner.crossing(band.paths[i], inverse=True)
            if partner is not None:
                results.append(partner)
        for t, ti, uu, vv in results:
            if period is None and not (lo + 1e-9 < t < hi - 1e-9):
                continue
            cands.append(_CrossingRecord(t, ti, uu, vv))
    records = []
    for r in cands:
        if not any(_same_crossing(r, r2, period) for r2 in records):
            records.append(r)
    records.sort(key=lambda r: r.t)
    return records


def _records_agree(r1, r2, period):
    if len(r1) != len(r2):
        return False
    for a, b in zip(r1, r2):
        dt = abs(a.t - b.t)
        if period is not None:
            dt = min(dt, abs(dt - period))
        if dt > 1e-5 or abs(a.tilt - b.tilt) > 1e-4:
            return False
    return True


def _stable_crossings(X, base_word, other_word, cfg, gens=None,
                      arc_frame=None, arc_interval=None):
    """Crossing records accepted once three consecutive margins agree."""
    if arc_frame is not None:
        frame, interval, period = arc_frame, arc_interval, None
    else:
        cd = X.class_data(base_word)
        frame, period = cd["frame"], cd["length"]
        interval = (0.0, period)
    streak = 0
    prev = None
    for k in range(11):
        margin = cfg.prune_margin + 1.0 * k
        recs = _crossings_once(X, frame, interval, period, other_word,
                               margin, cfg, gens,
                               base_word=None if arc_frame is not None
                               else base_word)
        if prev is not None and _records_agree(prev, recs, period):
            streak += 1
            if streak >= 2:
                return recs
        else:
            streak = 0
        prev = recs
    raise EnumerationNotConverged(
        "crossing counts kept changing as the pruning margin grew")


# ---------------------------------------------------------------------------
# intersection numbers


def _check_curve(X, word):
    c = W.canonical(word)
    if not c:
        raise TrivialCurve("empty word")
    if W.is_power(c):
        raise NonPrimitive(f"{X.word_string(c)} is a proper power")
    return c


def geometric_intersection(X, w1, w2, cfg=None, gens=None):
    """Geometric intersection number of two primitive closed curves.

    For equal classes this returns twice the self-intersection number
    (zero for a simple curve)."""
    cfg = _cfg(cfg)
    c1, c2 = _check_curve(X, w1), _check_curve(X, w2)
    key = (min(c1, c2), max(c1, c2), gens if gens is None else tuple(gens))
    cached = X._pair_cache.get(key)
    if cached is not None:
        return cached
    if c1 == c2:
        n = len(_stable_crossings(X, c1, c2, cfg, gens=gens))
    else:
        # count from both frames: the two searches walk unrelated state
        # graphs, so agreement rules out a count that merely stabilized
        # before the pruning margin reached every crossing
        n1 = len(_stable_crossings(X, c1, c2, cfg, gens=gens))
        n2 = len(_stable_crossings(X, c2, c1, cfg, gens=gens))
        if n1 != n2:
            raise EnumerationNotConverged(
                f"crossing counts from the two frames disagree "
                f"({n1} vs {n2})")
        n = n1
    X._pair_cache[key] = n
    return n


def self_intersection(X, w, cfg=None, gens=None):
    """Number of transverse self-crossings of a primitive closed geodesic."""
    cfg = _cfg(cfg)
    c = _check_curve(X, w)
    n = geometric_intersection(X, c, c, cfg, gens)
    if n % 2:
        raise EnumerationNotConverged(
            f"odd self-crossing lift count {n} for {X.word_string(c)}")
    return n // 2


def is_simple(X, w, cfg=None):
    return self_intersection(X, w, cfg) == 0


def same_class(X, w1, w2, cfg=None):
    """Whether two words define the same unoriented free homotopy class."""
    cfg = _cfg(cfg)
    c1, c2 = W.canonical(w1), W.canonical(w2)
    if not c1 or not c2:
        raise TrivialCurve("empty word")
    if c1 == c2:
        return True
    d1, d2 = X.class_data(c1), X.class_data(c2)
    ell = d1["length"]
    if abs(ell - d2["length"]) > 1e-6 * max(1.0, ell):
        return False
    frame = d1["frame"]
    for k in range(3):
        margin = cfg.prune_margin + 1.0 * k
        band = _conjugate_band(X, frame, (0.0, ell), c2, margin, cfg)
        u, v = band.u, band.v
        with np.errstate(invalid="ignore"):
            near0 = np.minimum(np.abs(u), np.abs(v)) < 1e-7
            nearinf = ~np.isfinite(u * v) | (
                np.maximum(np.abs(u), np.abs(v)) > 1e7)
        if np.any(near0 & nearinf):
            return True
    return False


# ---------------------------------------------------------------------------
# twisting numbers


def twisting_number(X, alpha, beta, cfg=None):
    """Total twisting of the simple curve alpha along beta.

    For each strand of beta between consecutive crossings with alpha, the
    two alpha-lifts through the strand endpoints are compared with the
    common perpendicular between them; the strand contributes the number of
    fundamental alpha-translations separating each strand endpoint from the
    corresponding perpendicular foot."""
    cfg = _cfg(cfg)
    ca, cb = _check_curve(X, alpha), _check_curve(X, beta)
    la = X.class_data(ca)["length"]
    L = X.class_data(cb)["length"]
    recs = _stable_crossings(X, cb, ca, cfg)
    k = len(recs)
    if k == 0:
        raise Disjoint(
            f"{X.word_string(ca)} and {X.word_string(cb)} are disjoint")
    total = 0
    for j in range(k):
        r1 = recs[j]
        if j + 1 < k:
            r2 = recs[j + 1]
        else:
            s = math.exp(L)
            r2 = _CrossingRecord(recs[0].t + L, recs[0].tilt,
                                 recs[0].u * s, recs[0].v * s)
        total += _strand_twist(r1, r2, la)
    return total


def _strand_twist(r1, r2, la):
    def count(rec, other):
        n = _line_normalizer_pair(rec.u, rec.v)
        x0 = _apply_bd(n, 0.0)
        xinf = _apply_bd(n, math.inf)
        tq = 0.5 * math.log(-x0 * xinf)
        ub = _apply_bd(n, other.u)
        vb = _apply_bd(n, other.v)
        if not (math.isfinite(ub) and math.isfinite(vb)) or ub * vb <= 0:
            raise Crossing("adjacent lifts cross; curve is not simple here")
        tp = 0.5 * math.log(ub * vb)
        d = abs(tq - tp)
        if d <= 1e-9:
            return 0
        return max(1, math.ceil(d / la - 1e-9))

    return count(r1, r2) + count(r2, r1)


# ---------------------------------------------------------------------------
# curve enumeration


@lru_cache(maxsize=None)
def _canonical_pool(alphabet_size, max_length):
    return tuple(W.canonical_words_up_to(alphabet_size, max_length))


def enumerate_classes(X, L_max=None, cfg=None, word_length=None):
    """(length, word) for canonical cyclic words with geodesic length <= L_max.

    Complete for all classes admitting a representative of at most the used
    word length; distinct words occasionally name the same class (the
    surface group is not free), which callers deduplicate where it
    matters."""
    cfg = _cfg(cfg)
    if L_max is None:
        L_max = cfg.L_max
    if word_length is None:
        word_length = min(6, cfg.word_cap, int(math.ceil(cfg.qi * L_max)))
    key = (round(L_max, 9), word_length)
    cached = X._enum_cache.get(key)
    if cached is not None:
        return cached
    out = []
    gmats = X.gen_mats
    ginvs = [_inv(g) for g in gmats]
    for w in _canonical_pool(X.num_generators, word_length):
        m = _ID
        for x in w:
            m = _mul(m, gmats[x - 1] if x > 0 else ginvs[-x - 1])
        t = abs(m[0] + m[3])
        if t <= 2.0 + 1e-9:
            continue  # trivial or non-geodesic word (e.g. a relator)
        ell = 2.0 * math.acosh(0.5 * t)
        if ell <= L_max + 1e-12:
            out.append((ell, w))
    out.sort(key=lambda p: (p[0], W._word_key(p[1])))
    out = tuple(out)
    X._enum_cache[key] = out
    return out


def _is_duplicate(X, ell, w, chosen, cfg):
    for e2, w2 in chosen:
        if abs(ell - e2) <= 1e-8 * max(1.0, ell) and same_class(X, w, w2, cfg):
            return True
    return False


def simple_classes(X, L_max=None, cfg=None):
    """Distinct simple primitive classes with length <= L_max, sorted."""
    cfg = _cfg(cfg)
    if L_max is None:
        L_max = cfg.L_max
    key = round(L_max, 9)
    cached = X._simple_cache.get(key)
    if cached is not None:
        return cached
    out = []
    for ell, w in enumerate_classes(X, L_max, cfg):
        if W.is_power(w):
            continue
        if _is_duplicate(X, ell, w, out, cfg):
            continue
        if self_intersection(X, w, cfg) == 0:
            out.append((ell, w))
    out = tuple(out)
    X._simple_cache[key] = out
    return out


# ---------------------------------------------------------------------------
# markings


@dataclass(frozen=True)
class Marking:
    """A pants decomposition plus one transversal per pants curve."""

    pants_curves: tuple   # 3g-3 canonical words
    transversals: tuple   # same order; i(t_i, p_i) in {1, 2}, 0 with others
    lengths: tuple        # lengths of pants curves then transversals

    @property
    def curves(self):
        return self.pants_curves + self.transversals


def bers_pants(X, cfg=None):
    """Greedy shortest pants decomposition: repeatedly the shortest simple
    class disjoint from everything chosen so far."""
    cfg = _cfg(cfg)
    cached = X._marking_cache.get("pants")
    if cached is not None:
        return cached
    need = 3 * X.genus - 3
    L = cfg.L_max
    for _ in range(4):
        chosen = []
        for ell, w in enumerate_classes(X, L, cfg):
            if W.is_power(w):
                continue
            if any(geometric_intersection(X, w, c, cfg) != 0
                   for _, c in chosen):
                continue
            if _is_duplicate(X, ell, w, chosen, cfg):
                continue
            if self_intersection(X, w, cfg) != 0:
                continue
            chosen.append((ell, w))
            if len(chosen) == need:
                result = tuple(w for _, w in chosen)
                X._marking_cache["pants"] = result
                return result
        L *= 1.5
    raise SearchExhausted(
        f"could not find {need} disjoint simple curves up to length {L}")


def shortest_marking(X, cfg=None):
    """Greedy marking: Bers pants curves plus, for each, the shortest simple
    transversal meeting it once or twice and missing the other pants curves.
    Length ties break by twisting number, then canonical word order."""
    cfg = _cfg(cfg)
    cached = X._marking_cache.get("marking")
    if cached is not None:
        return cached
    pants = bers_pants(X, cfg)
    transversals = []
    for i, gamma in enumerate(pants):
        found = None
        ties = []
        L = cfg.L_max
        for _ in range(5):
            for ell, w in enumerate_classes(X, L, cfg):
                if found is not None and ell > found[0] + 1e-6:
                    break
                if W.is_power(w):
                    continue
                k = geometric_intersection(X, w, gamma, cfg)
                if k not in (1, 2):
                    continue
                if any(geometric_intersection(X, w, p, cfg) != 0
                       for j, p in enumerate(pants) if j != i):
                    continue
                if self_intersection(X, w, cfg) != 0:
                    continue
                if found is None or ell < found[0] - 1e-6:
                    found = (ell, w)
                    ties = [(ell, w)]
                elif abs(ell - found[0]) <= 1e-6 and not _is_duplicate(
                        X, ell, w, ties, cfg):
                    ties.append((ell, w))
            if found is not None:
                break
            L *= 1.6
        if found is None:
            raise SearchExhausted(
                f"no transversal for pants curve {X.word_string(gamma)}")
        if len(ties) > 1:
            ties.sort(key=lambda p: (twisting_number(X, p[1], gamma, cfg),
                                     W._word_key(p[1])))
        transversals.append(ties[0])
    lengths = tuple(X.curve_length(p) for p in pants) + tuple(
        e for e, _ in transversals)
    marking = Marking(pants, tuple(w for _, w in transversals), lengths)
    X._marking_cache["marking"] = marking
    return marking


# ---------------------------------------------------------------------------
# thick components


@dataclass(frozen=True)
class ThickComponent:
    vertices: frozenset     # pants of the underlying graph
    boundary_edges: tuple   # cut (short) edges on its boundary
    interior_edges: tuple   # uncut edges inside


def thick_components(X, threshold, cfg=None):
    """Components of the surface cut along all simple classes shorter than
    threshold.  The short classes must be pairwise disjoint and must be
    cuffs of the underlying pants structure (the supported desk-scale
    case)."""
    cfg = _cfg(cfg)
    short = [(ell, w) for ell, w in simple_classes(X, threshold, cfg)
             if ell < threshold]
    for i in range(len(short)):
        for j in range(i + 1, len(short)):
            if geometric_intersection(X, short[i][1], short[j][1], cfg) != 0:
                raise BersCurvesCross(
                    f"short curves {X.word_string(short[i][1])} and "
                    f"{X.word_string(short[j][1])} intersect")
    cut = set()
    for ell, w in short:
        match = None
        for e, cuff in enumerate(X.cuff_words):
            if same_class(X, w, cuff, cfg):
                match = e
                break
        if match is None:
            raise InvalidGraph(
                f"short curve {X.word_string(w)} is not a cuff; cutting "
                "along it is not supported")
        cut.add(match)
    parent = list(range(X.graph.num_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e, ((v1, _), (v2, _)) in enumerate(X.graph.edges):
        if e not in cut:
            parent[find(v1)] = find(v2)
    groups = {}
    for v in range(X.graph.num_vertices):
        groups.setdefault(find(v), set()).add(v)
    comps = []
    for verts in groups.values():
        boundary, interior = set(), set()
        for e, ((v1, _), (v2, _)) in enumerate(X.graph.edges):
            if v1 in verts or v2 in verts:
                (boundary if e in cut else interior).add(e)
        comps.append(ThickComponent(frozenset(verts),
                                    tuple(sorted(boundary)),
                                    tuple(sorted(interior))))
    comps.sort(key=lambda c: min(c.vertices))
    return tuple(comps)


def component_contains(X, comp, w, cfg=None):
    """Whether a class is supported strictly inside the thick component."""
    cfg = _cfg(cfg)
    c = W.canonical(w)
    for e in comp.boundary_edges:
        if geometric_intersection(X, c, X.cuff_words[e], cfg) != 0:
            return False
        if same_class(X, c, X.cuff_words[e], cfg):
            return False
    for e in comp.interior_edges:
        if same_class(X, c, X.cuff_words[e], cfg):
            return True
    for e in comp.interior_edges:
        if geometric_intersection(X, c, X.cuff_words[e], cfg) != 0:
            return True
    return False


def component_systole(X, comp, L_max=None, cfg=None):
    """(length, word) of the shortest enumerated class inside the component."""
    cfg = _cfg(cfg)
    if L_max is None:
        L_max = cfg.L_max
    for ell, w in enumerate_classes(X, L_max, cfg):
        if W.is_power(w):
            continue
        if component_contains(X, comp, w, cfg):
            return ell, w
    raise EmptyEnumeration(
        f"no class of length <= {L_max} inside component "
        f"{sorted(comp.vertices)}")


# ---------------------------------------------------------------------------
# orthogonal arc systems


@dataclass(frozen=True)
class OrthogonalArc:
    """A geodesic arc meeting the closed geodesic alpha orthogonally at both
    endpoints, stored through one lift: the common perpendicular between the
    base lift of axis(alpha) and a disjoint translate."""

    alpha: tuple        # base curve (canonical word)
    length: float       # arc length
    frame: tuple        # ambient -> coordinates where the arc is (0, infinity)
    interval: tuple     # foot parameters of the arc segment in that frame
    foot_t: float       # foot position along alpha, in [0, ell(alpha))
    sides: tuple        # (+-1, +-1): departure side at each endpoint
    translate_axis: tuple  # (u, v) endpoints of the translate, alpha frame

    @property
    def same_side(self):
        return self.sides[0] == self.sides[1]


@dataclass(frozen=True)
class ArcSystem:
    """One either-side arc, or a pair of arcs leaving alpha on both sides."""

    alpha: tuple
    arcs: tuple

    @property
    def total_collar(self):
        return sum(collar_width_arc(a.length) for a in self.arcs)

    @property
    def admissible_epsilon(self):
        return min(epsilon_max(a.length) for a in self.arcs)


def _nearby_axis_translates(X, ca, margin_axis, cfg):
    """Disjoint translates of axis(alpha) with perpendicular distance at
    most margin_axis from the base lift, feet reduced modulo the
    translation.  Returns records (d, t_foot, u, v) sorted by distance,
    plus the raw axis arrays for interference checks."""
    cd = X.class_data(ca)
    frame, L = cd["frame"], cd["length"]
    band = _conjugate_band(X, frame, (0.0, L), ca, margin_axis, cfg)
    u, v, eu, ev = band.u, band.v, band.eu, band.ev
    with np.errstate(invalid="ignore", over="ignore"):
        prod = u * v
    disjoint = np.isfinite(prod) & (prod > 0.0)
    cands = []
    for i in np.nonzero(disjoint)[0]:
        uu, vv = float(u[i]), float(v[i])
        t_foot = 0.5 * math.log(uu * vv) if uu * vv > 0 else None
        if t_foot is None:
            continue
        shift = math.floor(t_foot / L)
        if t_foot - shift * L > L - 1e-9:
            shift += 1
        s = math.exp(-shift * L)
        uu, vv, t_foot = uu * s, vv * s, t_foot - shift * L
        p, q = sorted((abs(uu), abs(vv)))
        if q - p <= 0:
            continue
        arg = (q + p) / (q - p)
        if arg <= 1.0:
            continue
        d = math.acosh(arg)
        if d > margin_axis:
            continue
        cands.append((float(eu[i]) * s + float(ev[i]) * s, d, t_foot,
                      uu, vv))
    # keep the best-conditioned copy of each translate
    cands.sort()
    records = []
    for err, d, t_foot, uu, vv in cands:
        dup = False
        for _, t2, u2, v2 in records:
            if abs(t2 - t_foot) <= 1e-4 and (
                    abs(u2 - uu) <= 1e-8 * (abs(uu) + abs(u2) + 1.0) + 2 * err
                    or abs(v2 - vv) <= 1e-8 * (abs(vv) + abs(v2) + 1.0)
                    + 2 * err):
                dup = True
                break
        if not dup:
            records.append((d, t_foot, uu, vv))
    records.sort()
    return records, (u, v)


def _arc_candidate(X, ca, rec):
    """Build the OrthogonalArc for a nearby translate record."""
    cd = X.class_data(ca)
    frame = cd["frame"]
    d, t_foot, u, v = rec
    # the common perpendicular is the half circle |z| = e^{t_foot}
    r = math.exp(t_foot)
    perp = _line_normalizer_pair(-r, r)
    x0 = _apply_bd(perp, 0.0)
    xinf = _apply_bd(perp, math.inf)
    tc = 0.5 * math.log(-x0 * xinf)  # foot on the base axis
    ut = _apply_bd(perp, u)
    vt = _apply_bd(perp, v)
    tf = 0.5 * math.log(-ut * vt)    # foot on the translate
    side1 = 1 if u > 0 else -1
    n2 = _line_normalizer_pair(u, v)
    y0 = _apply_bd(n2, 0.0)
    yinf = _apply_bd(n2, math.inf)
    vals = [y for y in (y0, yinf) if math.isfinite(y)]
    side2 = 1 if all(y > 0 for y in vals) else -1
    lo, hi = sorted((tc, tf))
    return OrthogonalArc(
        alpha=ca,
        length=d,
        frame=_mul(perp, frame),
        interval=(lo, hi),
        foot_t=t_foot,
        sides=(side1, side2),
        translate_axis=(u, v),
    )


def _arc_clear(X, ca, arc, axes):
    """The open arc segment misses every collected translate axis (so the
    arc interior is disjoint from alpha on the surface)."""
    u_all, v_all = axes
    r = math.exp(arc.foot_t)
    perp = _line_normalizer_pair(-r, r)
    lo, hi = arc.interval
    L = X.class_data(ca)["length"]
    for shift in (-1, 0, 1):
        s = math.exp(shift * L)
        for i in range(len(u_all)):
            uu, vv = float(u_all[i]) * s, float(v_all[i]) * s
            if not (math.isfinite(uu) and math.isfinite(vv)):
                continue
            pu = _apply_bd(perp, uu)
            pv = _apply_bd(perp, vv)
            if not (math.isfinite(pu) and math.isfinite(pv)):
                continue
            if pu * pv >= 0:
                continue
            t = 0.5 * math.log(-pu * pv)
            if lo + 1e-8 < t < hi - 1e-8:
                return False
    return True


def _element_ball(X, ca, radius, cfg):
    """Group elements h (in the alpha frame) whose image of the point at
    height e^{L/2} on the axis stays within radius of the base segment."""
    cd = X.class_data(ca)
    frame, L = cd["frame"], cd["length"]
    gens_w = [_conj(frame, g) for g in _gen_mats(X, None)]
    pts = np.array([1j * math.exp(t) for t in
                    np.linspace(0.0, L, max(2, int(L) + 2))]
                   + [_apply_pt(frame, 1j)])
    thr = math.cosh(radius) - 1.0

    def keep(Hrows):
        A, B, C, D = (Hrows[:, j] for j in range(4))
        Z = (A[:, None] * pts + B[:, None]) / (C[:, None] * pts + D[:, None])
        Xr, Yr = Z.real, Z.imag
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.clip(np.log(np.abs(Z)), 0.0, L)
            et = np.exp(t)
            val = (Xr ** 2 + (Yr - et) ** 2) / (2.0 * np.abs(Yr) * et)
        return np.any(np.isfinite(val) & (val <= thr), axis=1)

    ident = np.array([_ID])
    keys = set(_vkeys(ident))
    kept = [ident]
    frontier = ident
    level = 0
    while len(frontier):
        level += 1
        if level > max(cfg.radius_cap, int(6 * radius) + 12):
            raise EnumerationNotConverged(
                f"element ball still growing at radius {level}")
        cand = np.concatenate([_vmul_const_right(frontier, g)
                               for g in gens_w])
        det = cand[:, 0] * cand[:, 3] - cand[:, 1] * cand[:, 2]
        cand = cand / np.sqrt(det)[:, None]
        mask = keep(cand)
        cand = cand[mask]
        if not len(cand):
            break
        new_rows = []
        for row, key in zip(cand, _vkeys(cand)):
            if key not in keys:
                keys.add(key)
                new_rows.append(row)
        if not new_rows:
            break
        frontier = np.array(new_rows)
        kept.append(frontier)
    return np.concatenate(kept)


def _arcs_disjoint(X, ca, arc1, arc2, H):
    """No translate of arc2's segment crosses arc1's segment."""
    p1 = _line_normalizer_pair(-math.exp(arc1.foot_t), math.exp(arc1.foot_t))
    lo1, hi1 = arc1.interval
    p2i = _inv(_line_normalizer_pair(-math.exp(arc2.foot_t),
                                     math.exp(arc2.foot_t)))
    z1 = _apply_pt(p2i, 1j * math.exp(arc2.interval[0]))
    z2 = _apply_pt(p2i, 1j * math.exp(arc2.interval[1]))
    for h in [tuple(row) for row in H]:
        w1 = _apply_pt(h, z1)
        w2 = _apply_pt(h, z2)
        ends = _geodesic_through(w1, w2)
        if ends is None:
            continue
        a1 = _apply_bd(p1, ends[0])
        a2 = _apply_bd(p1, ends[1])
        if not (math.isfinite(a1) and math.isfinite(a2)) or a1 * a2 >= 0:
            continue
        t = 0.5 * math.log(-a1 * a2)
        if not (lo1 + 1e-8 < t < hi1 - 1e-8):
            continue
        # the crossing must also fall inside the image segment
        n = _line_normalizer_pair(ends[0], ends[1])
        s1 = math.log(abs(_apply_pt(n, w1)))
        s2 = math.log(abs(_apply_pt(n, w2)))
        x0 = _apply_bd(n, _apply_bd(_inv(p1), 0.0))
        xinf = _apply_bd(n, _apply_bd(_inv(p1), math.inf))
        if not (math.isfinite(x0) and math.isfinite(xinf)) or x0 * xinf >= 0:
            continue
        s = 0.5 * math.log(-x0 * xinf)
        if min(s1, s2) + 1e-8 < s < max(s1, s2) - 1e-8:
            return False
    return True


def _geodesic_through(w1, w2):
    """Boundary endpoints of the geodesic through two points (None if the
    points coincide)."""
    x1, y1 = w1.real, w1.imag
    x2, y2 = w2.real, w2.imag
    if abs(w1 - w2) < 1e-12 * max(1.0, abs(w1)):
        return None
    if abs(x1 - x2) < 1e-12 * max(1.0, abs(x1), abs(x2)):
        return (x1, math.inf)
    # center of the half-circle on the real line
    c = 0.5 * (x1 + x2) + 0.5 * (y1 * y1 - y2 * y2) / (x1 - x2)
    r = math.hypot(x1 - c, y1)
    return (c - r, c + r)


def orthogonal_arc_system(X, alpha, cfg=None):
    """Shortest system of arcs meeting alpha orthogonally at both endpoints:
    either one arc leaving alpha to both sides, or one arc per side."""
    cfg = _cfg(cfg)
    ca = _check_curve(X, alpha)
    margin = 3.0
    for _ in range(6):
        records, axes = _nearby_axis_translates(X, ca, margin, cfg)
        candidates = []
        for rec in records:
            arc = _arc_candidate(X, ca, rec)
            if _arc_clear(X, ca, arc, axes):
                candidates.append(arc)
        if candidates:
            first = candidates[0]
            if not first.same_side:
                return ArcSystem(alpha=ca, arcs=(first,))
            want = -first.sides[0]
            ball = None
            for other in candidates[1:]:
                if not other.same_side or other.sides[0] != want:
                    continue
                if ball is None:
                    radius = max(first.length, other.length) + 1.5
                    ball = _element_ball(X, ca, radius, cfg)
                if _arcs_disjoint(X, ca, first, other, ball) and \
                        _arcs_disjoint(X, ca, other, first, ball):
                    return ArcSystem(alpha=ca, arcs=(first, other))
        margin *= 1.5
        if margin > 25.0:
            break
    raise SearchExhausted(
        f"no orthogonal arc system found for {X.word_string(ca)}")


def arc_intersection(X, arc, gamma, cfg=None):
    """Number of essential crossings of the curve gamma with the open arc."""
    cfg = _cfg(cfg)
    cg = _check_curve(X, gamma)
    recs = _stable_crossings(X, None, cg, cfg, arc_frame=arc.frame,
                             arc_interval=arc.interval)
    return len(recs)
