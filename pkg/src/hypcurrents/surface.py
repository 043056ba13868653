"""Closed hyperbolic surfaces from pants decompositions.

A surface is specified by a trivalent pants graph plus Fenchel-Nielsen
coordinates (length and twist per edge).  build_holonomy produces an explicit
discrete faithful representation of the surface group into PSL(2, R):

  * each pair of pants is realized as a two-generator group in standard
    position (first cuff on the imaginary axis),
  * pants are glued along a spanning tree of the graph, with each remaining
    edge contributing a stable letter,
  * the gluing across a cuff composes the two slot normalizers with a twist
    translation and a side flip, so cuff identifications and twists are exact
    by construction.

The resulting MarkedSurface knows its generators as matrices, the cuff word
of every edge, and the leftover relator words, and evaluates arbitrary words
in the generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import words as W
from .config import tolerances
from .errors import (DegenerateCoordinates, InvalidGraph, NotHyperbolic,
                     TrivialCurve)
from .halfplane import Isometry

# ---------------------------------------------------------------------------
# fast 2x2 matrix helpers (tuples (a, b, c, d), det 1, sign not normalized)

_ID = (1.0, 0.0, 0.0, 1.0)


def _mul(m, n):
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _inv(m):
    a, b, c, d = m
    return (d, -b, -c, a)


def _conj(h, m):
    return _mul(_mul(h, m), _inv(h))


def _diag(ell):
    e = math.exp(0.5 * ell)
    return (e, 0.0, 0.0, 1.0 / e)


_FLIP = (0.0, -1.0, 1.0, 0.0)


def _renorm(m):
    a, b, c, d = m
    det = a * d - b * c
    if det <= 0:
        raise ValueError(f"matrix determinant {det} <= 0")
    s = 1.0 / math.sqrt(det)
    return (a * s, b * s, c * s, d * s)


def _apply_bd(m, x):
    """Moebius action on the boundary; math.inf allowed."""
    a, b, c, d = m
    if math.isinf(x):
        return math.inf if c == 0.0 else a / c
    den = c * x + d
    if den == 0.0:
        return math.inf
    return (a * x + b) / den


def _apply_pt(m, z):
    a, b, c, d = m
    return (a * z + b) / (c * z + d)


def _trace(m):
    return m[0] + m[3]


def _translation_length(m):
    t = abs(_trace(m))
    if t <= 2.0 + tolerances().near_parabolic:
        raise NotHyperbolic(f"|trace| = {t} is not > 2")
    return 2.0 * math.acosh(0.5 * t)


def _fixed_points(m):
    """(repelling, attracting) boundary fixed points of a hyperbolic matrix."""
    a, b, c, d = m
    scale = max(abs(a), abs(b), abs(c), abs(d))
    if abs(c) <= 1e-14 * scale:
        other = b / (d - a) if a != d else math.inf
        if abs(a) > abs(d):
            return other, math.inf
        return math.inf, other
    disc = (d - a) ** 2 + 4.0 * b * c
    sq = math.sqrt(max(disc, 0.0))
    t1 = ((a - d) + sq) / (2.0 * c)
    t2 = ((a - d) - sq) / (2.0 * c)
    if abs(c * t1 + d) > 1.0:
        return t2, t1
    return t1, t2


def _line_normalizer_pair(u, v):
    """Orientation-preserving matrix sending u -> 0 and v -> infinity."""
    if math.isinf(v):
        return (1.0, -u, 0.0, 1.0)
    if math.isinf(u):
        return (0.0, -1.0, 1.0, -v)
    if u > v:
        return (1.0, -u, 1.0, -v)
    return (1.0, -u, -1.0, v)


# ---------------------------------------------------------------------------
# pants graphs and Fenchel-Nielsen coordinates


@dataclass(frozen=True)
class PantsGraph:
    """Trivalent graph: vertices are pants, edges glue boundary slots.

    edges is a tuple of ((v1, slot1), (v2, slot2)); every (vertex, slot) pair
    with slot in {0, 1, 2} must appear exactly once.
    """

    num_vertices: int
    edges: tuple

    def __post_init__(self):
        if self.num_vertices < 1:
            raise InvalidGraph("need at least one pants")
        seen = set()
        for e in self.edges:
            (v1, s1), (v2, s2) = e
            for v, s in ((v1, s1), (v2, s2)):
                if not (0 <= v < self.num_vertices and s in (0, 1, 2)):
                    raise InvalidGraph(f"bad slot ({v}, {s})")
                if (v, s) in seen:
                    raise InvalidGraph(f"slot ({v}, {s}) used twice")
                seen.add((v, s))
        if len(seen) != 3 * self.num_vertices:
            raise InvalidGraph("every slot of every pants must be glued")
        # connectivity
        adj = {v: set() for v in range(self.num_vertices)}
        for (v1, _), (v2, _) in self.edges:
            adj[v1].add(v2)
            adj[v2].add(v1)
        reached = {0}
        stack = [0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in reached:
                    reached.add(w)
                    stack.append(w)
        if len(reached) != self.num_vertices:
            raise InvalidGraph("pants graph is not connected")

    @property
    def num_edges(self):
        return len(self.edges)

    @property
    def genus(self):
        return self.num_edges - self.num_vertices + 1

    def slot_edge(self, v, s):
        for i, ((v1, s1), (v2, s2)) in enumerate(self.edges):
            if (v1, s1) == (v, s) or (v2, s2) == (v, s):
                return i
        raise InvalidGraph(f"slot ({v}, {s}) not glued")


def theta_graph():
    """Genus-2 graph: two pants glued along all three cuffs."""
    return PantsGraph(2, (((0, 0), (1, 0)), ((0, 1), (1, 1)), ((0, 2), (1, 2))))


@dataclass(frozen=True)
class FNCoordinates:
    """Cuff lengths and twists, indexed like the graph's edges."""

    lengths: tuple
    twists: tuple

    def __post_init__(self):
        if len(self.lengths) != len(self.twists):
            raise DegenerateCoordinates("lengths and twists must have equal size")
        for ell in self.lengths:
            if not (ell > 0 and math.isfinite(ell)):
                raise DegenerateCoordinates(f"cuff length {ell} must be positive")

    @classmethod
    def regular(cls, graph, ell=None, twist=0.0):
        if ell is None:
            ell = 2.0 * math.asinh(1.0)
        n = graph.num_edges
        return cls((float(ell),) * n, (float(twist),) * n)


# ---------------------------------------------------------------------------
# one pair of pants in standard position


def _pants_matrices(l0, l1, l2):
    """Generators (X0, X1) of a hyperbolic pants with cuff lengths l0, l1, l2.

    X0 = diag(e^{l0/2}, e^{-l0/2}); X1 is conjugate to the inverse diagonal
    by the translation along the common perpendicular of the two axes, whose
    length h satisfies
      cosh h = (cosh(l2/2) + cosh(l0/2) cosh(l1/2)) / (sinh(l0/2) sinh(l1/2)),
    which makes tr(X0 X1) = -2 cosh(l2/2) so the third boundary has length l2.
    """
    ch = ((math.cosh(0.5 * l2) + math.cosh(0.5 * l0) * math.cosh(0.5 * l1))
          / (math.sinh(0.5 * l0) * math.sinh(0.5 * l1)))
    h = math.acosh(ch)
    q = 0.5 * h
    m = (math.cosh(q), math.sinh(q), math.sinh(q), math.cosh(q))
    x0 = _diag(l0)
    x1 = _conj(m, _inv(_diag(l1)))
    return x0, x1


def _slot_words():
    """Local boundary words of a pants over its two generators (letters 1, 2)."""
    return ((1,), (2,), (-2, -1))


def _slot_frames(x0, x1, tol):
    """Per-slot (word, normalizer): the boundary word oriented so that, after
    normalizing its axis to the upward imaginary axis, the pants sits on the
    Re > 0 side.  Exactly one orientation per slot does this."""
    mats = {1: x0, 2: x1, -1: _inv(x0), -2: _inv(x1)}

    def evaluate(word):
        m = _ID
        for x in word:
            m = _mul(m, mats[x])
        return m

    base_words = _slot_words()
    axes = [_fixed_points(evaluate(w)) for w in base_words]
    frames = []
    for s, w in enumerate(base_words):
        chosen = None
        for cand in (w, W.inverse(w)):
            rep, att = _fixed_points(evaluate(cand))
            n = _line_normalizer_pair(rep, att)
            signs = []
            for s2 in range(3):
                if s2 == s:
                    continue
                for pt in axes[s2]:
                    val = _apply_bd(n, pt)
                    if math.isinf(val):
                        continue
                    signs.append(1.0 if val > 0 else -1.0)
            if signs and all(x == signs[0] for x in signs):
                if signs[0] > 0:
                    if chosen is not None:
                        raise DegenerateCoordinates(
                            "both slot orientations claim the positive side")
                    chosen = (cand, n)
        if chosen is None:
            raise DegenerateCoordinates(
                f"could not orient boundary slot {s} of pants")
        frames.append(chosen)
    return frames


# ---------------------------------------------------------------------------
# word elimination bookkeeping for the glued-up presentation


class _Presentation:
    """Words over provisional symbols, with substitutions for eliminated ones.

    Symbols are hashable tags; signed letters are (tag, +1/-1) pairs encoded
    by index once the final alphabet is fixed.
    """

    def __init__(self, symbols):
        self.symbols = list(symbols)
        self.subst = {}  # tag -> word (tuple of (tag, sign)) over other tags

    @staticmethod
    def inv(word):
        return tuple((t, -s) for t, s in reversed(word))

    @staticmethod
    def reduce(word):
        out = []
        for let in word:
            if out and out[-1][0] == let[0] and out[-1][1] == -let[1]:
                out.pop()
            else:
                out.append(let)
        return tuple(out)

    def resolve(self, word):
        changed = True
        while changed:
            changed = False
            out = []
            for t, s in word:
                if t in self.subst:
                    rep = self.subst[t] if s > 0 else self.inv(self.subst[t])
                    out.extend(rep)
                    changed = True
                else:
                    out.append((t, s))
            word = self.reduce(tuple(out))
        return word

    def eliminate(self, word, target):
        """Given relation word == target, eliminate one symbol of word.

        word has one or two letters over distinct surviving symbols; target is
        an arbitrary word.  Returns True on success."""
        word = self.resolve(word)
        target = self.resolve(target)
        target_syms = {t for t, _ in target}
        # prefer eliminating the last letter
        for idx in range(len(word) - 1, -1, -1):
            t, s = word[idx]
            if t in target_syms:
                continue
            if any(t2 == t for k, (t2, _) in enumerate(word) if k != idx):
                continue
            # word = pre + (t, s) + post; solve for t
            pre = word[:idx]
            post = word[idx + 1:]
            # (t, s) = pre^-1 target post^-1
            expr = self.reduce(self.inv(pre) + target + self.inv(post))
            if s < 0:
                expr = self.inv(expr)
            self.subst[t] = expr
            return True
        return False


# ---------------------------------------------------------------------------
# the marked surface


class MarkedSurface:
    """A closed hyperbolic surface with explicit holonomy.

    Attributes:
      graph, coords:   the combinatorial data
      gen_names:       one lowercase letter per generator
      generators:      matching Isometry objects
      cuff_words:      canonical word of each graph edge's cuff curve
      relators:        leftover defining relations (evaluate to +-identity)
    """

    def __init__(self, graph, coords, gen_mats, gen_names, cuff_words,
                 relators, pants_frames):
        self.graph = graph
        self.coords = coords
        self.gen_mats = tuple(_renorm(m) for m in gen_mats)
        self.gen_names = gen_names
        self.cuff_words = tuple(cuff_words)
        self.relators = tuple(relators)
        self._pants_frames = pants_frames  # debugging / demos
        self._mat_cache = {}
        self._class_cache = {}
        self._pair_cache = {}
        self._enum_cache = {}
        self._simple_cache = {}
        self._marking_cache = {}

    @property
    def genus(self):
        return self.graph.genus

    @property
    def num_generators(self):
        return len(self.gen_mats)

    def evaluate(self, word):
        """Matrix (4-tuple) of a word in the generators."""
        word = tuple(word)
        cached = self._mat_cache.get(word)
        if cached is not None:
            return cached
        m = _ID
        for x in word:
            if not 1 <= abs(x) <= len(self.gen_mats):
                raise ValueError(f"letter {x} outside alphabet")
            g = self.gen_mats[abs(x) - 1]
            m = _mul(m, g if x > 0 else _inv(g))
        m = _renorm(m)
        if len(word) <= 12:
            self._mat_cache[word] = m
        return m

    def isometry(self, word):
        return Isometry(*self.evaluate(word))

    def curve_length(self, word):
        word = W.canonical(word)
        if not word:
            raise TrivialCurve("empty word has no geodesic representative")
        return self.class_data(word)["length"]

    def class_data(self, word):
        """Canonical word, matrix, length, oriented axis and axis frame."""
        word = W.canonical(word)
        if not word:
            raise TrivialCurve("empty word has no geodesic representative")
        cached = self._class_cache.get(word)
        if cached is not None:
            return cached
        m = self.evaluate(word)
        length = _translation_length(m)
        rep, att = _fixed_points(m)
        frame = _line_normalizer_pair(rep, att)
        data = {
            "word": word,
            "mat": m,
            "length": length,
            "rep": rep,
            "att": att,
            "frame": frame,
        }
        self._class_cache[word] = data
        return data

    def word_string(self, word):
        return W.to_string(word, self.gen_names)

    def word_from_string(self, s):
        return W.from_string(s, self.gen_names)

    def __repr__(self):
        ells = ", ".join(f"{x:.4g}" for x in self.coords.lengths)
        taus = ", ".join(f"{x:.4g}" for x in self.coords.twists)
        return (f"MarkedSurface(genus {self.genus}, lengths [{ells}], "
                f"twists [{taus}])")


def build_holonomy(graph, coords, validate=True):
    """Build the marked surface for the given pants graph and FN coordinates."""
    if len(coords.lengths) != graph.num_edges:
        raise DegenerateCoordinates(
            f"{graph.num_edges} edges but {len(coords.lengths)} lengths")
    tol = tolerances()

    # local pants data
    slot_len = {}
    for i, ((v1, s1), (v2, s2)) in enumerate(graph.edges):
        slot_len[(v1, s1)] = coords.lengths[i]
        slot_len[(v2, s2)] = coords.lengths[i]
    local = {}
    for v in range(graph.num_vertices):
        l0, l1, l2 = (slot_len[(v, s)] for s in range(3))
        x0, x1 = _pants_matrices(l0, l1, l2)
        frames = _slot_frames(x0, x1, tol)
        local[v] = {"mats": (x0, x1), "frames": frames}

    def local_eval(v, word):
        x0, x1 = local[v]["mats"]
        mats = {1: x0, 2: x1, -1: _inv(x0), -2: _inv(x1)}
        m = _ID
        for x in word:
            m = _mul(m, mats[x])
        return m

    # spanning tree (breadth-first over edge list order)
    tree_edges = []
    non_tree_edges = []
    placed = {0}
    order = [0]
    remaining = list(range(graph.num_edges))
    progress = True
    while progress:
        progress = False
        for i in list(remaining):
            (v1, s1), (v2, s2) = graph.edges[i]
            if v1 in placed and v2 in placed:
                continue
            if v1 in placed or v2 in placed:
                if v2 in placed:  # orient parent -> child
                    v1, s1, v2, s2 = v2, s2, v1, s1
                tree_edges.append((i, v1, s1, v2, s2))
                placed.add(v2)
                order.append(v2)
                remaining.remove(i)
                progress = True
    non_tree_edges = [i for i in remaining]
    if len(placed) != graph.num_vertices:
        raise InvalidGraph("pants graph is not connected")

    # position each pants in the plane
    pos = {0: _ID}
    for i, u, su, v, sv in tree_edges:
        t = coords.twists[i]
        nu = local[u]["frames"][su][1]
        nv = local[v]["frames"][sv][1]
        h = _mul(_mul(pos[u], _inv(nu)), _mul(_diag(t), _mul(_FLIP, nv)))
        pos[v] = h

    # provisional symbols and their ambient matrices
    sym_mat = {}
    for v in range(graph.num_vertices):
        x0, x1 = local[v]["mats"]
        p = pos[v]
        sym_mat[("x", v)] = _conj(p, x0)
        sym_mat[("y", v)] = _conj(p, x1)
    for i in non_tree_edges:
        (u, su), (v, sv) = graph.edges[i]
        t = coords.twists[i]
        nu = local[u]["frames"][su][1]
        nv = local[v]["frames"][sv][1]
        s_mat = _mul(_mul(pos[u], _inv(nu)),
                     _mul(_diag(t), _mul(_mul(_FLIP, nv), _inv(pos[v]))))
        sym_mat[("s", i)] = s_mat

    pres = _Presentation(sym_mat)

    def slot_word_sym(v, s):
        """Ambient provisional word of the oriented slot word of (v, s)."""
        w = local[v]["frames"][s][0]
        tags = {1: ("x", v), 2: ("y", v)}
        return tuple((tags[abs(x)], 1 if x > 0 else -1) for x in w)

    relator_words = []
    for i, u, su, v, sv in tree_edges:
        lhs = slot_word_sym(v, sv)
        rhs = pres.inv(slot_word_sym(u, su))
        if not pres.eliminate(lhs, rhs):
            relator_words.append(pres.reduce(lhs + pres.inv(rhs)))
    for i in non_tree_edges:
        (u, su), (v, sv) = graph.edges[i]
        s_let = ((("s", i), 1),)
        wv = pres.resolve(slot_word_sym(v, sv))
        wu = pres.resolve(slot_word_sym(u, su))
        # s wv s^-1 wu = 1
        if not pres.eliminate(wv, pres.reduce(
                pres.inv(s_let) + pres.inv(wu) + s_let)):
            relator_words.append(pres.reduce(
                s_let + wv + pres.inv(s_let) + wu))

    # final alphabet: surviving symbols, pants generators first
    surviving = []
    for v in range(graph.num_vertices):
        for tag in (("x", v), ("y", v)):
            if tag not in pres.subst:
                surviving.append(tag)
    for i in non_tree_edges:
        if ("s", i) not in pres.subst:
            surviving.append(("s", i))
    if len(surviving) > len(W.DEFAULT_NAMES):
        raise InvalidGraph("too many generators for the letter alphabet")
    index = {tag: k + 1 for k, tag in enumerate(surviving)}
    gen_names = W.DEFAULT_NAMES[:len(surviving)]
    gen_mats = [sym_mat[tag] for tag in surviving]

    def to_letters(sym_word):
        sym_word = pres.resolve(sym_word)
        return W.free_reduce(tuple(
            index[t] * s for t, s in sym_word))

    cuff_words = []
    for i in range(graph.num_edges):
        (u, su), _ = graph.edges[i]
        cuff_words.append(W.canonical(to_letters(slot_word_sym(u, su))))
    relators = [to_letters(r) for r in relator_words]

    surface = MarkedSurface(graph, coords, gen_mats, gen_names, cuff_words,
                            relators, {v: local[v]["frames"] for v in local})
    if validate:
        _validate_surface(surface)
    return surface


def _validate_surface(surface):
    tol = tolerances().holonomy
    for i, word in enumerate(surface.cuff_words):
        ell = surface.curve_length(word)
        want = surface.coords.lengths[i]
        if abs(ell - want) > tol * max(1.0, want):
            raise DegenerateCoordinates(
                f"cuff {i} has length {ell}, expected {want}")
    ident = Isometry.identity()
    for r in surface.relators:
        if not surface.isometry(r).close_to(ident, max(tol, 1e-7)):
            raise DegenerateCoordinates(
                f"relator {surface.word_string(r)} does not evaluate to identity")
    if surface.num_generators != 2 * surface.genus and not surface.relators:
        raise DegenerateCoordinates("generator elimination went wrong")
