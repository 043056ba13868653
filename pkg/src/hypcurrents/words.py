"""Words in a free generating set.

A word is a tuple of nonzero ints: +k is generator number k (1-based), -k its
inverse.  Free homotopy classes are represented by cyclically reduced words in
a canonical form: the lexicographically least rotation among the word and its
inverse, under the letter order g1 < g1^-1 < g2 < g2^-1 < ...
"""

from __future__ import annotations

from itertools import product

DEFAULT_NAMES = "abcdefgh"


def inverse(word):
    return tuple(-x for x in reversed(word))


def free_reduce(word):
    out = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduce(word):
    w = list(free_reduce(word))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def _letter_key(x):
    return 2 * abs(x) + (0 if x > 0 else 1)


def _word_key(word):
    return tuple(_letter_key(x) for x in word)


def canonical(word):
    """Canonical cyclically reduced representative of the free homotopy class."""
    w = cyclic_reduce(word)
    if not w:
        return ()
    best = None
    for cand in (w, inverse(w)):
        n = len(cand)
        for i in range(n):
            rot = cand[i:] + cand[:i]
            if best is None or _word_key(rot) < _word_key(best):
                best = rot
    return best


def is_power(word):
    """True if the cyclic word is a proper power u^k, k >= 2."""
    w = cyclic_reduce(word)
    n = len(w)
    for p in range(1, n // 2 + 1):
        if n % p == 0 and w == w[p:] + w[:p]:
            return True
    return False


def concat(*ws):
    out = []
    for w in ws:
        out.extend(w)
    return free_reduce(tuple(out))


def power(word, n):
    if n == 0:
        return ()
    if n < 0:
        return power(inverse(word), -n)
    return free_reduce(word * n)


def to_string(word, names=DEFAULT_NAMES):
    return "".join(
        names[abs(x) - 1] if x > 0 else names[abs(x) - 1].upper() for x in word
    ) or "1"


def from_string(s, names=DEFAULT_NAMES):
    if s == "1":
        return ()
    out = []
    for ch in s:
        lo = ch.lower()
        if lo not in names:
            raise ValueError(f"unknown generator letter {ch!r}")
        k = names.index(lo) + 1
        out.append(k if ch == lo else -k)
    return free_reduce(tuple(out))


def reduced_words(alphabet_size, length):
    """All freely reduced words of exactly the given length."""
    letters = [k for g in range(1, alphabet_size + 1) for k in (g, -g)]
    if length == 0:
        yield ()
        return
    for w in product(letters, repeat=length):
        ok = True
        for i in range(length - 1):
            if w[i] == -w[i + 1]:
                ok = False
                break
        if ok:
            yield w


def canonical_words_up_to(alphabet_size, max_length):
    """All distinct canonical cyclic words of length 1..max_length.

    Generated by depth-first search with rotation-minimality pruning: the
    first letter is kept minimal, so most non-canonical words are cut early.
    """
    letters = sorted(
        (k for g in range(1, alphabet_size + 1) for k in (g, -g)), key=_letter_key
    )
    seen = set()
    out = []

    def rec(w):
        if w and w[0] != -w[-1]:
            c = canonical(w)
            if c == w and c not in seen:
                seen.add(c)
                out.append(c)
        if len(w) == max_length:
            return
        for x in letters:
            if w:
                if x == -w[-1]:
                    continue
                # canonical words never start above their smallest letter
                if _letter_key(x) < _letter_key(w[0]):
                    continue
            rec(w + (x,))

    rec(())
    out.sort(key=lambda w: (len(w), _word_key(w)))
    return out


def christoffel(p, q, letter_a=1, letter_b=2):
    """Primitive slope word with p copies of letter_a and q of letter_b.

    (p, q) must be coprime and not both zero; negative q uses the inverse of
    letter_b, negative p the inverse of letter_a.
    """
    from math import gcd

    if gcd(abs(p), abs(q)) not in (0, 1) or (p == 0 and q == 0):
        raise ValueError(f"slope ({p}, {q}) is not primitive")
    la = letter_a if p >= 0 else -letter_a
    lb = letter_b if q >= 0 else -letter_b
    p, q = abs(p), abs(q)
    if q == 0:
        return canonical((la,))
    if p == 0:
        return canonical((lb,))
    n = p + q
    w = []
    prev = 0
    for i in range(1, n + 1):
        cur = (i * q) // n
        w.append(lb if cur > prev else la)
        prev = cur
    return canonical(tuple(w))


def slopes_up_to(n):
    """All distinct slopes (p, q) with |p|, |q| <= n, normalized modulo sign."""
    from math import gcd

    out = []
    for p in range(0, n + 1):
        for q in range(-n, n + 1):
            if p == 0 and q <= 0:
                continue
            if p > 0 and gcd(p, abs(q)) != 1:
                continue
            if p == 0 and q != 1:
                continue
            out.append((p, q))
    return out
