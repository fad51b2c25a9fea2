"""Extended pieces (Omega A)^(x)p_cyc: cyclic tensor words of forms.

A word ``(w1, ..., wp)`` of Omega A basis keys stands for the cyclic word
w1 t w2 t ... wp t in the free product with a closed even parameter t.
Rotating the last slot to the front costs the Koszul sign
(-1)^(|wp| (|w1| + ... + |w(p-1)|)).  Pieces are dicts keyed by canonical
words: the minimal rotation under (form degree, key) slot order.  A word
equal to its own rotation with sign -1 is zero.

``extended_d`` differentiates slot by slot; ``extended_i_delta`` sends a
factor da inside a slot to t a - a t, cutting the slot in two.
"""

import random

from .forms import Forms
from .linalg import vec_add


def _deg(key):
    return len(key) - 1


def _slot_order(key):
    return (_deg(key), key)


def canonical(word):
    """(canonical word, sign) or (None, 0) when the word vanishes."""
    p = len(word)
    degs = [_deg(k) for k in word]
    total = sum(degs)
    best = None
    for r in range(p):
        # move the last r slots to the front
        tail = sum(degs[p - r:])
        s = -1 if (tail * (total - tail)) % 2 else 1
        rot = word[p - r:] + word[:p - r]
        order = tuple(_slot_order(k) for k in rot)
        if best is None or order < best[0]:
            best = (order, rot, s)
        elif order == best[0] and s != best[2]:
            return None, 0
    return best[1], best[2]


def normalize(piece):
    out = {}
    for word, c in piece.items():
        cw, s = canonical(word)
        if s:
            vec_add(out, {cw: s * c})
    return out


def piece_bidegree(word):
    return len(word), sum(_deg(k) for k in word)


class Extended:
    """d and i_Delta on cyclic words over a FinDimAlgebra."""

    def __init__(self, A, F=None):
        self.A = A
        self.F = F or Forms(A)

    def d(self, piece):
        out = {}
        for word, c in piece.items():
            before = 0
            for i, key in enumerate(word):
                if key[0]:
                    s = -1 if before % 2 else 1
                    vec_add(out, {word[:i] + ((0,) + key,) + word[i + 1:]: s * c})
                before += _deg(key)
        return normalize(out)

    def i_delta(self, piece, raw=False):
        """i_Delta; with ``raw`` the words are left unrotated."""
        F = self.F
        out = {}
        for word, c in piece.items():
            before = 0
            for i, key in enumerate(word):
                n = _deg(key)
                for j in range(1, n + 1):
                    s = (-1 if (before + j - 1) % 2 else 1) * c
                    alpha = key[:j]
                    a = key[j]
                    beta = (0,) + key[j + 1:]
                    left, right = word[:i], word[i + 1:]
                    # alpha t (a beta)
                    vec_add(out, {left + (alpha, (a,) + key[j + 1:]) + right: s})
                    # - (alpha a) t beta
                    for k2, c2 in F.rmul({alpha: 1}, a).items():
                        vec_add(out, {left + (k2, beta) + right: -s * c2})
                before += n
        return out if raw else normalize(out)

    def D(self, piece):
        out = self.d(piece)
        vec_add(out, self.i_delta(piece))
        return out

    def swap_close(self, raw):
        """Two-slot words (X, Y) -> -(-1)^(|X||Y|) Y X: the reduced contraction
        read off from the cut slots.  The overall minus matches the
        normalization iota_Delta(u dv) = [u, v]."""
        F = self.F
        out = {}
        for word, c in raw.items():
            if len(word) != 2:
                raise ValueError("swap_close expects two-slot words")
            X, Y = word
            s = 1 if (_deg(X) * _deg(Y)) % 2 else -1
            vec_add(out, F.mul({Y: 1}, {X: 1}), s * c)
        return out


def random_piece(A, p, q, rng, terms=3):
    """Random combination of words with p slots and total form degree q."""
    out = {}
    if A.N == 1 and q > 0:
        return out
    for _ in range(terms):
        cuts = sorted(rng.randint(0, q) for _ in range(p - 1))
        degs = [b - a for a, b in zip([0] + cuts, cuts + [q])]
        word = tuple((rng.randrange(A.N),) + tuple(rng.randrange(1, A.N) for _ in range(n))
                     for n in degs)
        vec_add(out, {word: rng.randint(-3, 3) or 1})
    return normalize(out)


def verify_extended(A, trials=20, seed=0, p_max=2, q_max=3, closing_degree=2):
    """(d + i_Delta)^2 = 0 on random pieces, and re-closing p = 1 pieces.

    Re-closing: cutting a one-slot word w t with i_Delta and multiplying the
    two slots back in swapped order must give iota_Delta(w) exactly in Omega.
    """
    rng = random.Random(seed)
    E = Extended(A)
    fails = []
    count = 0
    for p in range(1, p_max + 1):
        for q in range(0, q_max + 1):
            for _ in range(trials):
                x = random_piece(A, p, q, rng)
                if not x:
                    continue
                count += 1
                for name, val in (("d^2", E.d(E.d(x))), ("i^2", E.i_delta(E.i_delta(x))),
                                  ("di+id", _sum(E.d(E.i_delta(x)), E.i_delta(E.d(x))))):
                    if val:
                        fails.append({"identity": name, "p": p, "q": q})
    closing = []
    F = E.F
    for n in range(1, closing_degree + 1):
        for key in _sample_keys(A, n, rng, trials):
            lhs = E.swap_close(E.i_delta({(key,): 1}, raw=True))
            closing.append(lhs == {k: v for k, v in F.iota_delta({key: 1}).items() if v})
    return {"algebra": A.name, "pieces": count, "failures": fails[:10],
            "closing_checked": len(closing), "closing_ok": all(closing),
            "ok": not fails and all(closing)}


def _sum(u, v):
    out = dict(u)
    vec_add(out, v)
    return out


def _sample_keys(A, n, rng, k):
    return [(rng.randrange(A.N),) + tuple(rng.randrange(1, A.N) for _ in range(n))
            for _ in range(k)] if A.N > 1 else []


def extended_d(A, piece):
    return Extended(A).d(piece)


def extended_i_delta(A, piece):
    return Extended(A).i_delta(piece)
