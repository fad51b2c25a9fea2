"""Bigraded cochain calculus for free-product deformations.

A cochain in C^p(A, A^{(x)k}) is stored sparsely: each entry is a pair of
integer codes (input tuple, output tuple) written in base N = dim A, most
significant digit first, together with an integer numerator.  A common
denominator sits on the cochain.  All operations are vectorized joins on
those codes, so sparse (weight-homogeneous) cochains over large truncated
algebras and dense random cochains over tiny algebras go through the same
code.  ``to_dense`` gives the array view.
"""

from fractions import Fraction
from math import gcd

import numpy as np

from .algebra import (AlgebraPresentation, GeneratorSet, NCPoly, build_findim,
                      complete_rewrite, parse_ncpoly, reduce)
from .linalg import QMat, Reducer, as_fraction, rank, solve, vec_add

_LIM = 2 ** 62


# ---------------------------------------------------------------------------
# integer-array helpers


def _as_obj(a):
    return a if a.dtype == object else a.astype(object)


def _mul(a, b):
    """Elementwise product, promoting to Python ints when int64 could overflow."""
    if a.dtype == object or b.dtype == object:
        return _as_obj(a) * _as_obj(b)
    if len(a) and int(np.abs(a).max()) * int(np.abs(b).max()) >= _LIM:
        return _as_obj(a) * _as_obj(b)
    return a * b


def _maxabs(a):
    if not len(a):
        return 0
    if a.dtype == object:
        return max(abs(int(x)) for x in a)
    return int(np.abs(a).max())


def _join(left, right):
    """All index pairs (i, j) with left[i] == right[j]."""
    order = np.argsort(right, kind="stable")
    rs = right[order]
    lo = np.searchsorted(rs, left, side="left")
    hi = np.searchsorted(rs, left, side="right")
    cnt = hi - lo
    li = np.repeat(np.arange(len(left), dtype=np.int64), cnt)
    if not len(li):
        return li, li
    start = np.repeat(lo, cnt)
    offs = np.arange(len(li), dtype=np.int64) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    return li, order[start + offs]


def _expand_products(A, u, v):
    """Rows r and (k, c) with e_{u[r]} e_{v[r]} = sum c e_k (numerators over scale)."""
    ptr, K, C, scale = A.tables()
    cell = u * A.N + v
    lo = ptr[cell]
    cnt = ptr[cell + 1] - lo
    rows = np.repeat(np.arange(len(u), dtype=np.int64), cnt)
    offs = np.arange(len(rows), dtype=np.int64) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    pos = np.repeat(lo, cnt) + offs
    return rows, K[pos], C[pos], scale


def _inverse_table(A):
    """For each x, the triples (u, v, c) with e_u e_v = ... + c e_x."""
    cached = getattr(A, "_inverse_table", None)
    if cached is not None:
        return cached
    ptr, K, C, scale = A.tables()
    N = A.N
    cells = np.repeat(np.arange(N * N, dtype=np.int64), np.diff(ptr))
    A._inverse_table = (K.copy(), cells // N, cells % N, C.copy())
    return A._inverse_table


def _digits(codes, length, N):
    out = np.empty((len(codes), length), dtype=np.int64)
    c = codes.copy()
    for i in range(length - 1, -1, -1):
        out[:, i] = c % N
        c //= N
    return out


def _encode(tuples, N):
    code = 0
    for t in tuples:
        code = code * N + int(t)
    return code


def _decode(code, length, N):
    out = []
    for _ in range(length):
        out.append(code % N)
        code //= N
    return tuple(reversed(out))


def _weights(A):
    if A.weights is None:
        return np.zeros(A.N, dtype=np.int64)
    return np.array(A.weights, dtype=np.int64)


# ---------------------------------------------------------------------------
# cochains


class Cochain:
    """Multilinear map A^{(x)p} -> A^{(x)k}, stored as coded sparse entries."""

    __slots__ = ("A", "p", "k", "ins", "outs", "coef", "den")

    def __init__(self, A, p, k, ins, outs, coef, den=1, canonical=False):
        if p < 1 or k < 1:
            raise ValueError("cochains need p >= 1 and k >= 1")
        if A.N ** max(p, k) >= 2 ** 63:
            raise ValueError("cochain codes would overflow int64")
        self.A, self.p, self.k = A, int(p), int(k)
        self.ins = np.asarray(ins, dtype=np.int64)
        self.outs = np.asarray(outs, dtype=np.int64)
        coef = np.asarray(coef)
        if coef.dtype != object:
            coef = coef.astype(np.int64)
        self.coef = coef
        self.den = int(den)
        if not canonical:
            self._canonicalize()

    # basic data ---------------------------------------------------------
    @property
    def N(self):
        return self.A.N

    @property
    def bidegree(self):
        return (self.p, 2 * self.k - 2)

    @property
    def nnz(self):
        return len(self.coef)

    def _canonicalize(self):
        n = len(self.coef)
        if n:
            brk = np.ones(n, dtype=bool)
            if self.N ** (self.p + self.k) < 2 ** 63:
                key = self.ins * self.N ** self.k + self.outs
                order = np.argsort(key)
                key = key[order]
                brk[1:] = key[1:] != key[:-1]
            else:
                order = np.lexsort((self.outs, self.ins))
            ins, outs, coef = self.ins[order], self.outs[order], self.coef[order]
            if self.N ** (self.p + self.k) >= 2 ** 63:
                brk[1:] = (ins[1:] != ins[:-1]) | (outs[1:] != outs[:-1])
            starts = np.flatnonzero(brk)
            if len(starts) < n:
                if coef.dtype != object and _maxabs(coef) * n >= _LIM:
                    coef = coef.astype(object)
                coef = np.add.reduceat(coef, starts)
                ins, outs = ins[starts], outs[starts]
            keep = coef != 0
            if coef.dtype == object:
                keep = np.array([bool(x) for x in coef], dtype=bool)
            ins, outs, coef = ins[keep], outs[keep], coef[keep]
            self.ins, self.outs, self.coef = ins, outs, coef
        self._simplify()

    def _simplify(self):
        if not len(self.coef):
            self.den = 1
            if self.coef.dtype == object:
                self.coef = self.coef.astype(np.int64)
            return
        if self.coef.dtype == object:
            g = self.den
            for x in self.coef:
                g = gcd(g, int(x))
                if g == 1:
                    break
            if g > 1:
                self.coef = np.array([int(x) // g for x in self.coef], dtype=object)
                self.den //= g
            if _maxabs(self.coef) < _LIM:
                self.coef = self.coef.astype(np.int64)
        else:
            g = int(np.gcd.reduce(np.abs(self.coef)))
            g = gcd(g, self.den)
            if g > 1:
                self.coef = self.coef // g
                self.den //= g

    # construction ---------------------------------------------------------
    @classmethod
    def zero(cls, A, p, k):
        e = np.zeros(0, dtype=np.int64)
        return cls(A, p, k, e, e, e, canonical=True)

    @classmethod
    def from_dict(cls, A, p, k, data):
        """``data``: {(inputs tuple, outputs tuple): coefficient}."""
        den = 1
        for c in data.values():
            den = den * as_fraction(c).denominator // gcd(den, as_fraction(c).denominator)
        ins, outs, coef = [], [], []
        for (a, b), c in data.items():
            if len(a) != p or len(b) != k:
                raise ValueError("entry arity does not match the cochain")
            ins.append(_encode(a, A.N))
            outs.append(_encode(b, A.N))
            coef.append(int(as_fraction(c) * den))
        big = any(abs(c) >= _LIM for c in coef)
        return cls(A, p, k, np.array(ins, dtype=np.int64), np.array(outs, dtype=np.int64),
                   np.array(coef, dtype=object if big else np.int64), den)

    @classmethod
    def from_function(cls, A, p, k, fn):
        """Tabulate fn(inputs tuple) -> {outputs tuple: coefficient}."""
        data = {}
        for code in range(A.N ** p):
            a = _decode(code, p, A.N)
            for b, c in fn(a).items():
                if c:
                    data[(a, tuple(b))] = c
        return cls.from_dict(A, p, k, data)

    def to_dict(self):
        N = self.N
        return {(_decode(int(i), self.p, N), _decode(int(o), self.k, N)): Fraction(int(c), self.den)
                for i, o, c in zip(self.ins, self.outs, self.coef)}

    def to_dense(self):
        """Object array of Fractions, shape (N,)*p + (N,)*k."""
        N = self.N
        arr = np.empty((N,) * (self.p + self.k), dtype=object)
        arr.fill(Fraction(0))
        for (a, b), c in self.to_dict().items():
            arr[a + b] = c
        return arr

    def evaluate(self, args):
        code = _encode(args, self.N)
        sel = np.flatnonzero(self.ins == code)
        return {_decode(int(self.outs[i]), self.k, self.N): Fraction(int(self.coef[i]), self.den)
                for i in sel}

    # linear structure -----------------------------------------------------
    def _check_same(self, other):
        if other.A is not self.A or (self.p, self.k) != (other.p, other.k):
            raise ValueError("cochains of different shapes")

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def _combine(self, other, sign):
        self._check_same(other)
        den = self.den * other.den // gcd(self.den, other.den)
        a = _mul(self.coef, np.full(len(self.coef), den // self.den, dtype=np.int64))
        b = _mul(other.coef, np.full(len(other.coef), sign * (den // other.den), dtype=np.int64))
        if a.dtype == object or b.dtype == object:
            a, b = _as_obj(a), _as_obj(b)
        return Cochain(self.A, self.p, self.k, np.concatenate([self.ins, other.ins]),
                       np.concatenate([self.outs, other.outs]), np.concatenate([a, b]), den)

    def __neg__(self):
        return Cochain(self.A, self.p, self.k, self.ins, self.outs, -self.coef, self.den,
                       canonical=True)

    def scale(self, c):
        c = as_fraction(c)
        coef = _mul(self.coef, np.full(len(self.coef), c.numerator, dtype=np.int64))
        return Cochain(self.A, self.p, self.k, self.ins, self.outs, coef,
                       self.den * c.denominator)

    def is_zero(self):
        return len(self.coef) == 0

    def equals(self, other):
        return (self - other).is_zero()

    # weights ----------------------------------------------------------------
    def input_weight(self):
        W = _weights(self.A)
        return W[_digits(self.ins, self.p, self.N)].sum(axis=1)

    def output_weight(self):
        W = _weights(self.A)
        return W[_digits(self.outs, self.k, self.N)].sum(axis=1)

    def restrict(self, max_input_weight):
        """Drop entries whose inputs have total weight above the bound."""
        keep = self.input_weight() <= max_input_weight
        return Cochain(self.A, self.p, self.k, self.ins[keep], self.outs[keep],
                       self.coef[keep], self.den)

    def __repr__(self):
        return f"Cochain(p={self.p}, k={self.k}, nnz={self.nnz})"


def _build(A, p, k, parts, den):
    """Assemble a cochain from (ins, outs, coef) parts sharing ``den``."""
    parts = [t for t in parts if len(t[2])]
    if not parts:
        return Cochain.zero(A, p, k)
    obj = any(t[2].dtype == object for t in parts)
    coef = np.concatenate([_as_obj(t[2]) if obj else t[2] for t in parts])
    return Cochain(A, p, k, np.concatenate([t[0] for t in parts]),
                   np.concatenate([t[1] for t in parts]), coef, den)


def multiplication(A):
    """The product of A as an element of C^2(A, A)."""
    ptr, K, C, scale = A.tables()
    N = A.N
    cells = np.repeat(np.arange(N * N, dtype=np.int64), np.diff(ptr))
    return Cochain(A, 2, 1, cells, K, C, scale)


def identity_cochain(A):
    n = np.arange(A.N, dtype=np.int64)
    return Cochain(A, 1, 1, n, n, np.ones(A.N, dtype=np.int64))


def random_cochain(A, p, k, rng, density=1.0, bound=2):
    """Random integer cochain on all basis entries (small algebras)."""
    N = A.N
    total = N ** (p + k)
    if total > 2_000_000:
        raise ValueError("dense random cochain too large; use random_homogeneous")
    codes = np.arange(total, dtype=np.int64)
    if density < 1:
        codes = codes[rng.random(total) < density]
    coef = rng.integers(-bound, bound + 1, size=len(codes))
    Nk = N ** k
    return Cochain(A, p, k, codes // Nk, codes % Nk, coef)


def _tuples_by_weight(A, length, max_weight, skip_unit=False):
    """{weight: list of codes} for basis tuples of the given length."""
    W = _weights(A)
    first = [i for i in range(A.N) if not (skip_unit and i == 0)]
    cur = {}
    for i in first:
        if W[i] <= max_weight:
            cur.setdefault(int(W[i]), []).append(i)
    for _ in range(length - 1):
        nxt = {}
        for w, codes in cur.items():
            for i in first:
                w2 = w + int(W[i])
                if w2 <= max_weight:
                    nxt.setdefault(w2, []).extend(c * A.N + i for c in codes)
        cur = nxt
    return {w: np.array(sorted(c), dtype=np.int64) for w, c in cur.items()}


def homogeneous_entries(A, p, k, shift, max_weight, skip_unit_inputs=False):
    """All (in, out) code pairs with weight(in) = weight(out) + shift <= max_weight."""
    ins_w = _tuples_by_weight(A, p, max_weight, skip_unit_inputs)
    outs_w = _tuples_by_weight(A, k, max_weight)
    I, O = [], []
    for s, ins in ins_w.items():
        outs = outs_w.get(s - shift)
        if outs is None:
            continue
        I.append(np.repeat(ins, len(outs)))
        O.append(np.tile(outs, len(ins)))
    if not I:
        e = np.zeros(0, dtype=np.int64)
        return e, e
    return np.concatenate(I), np.concatenate(O)


def random_homogeneous(A, p, k, shift, max_weight, rng, density=0.3, bound=2,
                       skip_unit_inputs=False):
    ins, outs = homogeneous_entries(A, p, k, shift, max_weight, skip_unit_inputs)
    keep = rng.random(len(ins)) < density
    coef = rng.integers(-bound, bound + 1, size=int(keep.sum()))
    return Cochain(A, p, k, ins[keep], outs[keep], coef)


# ---------------------------------------------------------------------------
# operations


def cup(f, g):
    """Concatenate inputs; merge f's last output slot with g's first in A."""
    A, N = f.A, f.N
    q, m = g.p, g.k
    fi = np.repeat(np.arange(f.nnz, dtype=np.int64), g.nnz)
    gi = np.tile(np.arange(g.nnz, dtype=np.int64), f.nnz)
    u = f.outs[fi] % N
    Nm1 = N ** (m - 1)
    v = g.outs[gi] // Nm1
    rows, K, C, scale = _expand_products(A, u, v)
    fi, gi = fi[rows], gi[rows]
    ins = f.ins[fi] * N ** q + g.ins[gi]
    outs = ((f.outs[fi] // N) * N + K) * Nm1 + g.outs[gi] % Nm1
    coef = _mul(_mul(f.coef[fi], g.coef[gi]), C)
    return Cochain(A, f.p + q, f.k + m - 1, ins, outs, coef, f.den * g.den * scale)


def vdash(f, g):
    """f |- g: g on inputs p..p+q-1, then f on (a_1..a_{p-1}, first slot of g)."""
    N = f.N
    q, m = g.p, g.k
    Nm1 = N ** (m - 1)
    gi, fi = _join(g.outs // Nm1, f.ins % N)
    ins = (f.ins[fi] // N) * N ** q + g.ins[gi]
    outs = f.outs[fi] * Nm1 + g.outs[gi] % Nm1
    coef = _mul(f.coef[fi], g.coef[gi])
    return Cochain(f.A, f.p + q - 1, f.k + m - 1, ins, outs, coef, f.den * g.den)


def dashv(f, g):
    """f -| g: f on the first p inputs, then g on (last slot of f, remaining inputs)."""
    N = f.N
    q, m = g.p, g.k
    Nq1 = N ** (q - 1)
    fi, gi = _join(f.outs % N, g.ins // Nq1)
    ins = f.ins[fi] * Nq1 + g.ins[gi] % Nq1
    outs = (f.outs[fi] // N) * N ** m + g.outs[gi]
    coef = _mul(f.coef[fi], g.coef[gi])
    return Cochain(f.A, f.p + q - 1, f.k + m - 1, ins, outs, coef, f.den * g.den)


def vee(f, g):
    """f v g = f |- g - f -| g."""
    return vdash(f, g) - dashv(f, g)


def in_dg_range(f):
    return f.p >= 2 and f.k >= 2


def _coboundary_terms(A, p, k, ins, outs):
    """Terms of the Hochschild coboundary applied to single entries.

    Returns (src, ins', outs', coef) with coefficients over ``scale``:
    entry number src[r] contributes coef[r] at (ins'[r], outs'[r]).
    """
    N = A.N
    n = len(ins)
    idx = np.arange(n, dtype=np.int64)
    Np, Nk1 = N ** p, N ** (k - 1)
    parts = []
    # a_1 . f(a_2, ..., a_{p+1})
    src = np.repeat(idx, N)
    a = np.tile(np.arange(N, dtype=np.int64), n)
    rows, K, C, scale = _expand_products(A, a, outs[src] // Nk1)
    s = src[rows]
    parts.append((s, a[rows] * Np + ins[s], K * Nk1 + outs[s] % Nk1, C))
    # (-1)^i f(..., a_i a_{i+1}, ...)
    invK, invU, invV, invC = _inverse_table(A)
    for i in range(1, p + 1):
        lo = N ** (p - i)
        x = (ins // lo) % N
        fi, ti = _join(x, invK)
        pre = ins[fi] // (lo * N)
        post = ins[fi] % lo
        new_in = (pre * N * N + invU[ti] * N + invV[ti]) * lo + post
        parts.append((fi, new_in, outs[fi], invC[ti] * (-1) ** i))
    # (-1)^{p+1} f(a_1, ..., a_p) . a_{p+1}
    a = np.tile(np.arange(N, dtype=np.int64), n)
    rows, K, C, _ = _expand_products(A, outs[src] % N, a)
    s = src[rows]
    parts.append((s, ins[s] * N + a[rows], (outs[s] // N) * N + K, C * (-1) ** (p + 1)))
    return (np.concatenate([t[0] for t in parts]), np.concatenate([t[1] for t in parts]),
            np.concatenate([t[2] for t in parts]), np.concatenate([t[3] for t in parts]), scale)


def coboundary(f):
    """Hochschild coboundary with the outer bimodule structure on A^{(x)k}."""
    src, ins, outs, C, scale = _coboundary_terms(f.A, f.p, f.k, f.ins, f.outs)
    coef = _mul(f.coef[src], C)
    return Cochain(f.A, f.p + 1, f.k, ins, outs, coef, f.den * scale)


def coboundary_matrix(A, p, k, ins, outs, row_filter=None):
    """Matrix of b on the given basis entries of C^p(A, A^k).

    Returns (QMat, row_codes) where row r is the target entry
    row_codes[r] = in * N^k + out.  ``row_filter(ins, outs)`` may mask rows.
    """
    src, ti, to, C, scale = _coboundary_terms(A, p, k, ins, outs)
    if row_filter is not None:
        keep = row_filter(ti, to)
        src, ti, to, C = src[keep], ti[keep], to[keep], C[keep]
    codes = ti * A.N ** k + to
    row_codes, rows = np.unique(codes, return_inverse=True)
    M = QMat.from_triplets(rows, src, C, (len(row_codes), len(ins)), den=scale)
    return M, row_codes


def slot_apply(phi, f):
    """Sum over output slots of f of phi applied to that slot (phi in C^1).

    Unit components of phi are dropped, as a t-derivation must kill 1.
    """
    if phi.p != 1:
        raise ValueError("slot_apply needs phi in C^1")
    N, k, m = f.N, f.k, phi.k
    keep = phi.ins != 0
    pin, pout, pc = phi.ins[keep], phi.outs[keep], phi.coef[keep]
    parts = []
    for j in range(k):
        lo = N ** (k - 1 - j)
        s = (f.outs // lo) % N
        fi, pi = _join(s, pin)
        pre = f.outs[fi] // (lo * N)
        post = f.outs[fi] % lo
        outs = (pre * N ** m + pout[pi]) * lo + post
        parts.append((f.ins[fi], outs, _mul(f.coef[fi], pc[pi])))
    return _build(f.A, f.p, k + m - 1, parts, f.den * phi.den)


# ---------------------------------------------------------------------------
# identity suite


def _bidegrees_fit(A, shapes, budget):
    P = sum(p for p, _ in shapes) - (len(shapes) - 1)
    K = sum(k for _, k in shapes) - (len(shapes) - 1)
    return A.N ** (P + K) <= budget


def _pick(rng, A, count, pranges, kranges, budget):
    for _ in range(50):
        shapes = [(int(rng.choice(pr)), int(rng.choice(kr))) for pr, kr in zip(pranges, kranges)]
        if _bidegrees_fit(A, shapes[:count], budget):
            return shapes
    return [(min(pr), min(kr)) for pr, kr in zip(pranges, kranges)]


def verify_dg_suite(A, trials=50, seed=0, cocycle_pairs=10, budget=20000):
    """Check the cochain identities on random cochains over A.

    Every identity is tested on ``trials`` random tuples with bidegrees in
    its valid range; shapes whose product would exceed ``budget`` entries
    are resampled.  Returns a report with failure counts per identity.
    """
    rng = np.random.default_rng(seed)
    b = coboundary
    R = lambda p, k: random_cochain(A, p, k, rng)
    fails = {}
    counts = {}

    def record(name, ok, witness=None):
        counts[name] = counts.get(name, 0) + 1
        if not ok:
            fails.setdefault(name, []).append(witness)

    two3 = [2, 3]
    for _ in range(trials):
        (p1, k1), (p2, k2), (p3, k3) = _pick(rng, A, 3, [two3] * 3, [two3] * 3, budget)
        f, g, h = R(p1, k1), R(p2, k2), R(p3, k3)
        shapes = ((p1, k1), (p2, k2), (p3, k3))
        record("assoc_vee", vee(f, vee(g, h)).equals(vee(vee(f, g), h)), shapes)
        record("vdash_vdash", vdash(f, vdash(g, h)).equals(vdash(vdash(f, g), h)), shapes)
        record("dashv_dashv", dashv(f, dashv(g, h)).equals(dashv(dashv(f, g), h)), shapes)
        record("vdash_dashv", vdash(f, dashv(g, h)).equals(dashv(vdash(f, g), h)), shapes)
        record("dashv_vdash", dashv(f, vdash(g, h)).equals(vdash(dashv(f, g), h)), shapes)
        # cup compatibilities
        (p1, k1), (p2, k2), (p3, k3) = _pick(rng, A, 3, [two3] * 3, [two3] * 3, budget // 4)
        f, g, h = R(p1, k1), R(p2, k2), R(p3, k3)
        shapes = ((p1, k1), (p2, k2), (p3, k3))
        record("cup_vee_left", vee(cup(f, g), h).equals(cup(f, vee(g, h))), shapes)
        record("cup_vee_right", vee(f, cup(g, h)).equals(cup(vee(f, g), h)), shapes)
        record("vdash_cup", vdash(f, cup(g, h)).equals(cup(vdash(f, g), h)), shapes)
        record("cup_dashv", dashv(cup(f, g), h).equals(cup(f, dashv(g, h))), shapes)
        record("cup_assoc", cup(cup(f, g), h).equals(cup(f, cup(g, h))), shapes)
        # Leibniz rule for vee
        (p1, k1), (p2, k2) = _pick(rng, A, 2, [two3] * 2, [two3] * 2, budget // 3)[:2]
        f, g = R(p1, k1), R(p2, k2)
        lhs = b(vee(f, g))
        rhs = vee(b(f), g) + vee(f, b(g)).scale((-1) ** (p1 - 1))
        record("leibniz_vee", lhs.equals(rhs), ((p1, k1), (p2, k2)))
        # homotopy formulas with the cup correction, relaxed ranges
        (p1, k1), (p2, k2) = _pick(rng, A, 2, [[1, 2], [1, 2]], [[1, 2, 3], [2, 3]], budget // 3)[:2]
        f, g = R(p1, k1), R(p2, k2)
        lhs = vdash(b(f), g) + vdash(f, b(g)).scale((-1) ** (p1 - 1))
        rhs = b(vdash(f, g)) + cup(f, g).scale((-1) ** (p1 + 1))
        record("homotopy_vdash", lhs.equals(rhs), ((p1, k1), (p2, k2)))
        (p1, k1), (p2, k2) = _pick(rng, A, 2, [[1, 2], [1, 2]], [[2, 3], [1, 2, 3]], budget // 3)[:2]
        f, g = R(p1, k1), R(p2, k2)
        lhs = dashv(b(f), g) + dashv(f, b(g)).scale((-1) ** (p1 - 1))
        rhs = b(dashv(f, g)) + cup(f, g).scale((-1) ** (p1 - 1))
        record("homotopy_dashv", lhs.equals(rhs), ((p1, k1), (p2, k2)))
        f = R(int(rng.choice([1, 2])), int(rng.choice([1, 2])))
        record("b_squared", b(b(f)).is_zero(), (f.p, f.k))
    nullity = cup_nullity(A, cocycle_pairs, rng)
    return {
        "algebra": A.name,
        "seed": seed,
        "trials": counts,
        "failures": {k: len(v) for k, v in fails.items()},
        "witnesses": {k: v[:3] for k, v in fails.items()},
        "cup_nullity": nullity,
        "ok": not fails and nullity["ok"],
    }


def cocycle_basis(A, p, k):
    """Kernel of b on C^p(A, A^k) as a list of cochains."""
    N = A.N
    codes = np.arange(N ** (p + k), dtype=np.int64)
    ins, outs = codes // N ** k, codes % N ** k
    M, _ = coboundary_matrix(A, p, k, ins, outs)
    from .linalg import kernel
    out = []
    for vec in kernel(M):
        data = {(_decode(int(ins[j]), p, N), _decode(int(outs[j]), k, N)): c
                for j, c in vec.items()}
        out.append(Cochain.from_dict(A, p, k, data))
    return out


def solve_coboundary(target, p_src):
    """Find h in C^{p_src} with b h = target, or None."""
    A, N, k = target.A, target.N, target.k
    codes = np.arange(N ** (p_src + k), dtype=np.int64)
    ins, outs = codes // N ** k, codes % N ** k
    M, row_codes = coboundary_matrix(A, p_src, k, ins, outs)
    tcodes = target.ins * N ** k + target.outs
    pos = np.searchsorted(row_codes, tcodes)
    ok = (pos < len(row_codes))
    ok[ok] = row_codes[pos[ok]] == tcodes[ok]
    if not ok.all():
        return None
    rhs = {int(r): Fraction(int(c), target.den) for r, c in zip(pos, target.coef)}
    x = solve(M, rhs)
    if x is None:
        return None
    data = {(_decode(int(ins[j]), p_src, N), _decode(int(outs[j]), k, N)): c
            for j, c in x.items()}
    return Cochain.from_dict(A, p_src, k, data)


def cup_nullity(A, pairs, rng, shapes=((1, 2, 1, 1), (1, 1, 1, 2), (1, 2, 1, 2))):
    """Cup products of cocycles with k >= 2 or m >= 2 are coboundaries.

    Each pair of random cocycles gets an explicit witness h with b h = f u g.
    """
    results = []
    bases = {}
    for t in range(pairs):
        p, k, q, m = shapes[t % len(shapes)]
        for key in ((p, k), (q, m)):
            if key not in bases:
                bases[key] = cocycle_basis(A, *key)
        f = _random_combination(A, p, k, bases[(p, k)], rng)
        g = _random_combination(A, q, m, bases[(q, m)], rng)
        c = cup(f, g)
        h = solve_coboundary(c, p + q - 1)
        ok = h is not None and coboundary(h).equals(c)
        results.append({"shape": (p, k, q, m), "cup_zero": c.is_zero(), "witness_found": ok})
    return {"pairs": len(results), "ok": all(r["witness_found"] for r in results),
            "nonzero_cups": sum(not r["cup_zero"] for r in results), "results": results}


def _random_combination(A, p, k, basis, rng):
    acc = Cochain.zero(A, p, k)
    for c in basis:
        acc = acc + c.scale(int(rng.integers(-2, 3)))
    return acc


# ---------------------------------------------------------------------------
# first-order deformations


def first_order_product(beta):
    """Structure constants of A + A(x)A with the product twisted by beta.

    Basis: i < N is e_i, N + i*N + j is e_i (x) e_j.  Returns
    mult(x, y) on basis indices as a dict.
    """
    A, N = beta.A, beta.N
    table = beta.to_dict()
    bvals = {}
    for (a, o), c in table.items():
        vec_add(bvals.setdefault(a, {}), {N + o[0] * N + o[1]: c})

    def mul(x, y):
        out = {}
        if x < N and y < N:
            out = {kk: c for kk, c in A.mult[x][y]}
            vec_add(out, bvals.get((x, y), {}))
        elif x < N:
            i, j = divmod(y - N, N)
            for kk, c in A.mult[x][i]:
                vec_add(out, {N + kk * N + j: c})
        elif y < N:
            i, j = divmod(x - N, N)
            for kk, c in A.mult[j][y]:
                vec_add(out, {N + i * N + kk: c})
        return out
    return mul


def _mul_vec(mul, u, v):
    out = {}
    for x, a in u.items():
        for y, b in v.items():
            vec_add(out, mul(x, y), a * b)
    return out


def first_order(beta, gamma=None):
    """Associativity of the first-order product versus the cocycle condition.

    Associativity is checked on every basis triple of A + A(x)A; the verdicts
    must agree.  With ``gamma`` given, equivalence is decided by solving
    beta - gamma = b f, and a found f is checked by transporting the product.
    """
    if (beta.p, beta.k) != (2, 2):
        raise ValueError("first-order data lives in C^2(A, A(x)A)")
    A, N = beta.A, beta.N
    mul = first_order_product(beta)
    dim = N + N * N
    witness = None
    for x in range(dim):
        for y in range(dim):
            xy = mul(x, y)
            for z in range(dim):
                if _mul_vec(mul, xy, {z: 1}) != _mul_vec(mul, {x: 1}, mul(y, z)):
                    witness = (x, y, z)
                    break
            if witness:
                break
        if witness:
            break
    cocycle = coboundary(beta).is_zero()
    out = {"associative": witness is None, "cocycle": cocycle,
           "agree": (witness is None) == cocycle, "witness": witness}
    if gamma is not None:
        out.update(equivalence_first_order(beta, gamma))
    return out


def equivalence_first_order(beta, gamma):
    """Decide beta ~ gamma; a solution f of gamma - beta = b f is verified by
    checking gamma(u, v) = f~^{-1}(f~u *_beta f~v) on all basis pairs."""
    f = solve_coboundary(gamma - beta, 1)
    if f is None:
        return {"equivalent": False, "transport_ok": None}
    A, N = beta.A, beta.N
    mb = first_order_product(beta)
    fd = {}
    for (a, o), c in f.to_dict().items():
        vec_add(fd.setdefault(a[0], {}), {N + o[0] * N + o[1]: c})

    def tilde(u):
        v = dict(u)
        for x, c in u.items():
            if x < N:
                vec_add(v, fd.get(x, {}), c)
        return v

    def tilde_inv(u):
        v = dict(u)
        for x, c in u.items():
            if x < N:
                vec_add(v, fd.get(x, {}), -c)
        return v

    mg = first_order_product(gamma)
    ok = True
    for u in range(N):
        for v in range(N):
            lhs = mg(u, v)
            rhs = tilde_inv(_mul_vec(mb, tilde({u: 1}), tilde({v: 1})))
            if lhs != rhs:
                ok = False
    return {"equivalent": True, "transport_ok": ok, "f": f}


# ---------------------------------------------------------------------------
# Maurer-Cartan


def mc_residual(betas, m, mu=None):
    """b beta^(m) + sum_{i+j=m, i,j>=1} beta^(i) v beta^(j)."""
    beta_m = betas[m - 1]
    res = coboundary(beta_m)
    res = res + mc_quadratic(betas, m)
    return res


def mc_quadratic(betas, m):
    A = betas[0].A
    acc = Cochain.zero(A, 3, m + 1)
    for i in range(1, m):
        acc = acc + vee(betas[i - 1], betas[m - i - 1])
    return acc


def mc_check(betas, max_input_weight=None, solve_obstruction=True):
    """First failing order of the Maurer-Cartan equation, or a pass.

    The order-m equation is b beta^(m) + sum_{i+j=m} beta^(i) v beta^(j) = 0,
    which is the order-m part of the associativity of the star product.  On
    failure the obstruction -sum beta^(i) v beta^(j) is checked to be a
    3-cocycle (using the lower orders) and, for small algebras, tested for
    being a coboundary.
    """
    clip = (lambda c: c) if max_input_weight is None else (lambda c: c.restrict(max_input_weight))
    for m in range(1, len(betas) + 1):
        res = clip(mc_residual(betas, m))
        if res.is_zero():
            continue
        obstruction = clip(mc_quadratic(betas, m)).scale(-1)
        cocycle = clip(coboundary(obstruction)).is_zero()
        out = {"pass": False, "failing_order": m, "obstruction_is_cocycle": cocycle,
               "residual_nnz": res.nnz}
        if solve_obstruction and max_input_weight is None and obstruction.N ** 2 <= 16:
            h = solve_coboundary(obstruction, 2)
            out["obstruction_solvable"] = h is not None
            out["solution"] = h
        return out
    return {"pass": True, "failing_order": None, "orders": len(betas)}


def star_product(A, betas, u, v, order):
    """Star product of tensor words (tuples of basis indices), t-order <= order."""
    out = {}
    x, y = u[-1], v[0]
    for kk, c in A.mult[x][y]:
        vec_add(out, {u[:-1] + (kk,) + v[1:]: c})
    base = (len(u) - 1) + (len(v) - 1)
    for m, beta in enumerate(betas, start=1):
        if base + m > order:
            break
        for o, c in beta.evaluate((x, y)).items():
            vec_add(out, {u[:-1] + o + v[1:]: c})
    return out


def star_elems(A, betas, X, Y, order):
    out = {}
    for u, a in X.items():
        for v, b in Y.items():
            vec_add(out, star_product(A, betas, u, v, order), a * b)
    return out


def star_associativity(A, betas, order, max_input_weight=None):
    """Direct associativity check of the star product on basis triples."""
    W = A.weights
    idx = range(A.N)
    bad = []
    count = 0
    for a in idx:
        for b in idx:
            for c in idx:
                if max_input_weight is not None and W[a] + W[b] + W[c] > max_input_weight:
                    continue
                count += 1
                ab = star_product(A, betas, (a,), (b,), order)
                left = star_elems(A, betas, ab, {(c,): 1}, order)
                bc = star_product(A, betas, (b,), (c,), order)
                right = star_elems(A, betas, {(a,): 1}, bc, order)
                if left != right:
                    bad.append((a, b, c))
    return {"associative": not bad, "triples": count, "witnesses": bad[:5]}


# ---------------------------------------------------------------------------
# gauge action


def gauge_action(phis, betas, mu=None):
    """The infinitesimal action phi . beta, split by number of output slots.

    phi.beta(a1, a2) = phi(a1)a2 + a1 phi(a2) - phi(a1 a2)
                       + beta'(phi(a1), a2) + beta'(a1, phi(a2)) - phi_t(beta'(a1, a2)),
    with beta' = sum_{m >= 1} beta^(m) and phi = sum phi^(m).
    Returns {k: Cochain in C^2(A, A^k)}.
    """
    A = phis[0].A
    mu = multiplication(A) if mu is None else mu
    out = {}

    def put(c):
        if c.k in out:
            out[c.k] = out[c.k] + c
        else:
            out[c.k] = c

    for phi in phis:
        put(dashv(phi, mu))
        put(vdash(mu, phi))
        put(-vdash(phi, mu))
        for beta in betas:
            put(dashv(phi, beta))
            put(vdash(beta, phi))
            put(-slot_apply(phi, beta))
    return out


def gauge(phis, betas, max_input_weight=None):
    """beta + phi.beta, returned as the list beta^(1..len(betas))."""
    act = gauge_action(phis, betas)
    new = []
    for m, beta in enumerate(betas, start=1):
        nb = beta + act[m + 1] if m + 1 in act else beta
        if max_input_weight is not None:
            nb = nb.restrict(max_input_weight)
        new.append(nb)
    return new


# ---------------------------------------------------------------------------
# the deformed algebra A_phi = F_t / <x - phi(x)>


class DeformationDatum:
    """Presentation (generators V, relations L) and values phi(l) in F_t^+.

    ``phi`` is a list of (relation text, value text) pairs; values may use
    the parameter ``t``.  Relations in L without an entry get phi = 0.
    """

    def __init__(self, names, relations, phi=(), weights=None, t_order=3, cap=None,
                 t_name="t"):
        if t_name in names:
            raise ValueError(f"generator name {t_name!r} is reserved for the parameter")
        self.names = list(names)
        self.weights = [1] * len(names) if weights is None else [int(w) for w in weights]
        self.t_name = t_name
        self.gens = GeneratorSet(self.names, self.weights)
        self.gens_t = GeneratorSet([t_name] + self.names, [2] + self.weights)
        self.relations = [parse_ncpoly(r, self.gens) if isinstance(r, str) else r
                          for r in relations]
        self.phi = {}
        for rel, val in phi:
            r = parse_ncpoly(rel, self.gens) if isinstance(rel, str) else rel
            key = self._match(r)
            v = parse_ncpoly(val, self.gens_t) if isinstance(val, str) else val
            for w in v.terms:
                if 0 not in w:
                    raise ValueError("phi values must lie in the ideal generated by t")
            self.phi[key] = v
        self.t_order = int(t_order)
        self.cap = int(cap) if cap is not None else 2 * self.t_order + 1

    def _match(self, r):
        for i, l in enumerate(self.relations):
            if l == r:
                return i
        raise ValueError("phi given on an element outside L")

    def lift(self, poly):
        """F -> F_t: shift generator indices past t."""
        return NCPoly({tuple(g + 1 for g in w): c for w, c in poly.terms.items()})

    def phi_value(self, i):
        return self.phi.get(i, NCPoly())

    @classmethod
    def from_spec(cls, spec):
        gens = spec["generators"]
        names = [g if isinstance(g, str) else g["name"] for g in gens]
        weights = [1 if isinstance(g, str) else int(g.get("weight", 1)) for g in gens]
        return cls(names, spec.get("relations", []), spec.get("phi", []), weights,
                   spec.get("t_order", 3), spec.get("degree_cap"))


class APhi:
    """Truncation of A_phi together with the undeformed algebra A."""

    def __init__(self, datum, algebra, base, rewrite):
        self.datum = datum
        self.algebra = algebra
        self.base = base
        self.rewrite = rewrite
        self.cap = datum.cap
        self.order = datum.t_order
        self._base_index = {w: i for i, w in enumerate(base.words)}

    def split(self, word):
        """Normal word of A_phi -> tensor word of A-indices, or None."""
        parts, cur = [], []
        for g in word:
            if g == 0:
                parts.append(tuple(cur))
                cur = []
            else:
                cur.append(g - 1)
        parts.append(tuple(cur))
        try:
            return tuple(self._base_index[p] for p in parts)
        except KeyError:
            return None

    def t_cochains(self):
        """beta^(1..order) read off from products of A-basis elements."""
        A, Aphi = self.base, self.algebra
        idx = {w: i for i, w in enumerate(Aphi.words)}
        emb = [idx[tuple(g + 1 for g in w)] for w in A.words]
        data = [{} for _ in range(self.order)]
        bad = []
        for a in range(A.N):
            for b in range(A.N):
                for kk, c in Aphi.mult[emb[a]][emb[b]]:
                    tw = self.split(Aphi.words[kk])
                    if tw is None:
                        bad.append((a, b))
                        continue
                    m = len(tw) - 1
                    if m == 0:
                        continue
                    if m <= self.order:
                        data[m - 1][((a, b), tw)] = c
        if bad:
            raise ValueError(f"A_phi basis does not split into A-words: {bad[:3]}")
        return [Cochain.from_dict(A, 2, m + 2, data[m]) for m in range(self.order)]


def build_A_phi(datum):
    """Rewrite F_t modulo {l - phi(l)} and materialize below the weight cap."""
    cap = datum.cap
    rels = [datum.lift(l) - datum.phi_value(i) for i, l in enumerate(datum.relations)]
    pres_t = AlgebraPresentation(datum.gens_t, rels, cap)
    rs = complete_rewrite(pres_t, cap)
    Aphi = build_findim(pres_t, cap, rs=rs, name="A_phi")
    pres = AlgebraPresentation(datum.gens, list(datum.relations), cap)
    base = build_findim(pres, cap, name="A")
    out = APhi(datum, Aphi, base, rs)
    # a parameter inside a leading word means A-words and t do not interleave freely
    out.t_in_leads = [rs.gens.word_str(l) for l in rs.rules if 0 in l]
    out.unresolved = [rs.gens.word_str(w) for w in rs.unresolved_overlaps]
    return out


def _span_rank(vecs):
    r = Reducer(track=False)
    for v in vecs:
        if v:
            r.add(v)
    return r


def flatness_check(aphi, order=None):
    """Compare dim gr^m A_phi (filtration by powers of <t>) with the count of
    tensor words of A with m parameters, weight by weight below the cap."""
    order = aphi.order if order is None else order
    Aphi, A, cap = aphi.algebra, aphi.base, aphi.cap
    W = Aphi.weights
    t_idx = Aphi.words.index((0,))
    # powers of the ideal generated by t, as echelon bases
    layers = [None]
    cur = [{j: 1} for j in range(Aphi.N)]
    for m in range(1, order + 2):
        gens = []
        for x in cur:
            xt = Aphi.mul(x, {t_idx: 1})
            if not xt:
                continue
            for j in range(Aphi.N):
                v = Aphi.mul(xt, {j: 1})
                if v:
                    gens.append(v)
        red = _span_rank(gens)
        layers.append(red)
        cur = red.basis()
    Aw = {}
    for w in A.weights:
        Aw[w] = Aw.get(w, 0) + 1

    def expected(m, w):
        # weight-w tensor words with m parameters: sum over slot weights
        rest = w - 2 * m
        if rest < 0:
            return 0
        counts = {0: 1}
        for _ in range(m + 1):
            new = {}
            for s, c in counts.items():
                for wa, da in Aw.items():
                    if s + wa <= rest:
                        new[s + wa] = new.get(s + wa, 0) + c * da
            counts = new
        return counts.get(rest, 0)

    def dim_by_weight(red):
        out = {}
        for v in red.basis():
            w = W[min(v)]
            out[w] = out.get(w, 0) + 1
        return out

    total = {}
    for w in W:
        total[w] = total.get(w, 0) + 1
    rows = []
    ok = True
    for m in range(order + 1):
        upper = total if m == 0 else dim_by_weight(layers[m])
        lower = dim_by_weight(layers[m + 1])
        for w in range(cap + 1):
            got = upper.get(w, 0) - lower.get(w, 0)
            exp = expected(m, w)
            rows.append({"order": m, "weight": w, "gr_dim": got, "expected": exp})
            if got != exp:
                ok = False
    return {"flat": ok, "order": order, "cap": cap, "table": rows}


# ---------------------------------------------------------------------------
# Anick resolution of TV / <L>


def _pi_word(A, word):
    """Image in A of a word in the generators (empty word = 1)."""
    return A.poly_to_vec(NCPoly.word(word))


class AnickComplex:
    """The bimodule complex A(x)L(x)A -> A(x)V(x)A -> A(x)A -> A by weight."""

    def __init__(self, names, relations, cap, weights=None):
        self.gens = GeneratorSet(names, weights)
        self.relations = [parse_ncpoly(r, self.gens) if isinstance(r, str) else r
                          for r in relations]
        self.cap = int(cap)
        pres = AlgebraPresentation(self.gens, self.relations, self.cap)
        self.A = build_findim(pres, self.cap, name="A")
        A = self.A
        self.by_weight = {}
        for i, w in enumerate(A.weights):
            self.by_weight.setdefault(w, []).append(i)
        self.lweights = [l.max_weight(self.gens) for l in self.relations]

    def _triples(self, mid_weights, w):
        """Basis (a, j, b) of A (x) X (x) A in weight w; X has given weights."""
        out = []
        for j, mw in enumerate(mid_weights):
            for wa in range(w - mw + 1):
                for a in self.by_weight.get(wa, []):
                    for b in self.by_weight.get(w - mw - wa, []):
                        out.append((a, j, b))
        return out

    def _pairs(self, w):
        return [(a, b) for wa in range(w + 1) for a in self.by_weight.get(wa, [])
                for b in self.by_weight.get(w - wa, [])]

    def spaces(self, w):
        return {"L": self._triples(self.lweights, w),
                "V": self._triples(self.gens.weights, w),
                "AA": self._pairs(w),
                "A": self.by_weight.get(w, [])}

    def maps(self, w):
        """Matrices (as dict columns) of d2, d1 and multiplication in weight w."""
        A = self.A
        S = self.spaces(w)
        iV = {t: n for n, t in enumerate(S["V"])}
        iAA = {t: n for n, t in enumerate(S["AA"])}
        iA = {t: n for n, t in enumerate(S["A"])}
        gen_idx = [A.words.index((g,)) for g in range(len(self.gens))]
        d2 = []
        for a, j, b in S["L"]:
            col = {}
            for word, c in self.relations[j].terms.items():
                for i, v in enumerate(word):
                    left = A.mul({a: 1}, _pi_word(A, word[:i]))
                    right = A.mul(_pi_word(A, word[i + 1:]), {b: 1})
                    for x, cx in left.items():
                        for y, cy in right.items():
                            vec_add(col, {iV[(x, v, y)]: c * cx * cy})
            d2.append(col)
        d1 = []
        for a, v, b in S["V"]:
            col = {}
            for x, c in A.mul({a: 1}, {gen_idx[v]: 1}).items():
                vec_add(col, {iAA[(x, b)]: c})
            for y, c in A.mul({gen_idx[v]: 1}, {b: 1}).items():
                vec_add(col, {iAA[(a, y)]: -c})
            d1.append(col)
        eps = []
        for a, b in S["AA"]:
            eps.append({iA[x]: c for x, c in A.mul({a: 1}, {b: 1}).items()})
        return d2, d1, eps

    def check(self, max_weight=None):
        """Composition zero and exactness weight by weight."""
        max_weight = self.cap if max_weight is None else max_weight
        rows = []
        for w in range(max_weight + 1):
            S = self.spaces(w)
            d2, d1, eps = self.maps(w)
            comp1 = all(not _apply_cols(d1, c) for c in d2)
            comp0 = all(not _apply_cols(eps, c) for c in d1)
            r2, r1, r0 = rank(d2), rank(d1), rank(eps)
            exact = (r2 == len(S["L"]) and r1 + r2 == len(S["V"])
                     and r0 + r1 == len(S["AA"]) and r0 == len(S["A"]))
            rows.append({"weight": w, "dims": [len(S["L"]), len(S["V"]), len(S["AA"]), len(S["A"])],
                         "ranks": [r2, r1, r0], "composition_zero": comp1 and comp0,
                         "exact": exact})
        return {"composition_zero": all(r["composition_zero"] for r in rows),
                "exact": all(r["exact"] for r in rows), "weights": rows}

    # cohomology with coefficients in A (x) A ------------------------------
    def _M(self, w):
        return self._pairs(w) if w >= 0 else []

    def dual_cohomology(self, max_weight=None):
        """H^0, H^1, H^2 of Hom(A(x)X(x)A, A(x)A) by internal degree e.

        Degree e is kept when every coefficient weight involved is <= the
        bound; H^3 vanishes since the complex has length two.
        """
        A = self.A
        bound = self.cap if max_weight is None else max_weight
        gw = self.gens.weights
        lw = self.lweights
        top = max(lw) if lw else max(gw)
        gen_idx = [A.words.index((g,)) for g in range(len(self.gens))]
        out = {}
        for e in range(-top, bound - top + 1):
            C0 = [("m", x) for x in self._M(e)]
            C1 = [(v, x) for v in range(len(gw)) for x in self._M(gw[v] + e)]
            C2 = [(j, x) for j in range(len(lw)) for x in self._M(lw[j] + e)]
            i1 = {t: n for n, t in enumerate(C1)}
            i2 = {t: n for n, t in enumerate(C2)}
            d0 = []
            for _, (a, b) in C0:
                col = {}
                for v in range(len(gw)):
                    for x, c in A.mul({gen_idx[v]: 1}, {a: 1}).items():
                        vec_add(col, {i1[(v, (x, b))]: c})
                    for y, c in A.mul({b: 1}, {gen_idx[v]: 1}).items():
                        vec_add(col, {i1[(v, (a, y))]: -c})
                d0.append(col)
            d1 = []
            for v, (a, b) in C1:
                theta = {v: {(a, b): 1}}
                d1.append({i2[(j, x)]: c for (j, x), c in
                           self.theta_on_relations(theta).items()})
            r0, r1 = rank(d0), rank(d1)
            out[e] = {"H0": len(C0) - r0, "H1": len(C1) - r1 - r0, "H2": len(C2) - r1,
                      "H3": 0}
        return out

    def theta_on_relations(self, theta):
        """Theta_f on each relation, f given on generators as {v: {(a, b): c}}."""
        A = self.A
        out = {}
        for j, rel in enumerate(self.relations):
            for word, c in rel.terms.items():
                for i, v in enumerate(word):
                    if v not in theta:
                        continue
                    left = _pi_word(A, word[:i])
                    right = _pi_word(A, word[i + 1:])
                    for (a, b), cv in theta[v].items():
                        for x, cx in A.mul(left, {a: 1}).items():
                            for y, cy in A.mul({b: 1}, right).items():
                                vec_add(out, {(j, (x, y)): c * cv * cx * cy})
        return out

    def bar_tor(self, n_max=3, max_weight=None):
        """dim Tor^A_n(k, k) by weight from the reduced bar complex.

        For a connected graded algebra these count the generators of the
        minimal bimodule resolution, so Tor_3 = 0 in a weight range means
        the resolution stops at length two there and H^3(A, M) = 0.
        """
        A = self.A
        bound = self.cap if max_weight is None else max_weight
        out = {}
        for w in range(1, bound + 1):
            chains = {n: [_decode(int(c), n, A.N) for c in
                          _tuples_by_weight(A, n, w, skip_unit=True).get(w, [])]
                      for n in range(1, n_max + 2)}
            ranks = {}
            for n in range(2, n_max + 2):
                index = {t: i for i, t in enumerate(chains[n - 1])}
                cols = []
                for tup in chains[n]:
                    col = {}
                    for i in range(n - 1):
                        for x, c in A.mult[tup[i]][tup[i + 1]]:
                            new = tup[:i] + (x,) + tup[i + 2:]
                            vec_add(col, {index[new]: (-1) ** i * c})
                    cols.append(col)
                ranks[n] = rank(cols)
            for n in range(1, n_max + 1):
                d = len(chains[n]) - ranks.get(n, 0) - ranks.get(n + 1, 0)
                out.setdefault(n, {})[w] = d
        return out


def _apply_cols(cols, vec):
    out = {}
    for j, c in vec.items():
        vec_add(out, cols[j], c)
    return out


def minimality(names, relations, cap, weights=None):
    """L meets J^2 trivially: rank of L + J^2 equals rank L + rank J^2
    in every weight up to the cap (J = two-sided ideal generated by L)."""
    gens = GeneratorSet(names, weights)
    rels = [parse_ncpoly(r, gens) if isinstance(r, str) else r for r in relations]
    from .algebra import words_up_to
    words = [w for w in words_up_to(gens, cap)]

    def ideal(polys):
        out = []
        for l in polys:
            lw = l.max_weight(gens)
            for u in words:
                for v in words:
                    if gens.weight(u) + lw + gens.weight(v) <= cap:
                        out.append(NCPoly.word(u) * l * NCPoly.word(v))
        return out

    J = ideal(rels)
    J2 = [x * y for x in J for y in J
          if x.max_weight(gens) + y.max_weight(gens) <= cap]
    index = {}

    def vec(p):
        return {index.setdefault(w, len(index)): c for w, c in p.terms.items()}

    rJ2 = _span_rank([vec(p) for p in J2])
    rL = _span_rank([vec(p) for p in rels])
    rBoth = _span_rank([vec(p) for p in rels + J2])
    return {"minimal": len(rBoth) == len(rJ2) + len(rL), "rank_L": len(rL),
            "rank_J2": len(rJ2)}


def anick(names, relations, cap, weights=None, max_weight=None):
    cx = AnickComplex(names, relations, cap, weights)
    chk = cx.check(max_weight)
    coh = cx.dual_cohomology(max_weight)
    tor = cx.bar_tor(3, max_weight)
    h3_zero = all(v == 0 for v in tor[3].values()) and all(c["H3"] == 0 for c in coh.values())
    return {"complex": cx, "composition_zero": chk["composition_zero"],
            "exact": chk["exact"], "weights": chk["weights"], "cohomology": coh,
            "tor": tor, "H3_zero": h3_zero}


# ---------------------------------------------------------------------------
# linear equivalence criterion


class TensorWords:
    """Unknown space for f: V -> A_t^+ with t-order <= T and slot weight <= S."""

    def __init__(self, A, T, S):
        self.A = A
        self.words = []
        for m in range(1, T + 1):
            for w, codes in _tuples_by_weight(A, m + 1, S).items():
                for c in codes:
                    self.words.append(_decode(int(c), m + 1, A.N))
        self.words.sort()


def _t_mul_vec(A, X, Y):
    from .algebra import t_mul
    out = {}
    for u, a in X.items():
        for v, b in Y.items():
            vec_add(out, t_mul(A, u, v), a * b)
    return out


def theta_relations(datum, A, f):
    """Theta_f(l) in A_t for each relation l; f: {generator: {tensor word: c}}."""
    out = {}
    for j, rel in enumerate(datum.relations):
        for word, c in rel.terms.items():
            for i, v in enumerate(word):
                if v not in f:
                    continue
                left = {(x,): cx for x, cx in _pi_word(A, word[:i]).items()}
                right = {(y,): cy for y, cy in _pi_word(A, word[i + 1:]).items()}
                val = _t_mul_vec(A, _t_mul_vec(A, left, f[v]), right)
                for tw, cc in val.items():
                    vec_add(out, {(j, tw): c * cc})
    return out


def project_phi(datum, A, value):
    """pi: F_t -> A_t, splitting words at the parameter."""
    out = {}
    for word, c in value.terms.items():
        parts, cur = [], []
        for g in word:
            if g == 0:
                parts.append(tuple(cur))
                cur = []
            else:
                cur.append(g - 1)
        parts.append(tuple(cur))
        acc = {(): c}
        for part in parts:
            img = _pi_word(A, part)
            acc = {tw + (x,): a * b for tw, a in acc.items() for x, b in img.items()}
        vec_add(out, acc)
    return out


def lift_tensor(A, tw):
    """Tensor word of A-indices -> word of F_t (normal words joined by t)."""
    word = []
    for i, a in enumerate(tw):
        if i:
            word.append(0)
        word.extend(g + 1 for g in A.words[a])
    return tuple(word)


def equivalence_linear(phi_datum, psi_datum, T=2, S=2, A=None):
    """Solve pi(phi - psi) = Theta_f|_L for f: V -> A_t^+ (truncated)."""
    if A is None:
        pres = AlgebraPresentation(phi_datum.gens, list(phi_datum.relations),
                                   S + max(l.max_weight(phi_datum.gens)
                                           for l in phi_datum.relations))
        A = build_findim(pres, name="A")
    space = TensorWords(A, T, S)
    unknowns = [(v, tw) for v in range(len(phi_datum.names)) for tw in space.words]
    rows = {}
    cols = []
    for v, tw in unknowns:
        val = theta_relations(phi_datum, A, {v: {tw: 1}})
        cols.append({rows.setdefault(key, len(rows)): c for key, c in val.items()})
    target = {}
    for j in range(len(phi_datum.relations)):
        diff = phi_datum.phi_value(j) - psi_datum.phi_value(j)
        for tw, c in project_phi(phi_datum, A, diff).items():
            vec_add(target, {(j, tw): c})
    for key in target:
        rows.setdefault(key, len(rows))
    rhs = {rows[k]: c for k, c in target.items()}
    x = solve(cols, rhs) if rhs else {}
    if x is None:
        return {"equivalent": False, "f": None, "unknowns": len(unknowns), "A": A}
    f = {}
    for j, c in x.items():
        v, tw = unknowns[j]
        vec_add(f.setdefault(v, {}), {tw: c})
    check = theta_relations(phi_datum, A, f)
    ok = check == {k: v for k, v in target.items() if v}
    return {"equivalent": True, "f": f, "verified": ok, "unknowns": len(unknowns), "A": A}


def random_f(datum, A, rng, T=2, S=2, density=0.2):
    space = TensorWords(A, T, S)
    f = {}
    for v in range(len(datum.names)):
        for tw in space.words:
            if rng.random() < density:
                c = int(rng.integers(-2, 3))
                if c:
                    f.setdefault(v, {})[tw] = c
    return f


def shifted_datum(datum, A, f):
    """psi with psi(l) = phi(l) - lift(Theta_f(l)), so pi(phi - psi) = Theta_f|_L."""
    th = theta_relations(datum, A, f)
    new = DeformationDatum(datum.names, datum.relations, (), datum.weights,
                           datum.t_order, datum.cap, datum.t_name)
    for j in range(len(datum.relations)):
        terms = dict(datum.phi_value(j).terms)
        for (jj, tw), c in th.items():
            if jj == j:
                vec_add(terms, {lift_tensor(A, tw): -c})
        if terms:
            new.phi[j] = NCPoly(terms)
    return new


def equivalence_round_trips(datum, trials=10, seed=0, T=2, S=2):
    rng = np.random.default_rng(seed)
    A = None
    results = []
    for _ in range(trials):
        if A is None:
            pres = AlgebraPresentation(datum.gens, list(datum.relations),
                                       S + max(l.max_weight(datum.gens) for l in datum.relations))
            A = build_findim(pres, name="A")
        f = random_f(datum, A, rng, T, S)
        psi = shifted_datum(datum, A, f)
        res = equivalence_linear(datum, psi, T, S, A=A)
        same = res["equivalent"] and theta_relations(datum, A, res["f"]) == \
            {k: v for k, v in theta_relations(datum, A, f).items() if v}
        results.append(bool(res["equivalent"] and res["verified"] and same))
    return {"trials": trials, "recovered": sum(results), "ok": all(results)}
