"""Exact linear algebra over Q.

Two layers live here:

* ``QMat``: an integer scipy CSR matrix paired with a common positive
  denominator.  Used for the big operator matrices (d, b, kappa, ...)
  where entries stay small and we want vectorized products.  Every
  product is guarded against int64 overflow; on overflow we fall back to
  Python integers.

* ``Reducer``: fraction-free sparse Gaussian elimination on dict vectors,
  pivoting on the first nonzero index in the fixed basis order.  Used for
  ranks, kernels, solves and quotient computations on small blocks.
"""

from fractions import Fraction
from math import gcd

import numpy as np
import scipy.sparse as sp

_LIMIT = 1 << 62


def _lcm(a, b):
    return a // gcd(a, b) * b


def as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact scalar: {x!r}")


def normalize_scalar(x):
    """Return an int when x is integral, else a Fraction."""
    x = as_fraction(x)
    return x.numerator if x.denominator == 1 else x


class OverflowGuard(ArithmeticError):
    pass


def _maxabs(m):
    if m.nnz == 0:
        return 0
    return int(np.abs(m.data).max())


def _py_matmul(a, b):
    """Sparse product with Python integers (slow path, no overflow)."""
    a = a.tocsr()
    b = b.tocsr()
    rows = {}
    for i in range(a.shape[0]):
        acc = {}
        for p in range(a.indptr[i], a.indptr[i + 1]):
            k = int(a.indices[p])
            av = int(a.data[p])
            for q in range(b.indptr[k], b.indptr[k + 1]):
                j = int(b.indices[q])
                acc[j] = acc.get(j, 0) + av * int(b.data[q])
        rows[i] = {j: v for j, v in acc.items() if v}
    return rows


class QMat:
    """Exact rational sparse matrix: ``m / den`` with ``m`` int64 CSR."""

    __slots__ = ("m", "den")

    def __init__(self, m, den=1):
        if not sp.issparse(m):
            m = sp.csr_matrix(np.asarray(m, dtype=np.int64))
        m = m.tocsr()
        if m.dtype != np.int64:
            m = m.astype(np.int64)
        m.sum_duplicates()
        m.eliminate_zeros()
        self.m = m
        self.den = int(den)
        if self.den <= 0:
            raise ValueError("denominator must be positive")
        self._simplify()

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, shape):
        return cls(sp.csr_matrix(shape, dtype=np.int64))

    @classmethod
    def identity(cls, n):
        return cls(sp.identity(n, dtype=np.int64, format="csr"))

    @classmethod
    def from_triplets(cls, rows, cols, vals, shape, den=1):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.int64)
        m = sp.coo_matrix((vals, (rows, cols)), shape=shape).tocsr()
        return cls(m, den)

    @classmethod
    def from_columns(cls, cols, nrows):
        """Build from a list of dict columns with rational entries."""
        den = 1
        for c in cols:
            for v in c.values():
                den = _lcm(den, as_fraction(v).denominator)
        r, cc, vv = [], [], []
        for j, c in enumerate(cols):
            for i, v in c.items():
                r.append(i)
                cc.append(j)
                vv.append(int(as_fraction(v) * den))
        if any(abs(v) >= _LIMIT for v in vv):
            raise OverflowGuard("entries too large for int64 storage")
        return cls.from_triplets(r, cc, vv, (nrows, len(cols)), den)

    # basic properties ---------------------------------------------------
    @property
    def shape(self):
        return self.m.shape

    def _simplify(self):
        if self.den == 1:
            return
        if self.m.nnz == 0:
            self.den = 1
            return
        g = self.den
        for v in np.unique(np.abs(self.m.data)):
            g = gcd(g, int(v))
            if g == 1:
                return
        if g > 1:
            self.m = sp.csr_matrix(
                (self.m.data // g, self.m.indices, self.m.indptr), shape=self.m.shape)
            self.den //= g

    def is_zero(self):
        return self.m.nnz == 0

    def maxabs(self):
        return _maxabs(self.m)

    # arithmetic ---------------------------------------------------------
    def __matmul__(self, other):
        if self.shape[1] != other.shape[0]:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        a, b = self.m, other.m
        if a.nnz and b.nnz:
            rowlen = int(np.diff(a.indptr).max())
            bound = _maxabs(a) * _maxabs(b) * max(rowlen, 1)
        else:
            bound = 0
        den = self.den * other.den
        if bound < _LIMIT and den < _LIMIT:
            return QMat(a @ b, den)
        rows = _py_matmul(a, b)
        return _from_py_rows(rows, (a.shape[0], b.shape[1]), den)

    def _aligned(self, other):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        den = _lcm(self.den, other.den)
        fa, fb = den // self.den, den // other.den
        if (self.maxabs() * fa + other.maxabs() * fb) >= _LIMIT or den >= _LIMIT:
            raise OverflowGuard("coefficient growth beyond int64")
        return self.m * fa, other.m * fb, den

    def __add__(self, other):
        a, b, den = self._aligned(other)
        return QMat(a + b, den)

    def __sub__(self, other):
        a, b, den = self._aligned(other)
        return QMat(a - b, den)

    def __neg__(self):
        return QMat(-self.m, self.den)

    def scale(self, c):
        c = as_fraction(c)
        if abs(c.numerator) * max(self.maxabs(), 1) >= _LIMIT:
            raise OverflowGuard("coefficient growth beyond int64")
        return QMat(self.m * c.numerator, self.den * c.denominator)

    def equals(self, other):
        if self.shape != other.shape:
            return False
        return (self - other).is_zero()

    def diff_nnz(self, other):
        """Number of entries where two matrices differ (witness counting)."""
        return (self - other).m.nnz

    def transpose(self):
        return QMat(self.m.T.tocsr(), self.den)

    def submatrix(self, rows, cols):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        return QMat(self.m[rows][:, cols], self.den)

    def pad_rows(self, nrows):
        """Embed into a taller matrix (extra rows are zero)."""
        m = self.m
        if nrows < m.shape[0]:
            raise ValueError("cannot shrink")
        indptr = np.concatenate([m.indptr, np.full(nrows - m.shape[0], m.indptr[-1])])
        return QMat(sp.csr_matrix((m.data, m.indices, indptr), shape=(nrows, m.shape[1])), self.den)

    def truncate_rows(self, nrows):
        """Keep the first nrows rows; the dropped rows must be zero."""
        m = self.m
        if m.indptr[nrows] != m.indptr[-1]:
            raise ValueError("nonzero rows would be dropped")
        return QMat(m[:nrows], self.den)

    # conversions --------------------------------------------------------
    def column(self, j):
        c = self.m[:, [j]].tocoo()
        return {int(i): Fraction(int(v), self.den) for i, v in zip(c.row, c.data)}

    def columns(self):
        csc = self.m.tocsc()
        out = []
        for j in range(csc.shape[1]):
            s, e = csc.indptr[j], csc.indptr[j + 1]
            out.append({int(i): Fraction(int(v), self.den)
                        for i, v in zip(csc.indices[s:e], csc.data[s:e])})
        return out

    def int_columns(self):
        """Columns with the common denominator dropped (same span, same rank)."""
        csc = self.m.tocsc()
        out = []
        for j in range(csc.shape[1]):
            s, e = csc.indptr[j], csc.indptr[j + 1]
            out.append({int(i): int(v) for i, v in zip(csc.indices[s:e], csc.data[s:e])})
        return out

    def apply(self, vec):
        """Apply to a dict vector with rational entries."""
        out = {}
        csc = self.m.tocsc()
        for j, x in vec.items():
            s, e = csc.indptr[j], csc.indptr[j + 1]
            for i, v in zip(csc.indices[s:e], csc.data[s:e]):
                i = int(i)
                out[i] = out.get(i, 0) + x * Fraction(int(v), self.den)
        return {i: v for i, v in out.items() if v}

    def __repr__(self):
        return f"QMat(shape={self.shape}, nnz={self.m.nnz}, den={self.den})"


def _from_py_rows(rows, shape, den):
    g = den
    for r in rows.values():
        for v in r.values():
            g = gcd(g, v)
    if g > 1:
        rows = {i: {j: v // g for j, v in r.items()} for i, r in rows.items()}
        den //= g
    r_, c_, v_ = [], [], []
    for i, r in rows.items():
        for j, v in r.items():
            if abs(v) >= _LIMIT:
                raise OverflowGuard("coefficient growth beyond int64")
            r_.append(i)
            c_.append(j)
            v_.append(v)
    return QMat.from_triplets(r_, c_, v_, shape, den)


def hstack(mats):
    den = 1
    for q in mats:
        den = _lcm(den, q.den)
    return QMat(sp.hstack([q.m * (den // q.den) for q in mats], format="csr"), den)


def vstack(mats):
    den = 1
    for q in mats:
        den = _lcm(den, q.den)
    return QMat(sp.vstack([q.m * (den // q.den) for q in mats], format="csr"), den)


def block_matrix(blocks, row_sizes, col_sizes):
    """Assemble a block matrix from a dict (i, j) -> QMat."""
    den = 1
    for q in blocks.values():
        den = _lcm(den, q.den)
    grid = [[None] * len(col_sizes) for _ in row_sizes]
    for (i, j), q in blocks.items():
        grid[i][j] = q.m * (den // q.den)
    for i, r in enumerate(row_sizes):
        for j, c in enumerate(col_sizes):
            if grid[i][j] is None:
                grid[i][j] = sp.csr_matrix((r, c), dtype=np.int64)
    if not row_sizes or not col_sizes:
        return QMat.zeros((sum(row_sizes), sum(col_sizes)))
    return QMat(sp.bmat(grid, format="csr").astype(np.int64), den)


# ---------------------------------------------------------------------------
# fraction-free elimination on dict vectors


def _to_int_vec(vec):
    """Clear denominators: returns (integer vector, multiplier L) with int = L*vec."""
    L = 1
    for v in vec.values():
        if isinstance(v, Fraction):
            L = _lcm(L, v.denominator)
    if L == 1:
        return {k: int(v) for k, v in vec.items() if v}, 1
    return {k: int(v * L) for k, v in vec.items() if v}, L


def _content(*vecs):
    g = 0
    for vec in vecs:
        for v in vec.values():
            g = gcd(g, v)
            if g == 1:
                return 1
    return g


class Reducer:
    """Incremental echelon basis with combination tracking.

    Each stored vector ``v`` satisfies ``v == sum(comb[tag] * input[tag])``.
    Pivot = smallest index among the nonzero entries (fixed basis order),
    which makes every result reproducible run to run.
    """

    def __init__(self, track=True):
        self.track = track
        self.pivots = {}      # pivot index -> (vec, comb)
        self.order = []

    def __len__(self):
        return len(self.pivots)

    def reduce(self, vec, comb=None):
        vec, L = _to_int_vec(vec)
        if comb is None:
            comb = {}
        else:
            comb = {k: v * L for k, v in comb.items()}
            comb, L2 = _to_int_vec(comb)
            if L2 != 1:
                vec = {k: v * L2 for k, v in vec.items()}
        pivots = self.pivots
        while vec:
            hits = [c for c in vec if c in pivots]
            if not hits:
                break
            c = min(hits)
            pvec, pcomb = pivots[c]
            a = pvec[c]
            x = vec[c]
            g = gcd(a, x)
            fa, fx = a // g, x // g
            new = {}
            for k, v in vec.items():
                new[k] = v * fa
            for k, v in pvec.items():
                w = new.get(k, 0) - fx * v
                if w:
                    new[k] = w
                else:
                    new.pop(k, None)
            vec = new
            if self.track:
                nc = {k: v * fa for k, v in comb.items()}
                for k, v in pcomb.items():
                    w = nc.get(k, 0) - fx * v
                    if w:
                        nc[k] = w
                    else:
                        nc.pop(k, None)
                comb = nc
            g = _content(vec, comb) if self.track else _content(vec)
            if g > 1:
                vec = {k: v // g for k, v in vec.items()}
                comb = {k: v // g for k, v in comb.items()}
        return vec, comb

    def add(self, vec, tag=None):
        """Insert a vector; returns None if independent, else the relation comb."""
        comb = {tag: 1} if (self.track and tag is not None) else {}
        vec, comb = self.reduce(vec, comb)
        if not vec:
            return comb
        p = min(vec)
        g = _content(vec, comb)
        if g > 1:
            vec = {k: v // g for k, v in vec.items()}
            comb = {k: v // g for k, v in comb.items()}
        if vec[p] < 0:
            vec = {k: -v for k, v in vec.items()}
            comb = {k: -v for k, v in comb.items()}
        self.pivots[p] = (vec, comb)
        self.order.append(p)
        return None

    def contains(self, vec):
        rest, _ = self.reduce(vec, {} if self.track else None)
        return not rest

    def basis(self):
        return [self.pivots[p][0] for p in self.order]


def rank_of_columns(cols):
    r = Reducer(track=False)
    for c in cols:
        if c:
            r.add(c)
    return len(r)


def rank(q):
    """Rank of a QMat (or a list of dict columns)."""
    if isinstance(q, QMat):
        if q.m.nnz == 0:
            return 0
        # eliminate along the shorter side
        if q.shape[0] < q.shape[1]:
            return rank_of_columns(q.transpose().int_columns())
        return rank_of_columns(q.int_columns())
    return rank_of_columns(q)


def kernel(q):
    """Basis of the null space of a QMat as dict vectors with Fraction entries."""
    cols = q.int_columns() if isinstance(q, QMat) else q
    r = Reducer(track=True)
    out = []
    for j, c in enumerate(cols):
        rel = r.add(c, j)
        if rel is not None:
            out.append(_fraction_normalize(rel))
    return out


def _fraction_normalize(vec):
    """Scale so the first (pivot-order) entry is 1."""
    if not vec:
        return {}
    k0 = min(vec)
    a = vec[k0]
    return {k: Fraction(v, a) for k, v in sorted(vec.items())}


def solve(q, rhs):
    """Find x with q x = rhs, or None if no solution exists."""
    cols = q.int_columns() if isinstance(q, QMat) else q
    den = q.den if isinstance(q, QMat) else 1
    r = Reducer(track=True)
    for j, c in enumerate(cols):
        r.add(c, j)
    rest, comb = r.reduce(rhs, {"rhs": 1})
    if rest:
        return None
    s = comb.pop("rhs")
    # s*rhs + sum comb[j] col_j = 0, col_j = den * (true column)
    return {j: Fraction(-v * den, s) for j, v in sorted(comb.items()) if v}


def image_basis(cols):
    r = Reducer(track=False)
    for c in cols:
        if c:
            r.add(c)
    return r.basis()


def quotient_representatives(sub, vecs):
    """Indices of ``vecs`` independent modulo span(sub), in order."""
    r = Reducer(track=False)
    for v in sub:
        if v:
            r.add(v)
    keep = []
    for i, v in enumerate(vecs):
        if r.add(v) is None:
            keep.append(i)
    return keep


def vec_add(acc, vec, c=1):
    for k, v in vec.items():
        w = acc.get(k, 0) + c * v
        if w:
            acc[k] = w
        else:
            acc.pop(k, None)
    return acc


def vec_scale(vec, c):
    if not c:
        return {}
    return {k: c * v for k, v in vec.items()}
