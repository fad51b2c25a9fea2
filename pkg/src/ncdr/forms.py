"""Noncommutative differential forms Omega^n A = A (x) Abar^(x)n.

A basis element a0 da1 ... dan is the tuple ``(a0, t1, ..., tn)`` with
``a0`` a basis index of A (0 = unit) and each ``ti`` in ``1..N-1``.
Forms are dicts ``{key: coefficient}``.

Two independent routes are provided for every operator:

* element level (dict arithmetic, the semantic reference), and
* vectorized numpy builders that assemble integer sparse matrices on
  whole degree pieces (used for exhaustive checks and homology).

Index of a key in Omega^n: ``a0 * M**n + sum (ti - 1) * M**(n - i)`` with
``M = N - 1``.  Keys with ``a0 = 0`` (the exact subspace E^n, spanned by
da1 ... dan) therefore occupy the first ``M**n`` indices.
"""

from fractions import Fraction
from math import factorial

import numpy as np

from .linalg import QMat, vec_add, vec_scale
from . import poly as P


def _sign(k):
    return -1 if k % 2 else 1


# ---------------------------------------------------------------------------
# element level


class Forms:
    """Element-level arithmetic in Omega A for a FinDimAlgebra."""

    def __init__(self, A):
        self.A = A
        self.N = A.N
        self._rm = {}

    # products ------------------------------------------------------------
    def rmul_key(self, key, j):
        """(a0 da1 ... dan) * a_j in the left-module basis.

        Uses (alpha da) b = alpha d(ab) - (alpha a) db."""
        ck = (key, j)
        hit = self._rm.get(ck)
        if hit is not None:
            return hit
        A = self.A
        n = len(key) - 1
        out = {}
        if n == 0:
            for k, c in A.mult[key[0]][j]:
                out[(k,)] = c
        else:
            alpha, an = key[:-1], key[-1]
            for k, c in A.mult[an][j]:
                if k:
                    vec_add(out, {alpha + (k,): c})
            if j:
                for k2, c2 in self.rmul_key(alpha, an).items():
                    vec_add(out, {k2 + (j,): -c2})
        self._rm[ck] = out
        return out

    def rmul(self, form, j):
        out = {}
        for key, c in form.items():
            for k2, c2 in self.rmul_key(key, j).items():
                vec_add(out, {k2: c * c2})
        return out

    def rmul_elem(self, form, a):
        out = {}
        for j, c in a.items():
            vec_add(out, vec_scale(self.rmul(form, j), c))
        return out

    def lmul(self, j, form):
        A = self.A
        out = {}
        for key, c in form.items():
            for k, c2 in A.mult[j][key[0]]:
                vec_add(out, {(k,) + key[1:]: c * c2})
        return out

    def lmul_elem(self, a, form):
        out = {}
        for j, c in a.items():
            vec_add(out, vec_scale(self.lmul(j, form), c))
        return out

    def mul(self, u, v):
        """Product of forms in the DG algebra Omega A."""
        out = {}
        for kv, cv in v.items():
            left = self.rmul(u, kv[0])
            for k, c in left.items():
                vec_add(out, {k + kv[1:]: c * cv})
        return out

    # operators -----------------------------------------------------------
    def d(self, form):
        out = {}
        for key, c in form.items():
            if key[0]:
                vec_add(out, {(0,) + key: c})
        return out

    def b(self, form):
        """b(alpha da) = (-1)^(n-1) (alpha a - a alpha), alpha of degree n-1."""
        out = {}
        for key, c in form.items():
            n = len(key) - 1
            if n == 0:
                continue
            alpha = {key[:-1]: 1}
            a = key[-1]
            s = _sign(n - 1) * c
            vec_add(out, vec_scale(self.rmul(alpha, a), s))
            vec_add(out, vec_scale(self.lmul(a, alpha), -s))
        return out

    def kappa(self, form):
        """kappa(alpha da) = (-1)^(deg alpha) da alpha; identity on degree 0."""
        out = {}
        for key, c in form.items():
            n = len(key) - 1
            if n == 0:
                vec_add(out, {key: c})
                continue
            s = _sign(n - 1) * c
            vec_add(out, vec_scale(self.mul({(0, key[-1]): 1}, {key[:-1]: 1}), s))
        return out

    def power(self, op, form, k):
        for _ in range(k):
            form = op(form)
        return form

    def B(self, form):
        """Connes' operator: sum_{i=0}^{n} kappa^i d on degree n."""
        out = {}
        for key, c in form.items():
            n = len(key) - 1
            cur = self.d({key: c})
            for _ in range(n + 1):
                vec_add(out, cur)
                cur = self.kappa(cur)
        return out

    def iota_delta(self, form):
        """Reduced contraction with Delta, as (1 + kappa + ... + kappa^(n-1)) b."""
        out = {}
        for key, c in form.items():
            n = len(key) - 1
            cur = self.b({key: c})
            for _ in range(n):
                vec_add(out, cur)
                cur = self.kappa(cur)
        return out

    def iota_delta_explicit(self, form):
        """Closed formula: sum_k (-1)^((k-1)(n-1)+1) [a_k, X_k] with
        X_k = (da_{k+1} ... da_n) a_0 da_1 ... da_{k-1}."""
        out = {}
        for key, c in form.items():
            n = len(key) - 1
            for k in range(1, n + 1):
                X = self.mul({(0,) + key[k + 1:]: 1}, {(key[0],) + key[1:k]: 1})
                s = _sign((k - 1) * (n - 1) + 1) * c
                vec_add(out, vec_scale(self.lmul(key[k], X), s))
                vec_add(out, vec_scale(self.rmul(X, key[k]), -s))
        return out

    def one_forms(self, key):
        """Factor a0 da1 ... dan as the product (a0 da1) da2 ... dan."""
        return [{(key[0], key[1]): 1}] + [{(0, t): 1} for t in key[2:]]

    def iota_theta(self, form, theta):
        """Reduced contraction with a double derivation.

        ``theta`` maps a basis index to {(u, v): c} in A (x) A.  For the
        k-th 1-form slot with Theta(a_k) = sum u (x) v the term is
        v X_k u, where X_k is the cyclically rotated rest of the form, with
        the same signs as the closed formula for Delta."""
        out = {}
        for key, c in form.items():
            n = len(key) - 1
            for k in range(1, n + 1):
                X = self.mul({(0,) + key[k + 1:]: 1}, {(key[0],) + key[1:k]: 1})
                s = _sign((k - 1) * (n - 1) + 1) * c
                for (u, v), cc in theta.get(key[k], {}).items():
                    term = self.rmul(self.lmul(v, X), u)
                    vec_add(out, vec_scale(term, s * cc))
        return out

    def lie_theta(self, form, theta):
        """L_Theta = d iota_Theta + iota_Theta d."""
        out = self.d(self.iota_theta(form, theta))
        vec_add(out, self.iota_theta(self.d(form), theta))
        return out


def reduced(form):
    """Image in the reduced complex: drop the unit in degree 0."""
    return {k: c for k, c in form.items() if not (len(k) == 1 and k[0] == 0)}


def key_str(A, key):
    parts = []
    if key[0] != 0 or len(key) == 1:
        parts.append(A.labels[key[0]])
    parts += [f"d({A.labels[t]})" for t in key[1:]]
    return " ".join(parts)


def form_str(A, form):
    if not form:
        return "0"
    items = []
    for key in sorted(form, key=lambda k: (len(k), k)):
        c = Fraction(form[key])
        items.append(f"{c}*{key_str(A, key)}" if c != 1 else key_str(A, key))
    return " + ".join(items)


def form_records(A, form):
    """Serialization: [coefficient, a0 label, [tail labels]]."""
    return [[str(Fraction(c)), A.labels[k[0]], [A.labels[t] for t in k[1:]]]
            for k, c in sorted(form.items())]


# ---------------------------------------------------------------------------
# vectorized builders


class Batch:
    """Terms (src, key, coef) of a linear map; values are coef / den."""

    __slots__ = ("src", "keys", "coef", "den")

    def __init__(self, src, keys, coef, den=1):
        self.src = src
        self.keys = keys
        self.coef = coef
        self.den = den

    @classmethod
    def identity(cls, keys):
        T = keys.shape[0]
        return cls(np.arange(T, dtype=np.int64), keys, np.ones(T, dtype=np.int64))

    @staticmethod
    def concat(batches, width):
        batches = [b for b in batches if b is not None]
        if not batches:
            return Batch(np.zeros(0, np.int64), np.zeros((0, width), np.int64),
                         np.zeros(0, np.int64))
        den = batches[0].den
        for b in batches:
            if b.den != den:
                raise ValueError("mixed denominators")
        return Batch(np.concatenate([b.src for b in batches]),
                     np.concatenate([b.keys for b in batches]),
                     np.concatenate([b.coef for b in batches]), den)


class VecOps:
    """numpy kernels over arrays of basis keys."""

    def __init__(self, A):
        self.A = A
        self.N = A.N
        self.M = A.N - 1
        self.ptr, self.K, self.C, self.scale = A.tables()
        self.W = np.array(A.weights if A.weights is not None else [0] * A.N, dtype=np.int64)

    # index bookkeeping ----------------------------------------------------
    def dim(self, n):
        return self.N * self.M ** n

    def edim(self, n):
        return self.M ** n

    def index(self, keys):
        n = keys.shape[1] - 1
        M = self.M
        idx = keys[:, 0].astype(np.int64) * (M ** n)
        for i in range(1, n + 1):
            idx = idx + (keys[:, i] - 1) * (M ** (n - i))
        return idx

    def keys(self, n, exact=False):
        """All keys of Omega^n (or of E^n when exact) in index order."""
        M = self.M
        total = self.edim(n) if exact else self.dim(n)
        ar = np.arange(total, dtype=np.int64)
        out = np.zeros((total, n + 1), dtype=np.int64)
        rest = ar
        for i in range(n, 0, -1):
            out[:, i] = rest % M + 1 if M else 0
            rest = rest // M if M else rest
        out[:, 0] = rest
        return out

    def weights(self, keys):
        return self.W[keys].sum(axis=1)

    # products ---------------------------------------------------------------
    def mul(self, a, b):
        """Expand products e_a e_b: returns (row, k, c) with row indexing a."""
        cell = a * self.N + b
        start = self.ptr[cell]
        cnt = self.ptr[cell + 1] - start
        total = int(cnt.sum())
        row = np.repeat(np.arange(len(a), dtype=np.int64), cnt)
        if total == 0:
            z = np.zeros(0, np.int64)
            return row, z, z
        base = np.repeat(start - np.cumsum(cnt) + cnt, cnt)
        off = base + np.arange(total, dtype=np.int64)
        return row, self.K[off], self.C[off]

    def rmul(self, keys, j):
        """Terms of key * e_j; returns (row, newkeys, coef), one product each."""
        m = keys.shape[1] - 1
        if m == 0:
            row, k, c = self.mul(keys[:, 0], j)
            return row, k[:, None], c
        alpha, am = keys[:, :m], keys[:, m]
        r1, k1, c1 = self.mul(am, j)
        keep = k1 != 0
        r1, k1, c1 = r1[keep], k1[keep], c1[keep]
        nk1 = np.column_stack([alpha[r1], k1])
        sel = np.nonzero(j != 0)[0]
        r2, nk2, c2 = self.rmul(alpha[sel], am[sel])
        r2 = sel[r2]
        nk2 = np.column_stack([nk2, j[r2]])
        return (np.concatenate([r1, r2]), np.concatenate([nk1, nk2]),
                np.concatenate([c1, -c2]))

    def lmul(self, j, keys):
        row, k, c = self.mul(j, keys[:, 0])
        return row, np.column_stack([k, keys[row, 1:]]), c

    # operators on batches of basis keys -------------------------------------
    def d(self, keys):
        sel = np.nonzero(keys[:, 0] != 0)[0]
        nk = np.column_stack([np.zeros(len(sel), np.int64), keys[sel]])
        return Batch(sel, nk, np.ones(len(sel), np.int64))

    def b(self, keys):
        n = keys.shape[1] - 1
        if n == 0:
            return Batch.concat([], 1)
        parts = []
        r, k, c = self.mul(keys[:, 0], keys[:, 1])
        parts.append(Batch(r, np.column_stack([k, keys[r, 2:]]), c))
        for i in range(1, n):
            r, k, c = self.mul(keys[:, i], keys[:, i + 1])
            keep = k != 0
            r, k, c = r[keep], k[keep], c[keep]
            nk = np.column_stack([keys[r, :i], k, keys[r, i + 2:]])
            parts.append(Batch(r, nk, _sign(i) * c))
        r, k, c = self.mul(keys[:, n], keys[:, 0])
        parts.append(Batch(r, np.column_stack([k, keys[r, 1:n]]), _sign(n) * c))
        out = Batch.concat(parts, n)
        out.den = self.scale
        return out

    def kappa(self, keys):
        n = keys.shape[1] - 1
        if n == 0:
            out = Batch.identity(keys)
            out.coef = out.coef * self.scale
            out.den = self.scale
            return out
        s = _sign(n - 1)
        r, k, c = self.mul(keys[:, n], keys[:, 0])
        keep = k != 0
        r, k, c = r[keep], k[keep], c[keep]
        t1 = Batch(r, np.column_stack([np.zeros(len(r), np.int64), k, keys[r, 1:n]]), s * c)
        sel = np.nonzero(keys[:, 0] != 0)[0]
        nk = np.column_stack([keys[sel, n], keys[sel, 0], keys[sel, 1:n]])
        t2 = Batch(sel, nk, np.full(len(sel), -s * self.scale, np.int64))
        out = Batch.concat([t1, t2], n + 1)
        out.den = self.scale
        return out

    def iota_explicit(self, keys):
        n = keys.shape[1] - 1
        parts = []
        for k in range(1, n + 1):
            ex = np.column_stack([np.zeros(len(keys), np.int64), keys[:, k + 1:]])
            r0, x0, c0 = self.rmul(ex, keys[:, 0])
            X = np.column_stack([x0, keys[r0, 1:k]])
            ak = keys[r0, k]
            s = _sign((k - 1) * (n - 1) + 1)
            r1, y1, c1 = self.lmul(ak, X)
            parts.append(Batch(r0[r1], y1, s * c0[r1] * c1))
            r2, y2, c2 = self.rmul(X, ak)
            parts.append(Batch(r0[r2], y2, -s * c0[r2] * c2))
        out = Batch.concat(parts, n)
        out.den = self.scale ** 2
        return out

    def homotopy_d(self, keys):
        """k(da1 da2 ... dan) = a1 da2 ... dan, and 0 when a0 is not the unit."""
        sel = np.nonzero(keys[:, 0] == 0)[0]
        return Batch(sel, keys[sel, 1:], np.ones(len(sel), np.int64))

    # assembly ----------------------------------------------------------------
    def to_qmat(self, batch, nrows, ncols, row_index=None):
        if row_index is None:
            rows = self.index(batch.keys) if len(batch.src) else np.zeros(0, np.int64)
        else:
            rows = row_index(batch.keys)
        if len(rows) and (rows.min() < 0 or rows.max() >= nrows):
            raise ValueError("image escapes the target space")
        return QMat.from_triplets(rows, batch.src, batch.coef, (nrows, ncols), batch.den)


class OperatorCache:
    """Memoized full-degree operator matrices for one algebra.

    Spaces: ``("O", n)`` = Omega^n and ``("E", n)`` = E^n = dOmega^(n-1)
    + ... (keys with unit a0).  Matrices are built once and shared; the
    contract is that concurrent builders produce identical matrices.
    """

    def __init__(self, A):
        self.A = A
        self.v = VecOps(A)
        self.cache = {}

    def _get(self, name, n, build):
        key = (name, n)
        hit = self.cache.get(key)
        if hit is None:
            hit = build()
            self.cache[key] = hit
        return hit

    def dim(self, space, n):
        return self.v.edim(n) if space == "E" else self.v.dim(n)

    def keys(self, space, n):
        return self._get("keys" + space, n, lambda: self.v.keys(n, exact=(space == "E")))

    def d(self, n):
        """d: Omega^n -> E^(n+1)."""
        def build():
            ks = self.keys("O", n)
            return self.v.to_qmat(self.v.d(ks), self.dim("E", n + 1), len(ks))
        return self._get("d", n, build)

    def d_on_E(self, n):
        """d restricted to E^n (identically zero, computed honestly)."""
        def build():
            ks = self.keys("E", n)
            return self.v.to_qmat(self.v.d(ks), self.dim("E", n + 1), len(ks))
        return self._get("dE", n, build)

    def d_full(self, n):
        """d: Omega^n -> Omega^(n+1)."""
        return self._get("dfull", n, lambda: self.d(n).pad_rows(self.dim("O", n + 1)))

    def b(self, n):
        def build():
            ks = self.keys("O", n)
            if n == 0:
                return QMat.zeros((0, len(ks)))
            return self.v.to_qmat(self.v.b(ks), self.dim("O", n - 1), len(ks))
        return self._get("b", n, build)

    def b_on_E(self, n):
        """b: E^n -> Omega^(n-1)."""
        def build():
            ks = self.keys("E", n)
            return self.v.to_qmat(self.v.b(ks), self.dim("O", n - 1), len(ks))
        return self._get("bE", n, build)

    def kappa(self, n):
        def build():
            ks = self.keys("O", n)
            return self.v.to_qmat(self.v.kappa(ks), self.dim("O", n), len(ks))
        return self._get("kappa", n, build)

    def kappa_on_E(self, n):
        def build():
            ks = self.keys("E", n)
            return self.v.to_qmat(self.v.kappa(ks), self.dim("E", n), len(ks))
        return self._get("kappaE", n, build)

    def kappa_power(self, n, k, exact=False):
        name = "kpowE" if exact else "kpow"
        def build():
            base = self.kappa_on_E(n) if exact else self.kappa(n)
            if k == 0:
                return QMat.identity(base.shape[0])
            return self.kappa_power(n, k - 1, exact) @ base
        return self._get((name, k), n, build)

    def norm_sum(self, n, terms, exact=False):
        """1 + kappa + ... + kappa^(terms-1) on Omega^n (or E^n)."""
        def build():
            acc = QMat.identity(self.dim("E" if exact else "O", n))
            for k in range(1, terms):
                acc = acc + self.kappa_power(n, k, exact)
            return acc
        return self._get(("nsum", terms, exact), n, build)

    def B(self, n):
        """Connes' operator Omega^n -> E^(n+1)."""
        return self._get("B", n, lambda: self.norm_sum(n + 1, n + 1, exact=True) @ self.d(n))

    def B_on_E(self, n):
        return self._get("BE", n, lambda: self.norm_sum(n + 1, n + 1, exact=True) @ self.d_on_E(n))

    def iota(self, n):
        """iota_Delta: Omega^n -> Omega^(n-1) via (1 + ... + kappa^(n-1)) b."""
        def build():
            if n == 0:
                return QMat.zeros((0, self.dim("O", 0)))
            return self.norm_sum(n - 1, n) @ self.b(n)
        return self._get("iota", n, build)

    def iota_on_E(self, n):
        return self._get("iotaE", n, lambda: self.norm_sum(n - 1, n) @ self.b_on_E(n))

    def iota_explicit(self, n):
        def build():
            ks = self.keys("O", n)
            if n == 0:
                return QMat.zeros((0, len(ks)))
            return self.v.to_qmat(self.v.iota_explicit(ks), self.dim("O", n - 1), len(ks))
        return self._get("iotaX", n, build)

    def homotopy_d(self, n):
        """Contracting homotopy for d: Omega^n -> Omega^(n-1) (n >= 1)."""
        def build():
            ks = self.keys("O", n)
            return self.v.to_qmat(self.v.homotopy_d(ks), self.dim("O", n - 1), len(ks))
        return self._get("hd", n, build)

    def poly_kappa(self, n, coeffs, exact=False):
        """Evaluate a polynomial (list of Fractions, low degree first) at kappa."""
        acc = None
        for k, c in enumerate(coeffs):
            if c == 0:
                continue
            term = self.kappa_power(n, k, exact).scale(c)
            acc = term if acc is None else acc + term
        if acc is None:
            acc = QMat.zeros((self.dim("E" if exact else "O", n),) * 2)
        return acc

    def harmonic(self, n, exact=False):
        """Projector P onto Ker(1-kappa)^2 along Im(1-kappa)^2."""
        def build():
            if n == 0:
                return QMat.identity(self.dim("E" if exact else "O", 0))
            return self.poly_kappa(n, P.harmonic_poly(n), exact)
        return self._get(("P", exact), n, build)

    def harmonic_perp(self, n, exact=False):
        def build():
            return QMat.identity(self.dim("E" if exact else "O", n)) - self.harmonic(n, exact)
        return self._get(("Pperp", exact), n, build)

    def b_homotopy(self, n):
        """H_n = d U_n(kappa) P_perp: a contraction of (P_perp Omega, b)."""
        def build():
            if n == 0:
                return QMat.zeros((self.dim("E", 1), self.dim("O", 0)))
            U = self.poly_kappa(n, P.inverse_one_minus(n))
            return self.d(n) @ U @ self.harmonic_perp(n)
        return self._get("Hb", n, build)


def degree_factorial(n):
    return factorial(n)


# single-call conveniences


def karoubi(A, form):
    """kappa on a form over A."""
    return Forms(A).kappa(form)


def connes_B(A, form):
    """Connes' B = (1 + kappa + ... + kappa^n) d on a degree-n form."""
    return Forms(A).B(form)


def harmonic_projector(A, n, exact=False, oc=None):
    """Matrix of P on Omega^n (on E^n with ``exact``)."""
    return (oc or OperatorCache(A)).harmonic(n, exact)
