"""Exact homology of form complexes: Hochschild, de Rham, cyclic windows.

Every graded algebra splits all form spaces by total weight and every
operator here preserves weight, so computations run block by block.  For a
weight-truncated algebra only weights up to the cap are trustworthy; the
reports say which weights were used.
"""

from fractions import Fraction
from itertools import product as iproduct
from math import factorial

import numpy as np

from .forms import OperatorCache, form_records
from .linalg import QMat, Reducer, rank, kernel, solve, block_matrix


class InvariantViolation(RuntimeError):
    """An identity that must hold by construction failed (implementation bug)."""


# ---------------------------------------------------------------------------
# chain complexes


class ChainComplex:
    """Spaces indexed by integer degree, differentials of a fixed direction.

    ``diffs[i]`` maps degree i to degree i + direction.  Missing entries are
    zero maps.  Consecutive composites are checked to vanish on construction.
    """

    def __init__(self, dims, diffs, direction=-1, labels=None, check=True):
        self.dims = dict(dims)
        self.diffs = {}
        self.direction = direction
        self.labels = labels or {}
        for i, m in diffs.items():
            j = i + direction
            if m.shape != (self.dims.get(j, 0), self.dims.get(i, 0)):
                raise ValueError(f"differential at {i} has shape {m.shape}, "
                                 f"expected {(self.dims.get(j, 0), self.dims.get(i, 0))}")
            self.diffs[i] = m
        if check:
            for i, m in self.diffs.items():
                nxt = self.diffs.get(i + direction)
                if nxt is not None and not (nxt @ m).is_zero():
                    raise InvariantViolation(f"d∘d != 0 at degree {i}")

    def out(self, i):
        m = self.diffs.get(i)
        if m is None:
            m = QMat.zeros((self.dims.get(i + self.direction, 0), self.dims.get(i, 0)))
        return m

    def incoming(self, i):
        return self.out(i - self.direction)


def homology(C, degrees=None, representatives=False):
    """Dimensions (and optionally representative cycles) of H(C)."""
    degrees = sorted(C.dims) if degrees is None else degrees
    ranks = {}

    def rk(i):
        if i not in ranks:
            m = C.out(i)
            ranks[i] = rank(m) if m.shape[0] and m.shape[1] else 0
        return ranks[i]

    dims, reps = {}, {}
    for i in degrees:
        n = C.dims.get(i, 0)
        dims[i] = n - rk(i) - rk(i - C.direction)
        if representatives and dims[i]:
            reps[i] = _representatives(C, i)
    return {"dims": dims, "representatives": reps}


def _representatives(C, i):
    red = Reducer(track=False)
    for col in C.incoming(i).int_columns():
        if col:
            red.add(col)
    out = []
    for z in kernel(C.out(i)) if C.dims.get(i, 0) else []:
        if red.add({k: v for k, v in z.items()}) is None:
            out.append(z)
    return out


# ---------------------------------------------------------------------------
# weight blocks of form spaces


class FormBlocks:
    """Weight-block restrictions of the full form operators."""

    def __init__(self, A, oc=None):
        self.A = A
        self.oc = oc or OperatorCache(A)
        self.graded = A.is_graded()
        self._wt = {}
        self._idx = {}

    def weights_of(self, n):
        if n not in self._wt:
            self._wt[n] = self.oc.v.weights(self.oc.keys("O", n))
        return self._wt[n]

    def idx(self, n, w=None, reduced=False):
        key = (n, w, reduced)
        hit = self._idx.get(key)
        if hit is None:
            total = self.oc.dim("O", n)
            if w is None:
                hit = np.arange(total, dtype=np.int64)
                if reduced and n == 0:
                    hit = hit[1:]
            else:
                hit = np.nonzero(self.weights_of(n) == w)[0]
                if reduced and n == 0:
                    hit = hit[hit != 0]
            self._idx[key] = hit
        return hit

    def dim(self, n, w=None, reduced=False):
        if n < 0:
            return 0
        return len(self.idx(n, w, reduced))

    def keys(self, n, w=None, reduced=False):
        return [tuple(int(x) for x in k) for k in self.oc.keys("O", n)[self.idx(n, w, reduced)]]

    def full(self, name, n):
        """Operator on Omega^n as a matrix into the full target Omega^m."""
        oc = self.oc
        if name == "d":
            return oc.d_full(n)
        if name == "B":
            return oc.B(n).pad_rows(oc.dim("O", n + 1))
        if name == "b":
            return oc.b(n)
        if name == "iota":
            return oc.iota(n)
        if name == "kappa":
            return oc.kappa(n)
        if name == "P":
            return oc.harmonic(n)
        if name == "Pperp":
            return oc.harmonic_perp(n)
        if name == "one_minus_kappa":
            return QMat.identity(oc.dim("O", n)) - oc.kappa(n)
        raise KeyError(name)

    SHIFT = {"d": 1, "B": 1, "b": -1, "iota": -1, "kappa": 0, "P": 0, "Pperp": 0,
             "one_minus_kappa": 0}

    def block(self, name, n, w=None, reduced=False):
        m = n + self.SHIFT[name]
        cols = self.idx(n, w, reduced)
        if m < 0:
            return QMat.zeros((0, len(cols)))
        rows = self.idx(m, w, reduced)
        full = self.full(name, n)
        sub = full.submatrix(rows, cols)
        if w is not None or reduced:
            inside = full.submatrix(np.arange(full.shape[0]), cols)
            if inside.m.nnz != sub.m.nnz:
                if not (reduced and m == 0):
                    raise InvariantViolation(f"{name} leaves the weight block at degree {n}")
        return sub

    def weight_range(self, n_max, cap=None):
        """Weights carried by Omega^0..Omega^n_max (restricted to the cap)."""
        ws = set()
        for n in range(n_max + 1):
            ws.update(int(x) for x in np.unique(self.weights_of(n)))
        if cap is not None:
            ws = {w for w in ws if w <= cap}
        return sorted(ws)


def trusted_weight_cap(A):
    """Highest weight whose blocks agree with the untruncated algebra."""
    if A.truncated:
        return A.cap
    return None


# ---------------------------------------------------------------------------
# Hochschild homology


def hochschild(A, n_max, blocks=None):
    """HH_n(A) for n <= n_max as homology of (Omega A, b), plus the bar oracle."""
    fb = blocks or FormBlocks(A)
    cap = trusted_weight_cap(A)
    weights = fb.weight_range(n_max + 1, cap) if fb.graded else [None]
    per_weight = {}
    total = [0] * (n_max + 1)
    for w in weights:
        dims = {n: fb.dim(n, w) for n in range(n_max + 2)}
        diffs = {n: fb.block("b", n, w) for n in range(1, n_max + 2)}
        C = ChainComplex(dims, diffs, -1)
        h = homology(C, list(range(n_max + 1)))["dims"]
        per_weight[w] = [h[n] for n in range(n_max + 1)]
        for n in range(n_max + 1):
            total[n] += h[n]
    oracle = bar_hochschild(A, n_max, weights if fb.graded else None)
    return {
        "dims": total,
        "per_weight": per_weight,
        "weights": weights if fb.graded else "all",
        "truncated": bool(A.truncated),
        "bar_dims": oracle["dims"],
        "agree": oracle["dims"] == total,
    }


def _tensor_basis(A, length, w):
    """Tuples of basis indices of A of the given length and total weight w."""
    N = A.N
    if w is None:
        return list(iproduct(range(N), repeat=length))
    W = A.weights
    by_w = {}
    for i in range(N):
        by_w.setdefault(W[i], []).append(i)
    out = []

    def rec(prefix, left, k):
        if k == 0:
            if left == 0:
                out.append(tuple(prefix))
            return
        for ww, idxs in by_w.items():
            if ww <= left:
                for i in idxs:
                    prefix.append(i)
                    rec(prefix, left - ww, k - 1)
                    prefix.pop()

    rec([], w, length)
    return sorted(out)


def bar_complex_b(A, n, w):
    """Unnormalized Hochschild boundary C_n -> C_(n-1), C_n = A^(x)(n+1)."""
    src = _tensor_basis(A, n + 1, w)
    tgt = _tensor_basis(A, n, w)
    index = {t: i for i, t in enumerate(tgt)}
    cols = []
    for a in src:
        col = {}
        for i in range(n):
            for k, c in A.mul_basis(a[i], a[i + 1]).items():
                t = a[:i] + (k,) + a[i + 2:]
                r = index[t]
                col[r] = col.get(r, 0) + (-1) ** i * c
        for k, c in A.mul_basis(a[n], a[0]).items():
            t = (k,) + a[1:n]
            r = index[t]
            col[r] = col.get(r, 0) + (-1) ** n * c
        cols.append({r: v for r, v in col.items() if v})
    return QMat.from_columns(cols, len(tgt)), src, tgt


def bar_hochschild(A, n_max, weights=None):
    """HH from the bar complex, built without any form machinery."""
    total = [0] * (n_max + 1)
    per_weight = {}
    for w in (weights if weights is not None else [None]):
        dims = {n: len(_tensor_basis(A, n + 1, w)) for n in range(n_max + 2)}
        diffs = {n: bar_complex_b(A, n, w)[0] for n in range(1, n_max + 2)}
        h = homology(ChainComplex(dims, diffs, -1), list(range(n_max + 1)))["dims"]
        per_weight[w] = [h[n] for n in range(n_max + 1)]
        for n in range(n_max + 1):
            total[n] += h[n]
    return {"dims": total, "per_weight": per_weight}


# ---------------------------------------------------------------------------
# quotients: natural forms and de Rham


class QuotientSpace:
    """Ambient space modulo a relation subspace, with a coordinate section.

    Representatives are the standard basis vectors outside the pivot set of
    the echelonized relations; ``project`` reduces and reads off those
    coordinates, ``section`` embeds coordinates back."""

    def __init__(self, dim, relations, label=""):
        self.label = label
        self.ambient_dim = dim
        self.red = Reducer(track=False)
        for r in relations:
            if r:
                self.red.add(r)
        self.reps = [i for i in range(dim) if i not in self.red.pivots]
        self._pos = {i: p for p, i in enumerate(self.reps)}

    @property
    def dim(self):
        return len(self.reps)

    def project(self, vec):
        """Coordinates of the class of ``vec`` on the representative basis."""
        vec = {i: Fraction(v) for i, v in vec.items() if v}
        pivots = self.red.pivots
        while True:
            hits = [i for i in vec if i in pivots]
            if not hits:
                break
            c = min(hits)
            pvec = pivots[c][0]
            f = vec[c] / pvec[c]
            for k, v in pvec.items():
                x = vec.get(k, 0) - f * v
                if x:
                    vec[k] = x
                else:
                    vec.pop(k, None)
        return {self._pos[i]: v for i, v in sorted(vec.items())}

    def section(self, coords):
        return {self.reps[p]: Fraction(v) for p, v in coords.items() if v}

    def contains(self, vec):
        return self.red.contains(vec)


def natural_quotient(fb, n, w=None):
    """Omega^n_nat = Omega^n / b Omega^(n+1), checked against [A, Omega^n]."""
    rel = fb.block("b", n + 1, w).columns()
    Q = QuotientSpace(fb.dim(n, w), rel, label=f"Omega^{n}_nat")
    comm = commutator_relations(fb, n, w)
    same = (rank(rel + comm) == rank(rel) == rank(comm)) if (rel or comm) else True
    return Q, same


def commutator_relations(fb, n, w=None):
    """Span of a*omega - omega*a for basis a in A and omega in Omega^n (block w)."""
    from .forms import Forms
    A = fb.A
    F = Forms(A)
    index = {k: i for i, k in enumerate(fb.keys(n, w))}
    out = []
    for a in range(1, A.N):
        if w is None or not fb.graded:
            src = fb.keys(n)
        elif w - A.weights[a] >= 0:
            src = fb.keys(n, w - A.weights[a])
        else:
            src = []
        for key in src:
            vec = F.lmul(a, {key: 1})
            for k, c in F.rmul({key: 1}, a).items():
                vec[k] = vec.get(k, 0) - c
            out.append({index[k]: v for k, v in vec.items() if v})
    return out


def dr_relations(fb, n, w=None):
    """Columns spanning b Omega^(n+1) + (1 - kappa) Omega^n in a block."""
    return fb.block("b", n + 1, w).columns() + fb.block("one_minus_kappa", n, w).columns()


def dr_space(fb, n, w=None):
    return QuotientSpace(fb.dim(n, w), dr_relations(fb, n, w), label=f"DR^{n}")


def graded_commutators(fb, n, w=None):
    """Brute-force span of super-commutators [omega, eta], omega in A or dA.

    Independent of kappa and b: every graded commutator in Omega is a sum of
    commutators with generators a and da, by the super Jacobi identity."""
    from .forms import Forms
    A = fb.A
    F = Forms(A)
    keys = fb.keys(n, w)
    index = {k: i for i, k in enumerate(keys)}
    out = []

    def push(vec):
        col = {}
        for k, c in vec.items():
            if k not in index:
                raise InvariantViolation("commutator left the weight block")
            col[index[k]] = c
        out.append(col)

    for a in range(1, A.N):
        wa = A.weights[a] if fb.graded and w is not None else None
        # [a, omega], omega of degree n
        src = fb.keys(n, w - wa) if wa is not None else (fb.keys(n) if w is None else [])
        for key in src:
            vec = F.lmul(a, {key: 1})
            for k, c in F.rmul({key: 1}, a).items():
                vec[k] = vec.get(k, 0) - c
            push({k: v for k, v in vec.items() if v})
        # [da, eta], eta of degree n-1, sign (-1)^(n-1)
        if n >= 1:
            src = fb.keys(n - 1, w - wa) if wa is not None else (fb.keys(n - 1) if w is None else [])
            for key in src:
                da = {(0, a): 1}
                vec = F.mul(da, {key: 1})
                s = -1 if (n - 1) % 2 else 1
                for k, c in F.mul({key: 1}, da).items():
                    vec[k] = vec.get(k, 0) - s * c
                push({k: v for k, v in vec.items() if v})
    return out


def dr_dims_by_commutators(fb, n, w=None):
    return fb.dim(n, w) - rank(graded_commutators(fb, n, w))


def hh_kernel_iota(A, n, blocks=None):
    """dim Ker(iota_Delta: DR^n -> Omega^(n-1)), summed over trusted weights."""
    fb = blocks or FormBlocks(A)
    cap = trusted_weight_cap(A)
    weights = fb.weight_range(n + 1, cap) if fb.graded else [None]
    total = 0
    per_weight = {}
    for w in weights:
        dim = fb.dim(n, w)
        if dim == 0:
            per_weight[w] = 0
            continue
        rel = dr_relations(fb, n, w)
        dr = dim - rank(rel)
        if n == 0:
            k = dr
        else:
            iota = fb.block("iota", n, w)
            # iota must vanish on the relations for the count to make sense
            relm = QMat.from_columns(rel, dim) if rel else QMat.zeros((dim, 0))
            if not (iota @ relm).is_zero():
                raise InvariantViolation("iota_Delta does not descend to DR")
            k = dr - rank(iota)
        per_weight[w] = k
        total += k
    return {"dim": total, "per_weight": per_weight}


def verify_ses(A, n, blocks=None):
    """0 -> HH_n -> DR^n -> [A, Omega^(n-1)]^kappa -> 0 by rank bookkeeping."""
    fb = blocks or FormBlocks(A)
    cap = trusted_weight_cap(A)
    weights = fb.weight_range(n + 1, cap) if fb.graded else [None]
    rows = []
    ok = True
    for w in weights:
        dim = fb.dim(n, w)
        dr = dim - rank(dr_relations(fb, n, w)) if dim else 0
        hh_dims = {m: fb.dim(m, w) for m in (n - 1, n, n + 1) if m >= 0}
        diffs = {m: fb.block("b", m, w) for m in (n, n + 1) if m >= 1}
        hh = homology(ChainComplex(hh_dims, diffs, -1, check=False), [n])["dims"][n]
        # target: (b Omega^n)^kappa inside Omega^(n-1)
        if n >= 1 and fb.dim(n - 1, w):
            bcols = fb.block("b", n, w).columns()
            fix = kernel(fb.block("one_minus_kappa", n - 1, w))
            rb = rank(bcols)
            rk = len(fix)
            rsum = rank(bcols + fix)
            target = rb + rk - rsum
            img = rank(fb.block("iota", n, w))
        else:
            target = img = 0
        good = (dr == hh + target) and (img == target)
        ok &= good
        rows.append({"weight": w, "DR": dr, "HH": hh, "target": target, "image": img,
                     "exact": good})
    return {"n": n, "exact": ok, "blocks": rows}


# ---------------------------------------------------------------------------
# periodic / cyclic windows


def window_spaces(m, D, w, kind):
    """Form degrees j present in total degree m (t has degree 2)."""
    out = []
    for j in range(0, D + 1):
        if (m - j) % 2:
            continue
        if w is not None and j > w:
            continue
        if kind == "cyclic" and j > -m:
            continue
        if kind == "negative" and j < -m:
            continue
        out.append(j)
    return out


class WindowComplex:
    """Truncation of Omega-bar (x) k[t, 1/t] in one weight block.

    variant "Bb": differential B + t b; variant "heart": d + t iota_Delta.
    kind: "periodic", "cyclic" (quotient by the + part) or "negative".
    Degrees are cohomological; homological degree n is cohomological -n.
    """

    def __init__(self, fb, variant, degrees, D, w, kind="periodic"):
        self.fb = fb
        self.variant = variant
        self.D = D
        self.w = w
        self.kind = kind
        self.degrees = list(degrees)
        up, down = ("B", "b") if variant == "Bb" else ("d", "iota")
        self.spaces = {}
        for m in range(min(self.degrees) - 1, max(self.degrees) + 2):
            self.spaces[m] = window_spaces(m, D, w, kind)
        self.dims = {m: sum(fb.dim(j, w, True) for j in js) for m, js in self.spaces.items()}
        self.diffs = {}
        for m in range(min(self.degrees) - 1, max(self.degrees) + 1):
            src, tgt = self.spaces[m], self.spaces[m + 1]
            blocks = {}
            for cj, j in enumerate(src):
                for ri, i in enumerate(tgt):
                    if i == j + 1:
                        blocks[(ri, cj)] = fb.block(up, j, w, True)
                    elif i == j - 1:
                        blocks[(ri, cj)] = fb.block(down, j, w, True)
            self.diffs[m] = block_matrix(blocks, [fb.dim(i, w, True) for i in tgt],
                                         [fb.dim(j, w, True) for j in src])
        self.valid = fb.graded and w is not None and w <= D

    def diagonal(self, m, per_degree):
        """Block-diagonal operator on degree m from per-form-degree matrices."""
        js = self.spaces[m]
        sizes = [self.fb.dim(j, self.w, True) for j in js]
        return block_matrix({(k, k): per_degree(j) for k, j in enumerate(js)}, sizes, sizes)

    def complex(self):
        return ChainComplex(self.dims, self.diffs, +1)

    def homology(self, project=None):
        """dims per degree; with ``project`` = "P" or "Pperp" on that summand."""
        C = self.complex()
        if project is None:
            return homology(C, self.degrees)["dims"]
        proj = {m: self.diagonal(m, lambda j: self.fb.block(project, j, self.w, True))
                for m in range(min(self.degrees) - 1, max(self.degrees) + 2)}
        out = {}
        for m in self.degrees:
            dim = rank(proj[m]) if self.dims[m] else 0
            r_out = rank(self.diffs[m] @ proj[m]) if self.dims[m] and self.dims[m + 1] else 0
            r_in = rank(self.diffs[m - 1] @ proj[m - 1]) if self.dims[m - 1] and self.dims[m] else 0
            out[m] = dim - r_out - r_in
        return out


def _weights_for(fb, D):
    A = fb.A
    if not fb.graded:
        return None
    top = D if not A.truncated else min(D, A.cap)
    return list(range(1, top + 1))


def window_homology(A, variant, window, D, kind="periodic", project=None, blocks=None):
    """Homological degrees n in window = (lo, hi); returns per-degree totals."""
    fb = blocks or FormBlocks(A)
    lo, hi = window
    degrees = [-n for n in range(lo, hi + 1)]
    weights = _weights_for(fb, D)
    if weights is None:
        return {"dims": None, "valid": False, "reason": "algebra is not weight graded"}
    totals = {n: 0 for n in range(lo, hi + 1)}
    per_weight = {}
    for w in weights:
        wc = WindowComplex(fb, variant, degrees, D, w, kind)
        h = wc.homology(project)
        per_weight[w] = {-m: h[m] for m in degrees}
        for m in degrees:
            totals[-m] += h[m]
    return {"dims": totals, "per_weight": per_weight, "weights": weights, "valid": True}


def stable_homology(A, variant, window, D, kind="periodic", project=None, blocks=None):
    fb = blocks or FormBlocks(A)
    h1 = window_homology(A, variant, window, D, kind, project, fb)
    h2 = window_homology(A, variant, window, D + 2, kind, project, fb)
    stable = h1["valid"] and h1["dims"] == h2["dims"]
    return {"dims": h1["dims"], "dims_next": h2["dims"], "stable": stable, "D": D,
            "per_weight": h1.get("per_weight"), "truncated": bool(A.truncated)}


def intertwiner_check(fb, n_max, w=None):
    """N! (d + t iota) = (B + t b) N! on the harmonic part, degree by degree."""
    ok = True
    for j in range(0, n_max + 1):
        if fb.dim(j, w, True) == 0:
            continue
        Pj = fb.block("P", j, w, True)
        # d-part: (j+1)! d P = B j! P
        lhs = fb.block("d", j, w, True).scale(factorial(j + 1)) @ Pj
        rhs = fb.block("B", j, w, True).scale(factorial(j)) @ Pj
        ok &= lhs.equals(rhs)
        if j >= 1:
            lhs = fb.block("iota", j, w, True).scale(factorial(j - 1)) @ Pj
            rhs = fb.block("b", j, w, True).scale(factorial(j)) @ Pj
            ok &= lhs.equals(rhs)
    return ok


def periodic_homology(A, window, D, blocks=None):
    """Both variants of the periodic window, their agreement and N!."""
    fb = blocks or FormBlocks(A)
    bb = stable_homology(A, "Bb", window, D, "periodic", None, fb)
    ht = stable_homology(A, "heart", window, D, "periodic", None, fb)
    weights = _weights_for(fb, D) or []
    inter = all(intertwiner_check(fb, min(D, 4), w) for w in weights)
    return {"Bb": bb, "heart": ht, "agree": bb["dims"] == ht["dims"],
            "stable": bb["stable"] and ht["stable"], "intertwiner": inter}


def cyclic_and_negative(A, window, D, blocks=None):
    """HC, HC^-, their heart variants, and the harmonic comparisons."""
    fb = blocks or FormBlocks(A)
    out = {}
    for kind in ("cyclic", "negative"):
        plain = stable_homology(A, "Bb", window, D, kind, None, fb)
        heart = stable_homology(A, "heart", window, D, kind, None, fb)
        heart_P = stable_homology(A, "heart", window, D, kind, "P", fb)
        plain_perp = stable_homology(A, "Bb", window, D, kind, "Pperp", fb)
        out[kind] = {
            "plain": plain["dims"], "heart": heart["dims"], "heart_P": heart_P["dims"],
            "plain_Pperp": plain_perp["dims"],
            "stable": plain["stable"] and heart_P["stable"],
            "P_matches": heart_P["dims"] == plain["dims"],
            "Pperp_zero": all(v == 0 for v in plain_perp["dims"].values()),
        }
    return out


# ---------------------------------------------------------------------------
# Connes complex oracle for cyclic homology


def connes_cyclic(A, n_max, weights):
    """Reduced HC_n from A^(x)(n+1) / (1 - lambda) with b, weight by weight."""
    totals = [0] * (n_max + 1)
    per_weight = {}
    for w in weights:
        dims, diffs, quots = {}, {}, {}
        for n in range(0, n_max + 2):
            basis = _tensor_basis(A, n + 1, w)
            index = {t: i for i, t in enumerate(basis)}
            rel = []
            sgn = -1 if n % 2 else 1
            for t in basis:
                rot = (t[-1],) + t[:-1]
                col = {index[t]: 1}
                col[index[rot]] = col.get(index[rot], 0) - sgn
                rel.append({k: v for k, v in col.items() if v})
            quots[n] = QuotientSpace(len(basis), rel)
            dims[n] = quots[n].dim
        for n in range(1, n_max + 2):
            bmat, src, _ = bar_complex_b(A, n, w)
            Q, Qt = quots[n], quots[n - 1]
            cols = []
            for r in Q.reps:
                img = bmat.column(r)
                cols.append(Qt.project(img))
            diffs[n] = QMat.from_columns(cols, Qt.dim) if cols else QMat.zeros((Qt.dim, 0))
        h = homology(ChainComplex(dims, diffs, -1), list(range(n_max + 1)))["dims"]
        per_weight[w] = [h[n] for n in range(n_max + 1)]
        for n in range(n_max + 1):
            totals[n] += h[n]
    return {"dims": totals, "per_weight": per_weight}


# ---------------------------------------------------------------------------
# Hodge filtration


def hodge_degree(wc, m, cycle):
    """Largest k with ``cycle`` homologous to a sum over form degrees >= 2k
    (even m) or >= 2k + 1 (odd m), searched by exact solves.

    ``cycle`` is a dict vector on the degree-m space of a heart window."""
    D = wc.diffs[m]
    if not D.apply(cycle) == {}:
        raise ValueError("not a cycle")
    js = wc.spaces[m]
    sizes = [wc.fb.dim(j, wc.w, True) for j in js]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    parity = m % 2
    top = (max(js) - parity) // 2 if js else 0
    prev = wc.diffs[m - 1]
    best = None
    for k in range(top, -1, -1):
        low = [i for jj, j in enumerate(js) if j < 2 * k + parity
               for i in range(offsets[jj], offsets[jj + 1])]
        if not low:
            best = k
            break
        rows = np.array(low, dtype=np.int64)
        sub = prev.submatrix(rows, np.arange(prev.shape[1]))
        pos = {int(r): p for p, r in enumerate(rows)}
        rhs = {pos[i]: v for i, v in cycle.items() if i in pos}
        if not rhs:
            best = k
            break
        if prev.shape[1] and solve(sub, {i: Fraction(v) for i, v in rhs.items()}) is not None:
            best = k
            break
    if best is None:
        best = 0
    zero_class = prev.shape[1] > 0 and solve(prev, {i: Fraction(v) for i, v in cycle.items()}) is not None
    return {"degree": best, "top": top, "zero_class": zero_class or not cycle,
            "clamped": best == top}


# ---------------------------------------------------------------------------
# connected algebras


def _dr_d_rank(fb, n, w):
    """Rank data for d: DR^n -> DR^(n+1) on a weight block."""
    Qs = dr_space(fb, n, w)
    Qt = dr_space(fb, n + 1, w)
    dmat = fb.block("d", n, w)
    cols = [Qt.project(dmat.column(r)) for r in Qs.reps]
    m = QMat.from_columns(cols, Qt.dim) if cols else QMat.zeros((Qt.dim, 0))
    return Qs.dim, Qt.dim, (rank(m) if cols and Qt.dim else 0)


def verify_connected_ham(A, blocks=None):
    """For connected A with H_2(A, A) = 0: the closed 1- and 2-form checks."""
    fb = blocks or FormBlocks(A)
    if not fb.graded:
        return {"verdict": "inapplicable", "reason": "ungraded algebra"}
    cap = trusted_weight_cap(A)
    weights = fb.weight_range(3, cap)
    if A.N == 1:
        return {"verdict": "pass", "reason": "all spaces are zero", "blocks": []}
    hh = hochschild(A, 2, fb)
    rows = []
    connected = True
    for w in weights:
        n0, n1, r0 = _dr_d_rank(fb, 0, w)
        connected &= (n0 - r0 == (1 if w == 0 else 0))
    if not connected:
        return {"verdict": "inapplicable", "reason": "not connected"}
    if hh["dims"][2] != 0:
        return {"verdict": "inapplicable", "reason": "H_2(A, A) != 0", "HH2": hh["dims"][2]}
    from .algebra import commutator_subspace
    ok = True
    for w in weights:
        if w == 0:
            continue
        n0, n1, r0 = _dr_d_rank(fb, 0, w)
        n1b, n2, r1 = _dr_d_rank(fb, 1, w)
        n2b, n3, r2 = _dr_d_rank(fb, 2, w)
        closed1 = n1 - r1
        exact1 = r0
        closed2 = n2 - r2
        comm = len(commutator_subspace(A, w))
        h1 = hh["per_weight"][w][1]
        good = closed1 == exact1 == h1 and closed2 == comm and r1 == closed2
        ok &= good
        rows.append({"weight": w, "closed1": closed1, "exact1": exact1, "HH1": h1,
                     "closed2": closed2, "commutators": comm, "d_onto_closed2": r1 == closed2,
                     "pass": good})
    return {"verdict": "pass" if ok else "fail", "blocks": rows}


def homology_report(fb, n, dim, reps, keys, stable=True):
    """JSON record for one degree."""
    A = fb.A
    return {"degree": n, "dim": dim, "stable": stable,
            "representatives": [form_records(A, {keys[i]: v for i, v in r.items()}) for r in reps]}


def build_window(A, variant, window, D, w=None, kind="periodic", blocks=None):
    """WindowComplex for homological degrees window = (lo, hi); ``w=None``
    takes all weights at once."""
    lo, hi = window
    return WindowComplex(blocks or FormBlocks(A), variant, [-n for n in range(lo, hi + 1)],
                         D, w, kind)
