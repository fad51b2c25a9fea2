"""Evaluation of noncommutative forms on representation spaces of free algebras.

For A free on generators a, the scheme Rep(A, V) is the affine space of
tuples of dim V x dim V matrices.  Forms on it (tensored with functions on
g = gl(V)) form a supercommutative algebra generated by the entries x^a_ij
(even), their differentials dx^a_ij (odd) and the coordinates g_ij (even).

Relative forms on A_t = A * k[t] are, for free A, the free graded algebra
on the letters a, t (even) and da (odd); a form is a dict word -> coefficient
with words tuples of letter strings like ("x", "t", "dy").
"""

from fractions import Fraction
from itertools import product

from .linalg import vec_add


# ---------------------------------------------------------------------------
# supercommutative polynomials


def _sort_odd(odds):
    """Sort a tuple of odd variables; returns (sign, sorted) or (0, None)."""
    if len(odds) < 2:
        return 1, tuple(odds)
    if len(odds) == 2:
        a, b = odds
        if a < b:
            return 1, (a, b)
        return (-1, (b, a)) if a > b else (0, None)
    arr = list(odds)
    sign = 1
    for i in range(1, len(arr)):
        j = i
        while j > 0 and arr[j - 1] > arr[j]:
            arr[j - 1], arr[j] = arr[j], arr[j - 1]
            sign = -sign
            j -= 1
    for i in range(1, len(arr)):
        if arr[i] == arr[i - 1]:
            return 0, None
    return sign, tuple(arr)


class SPoly:
    """Element of k[even vars] (x) Lambda[odd vars]; keys (evens, odds).

    ``evens`` is a sorted tuple with repetition, ``odds`` strictly increasing.
    """

    __slots__ = ("t",)

    def __init__(self, terms=None):
        self.t = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def const(cls, c):
        return cls({((), ()): c})

    @classmethod
    def even(cls, v):
        return cls({((v,), ()): 1})

    @classmethod
    def odd(cls, v):
        return cls({((), (v,)): 1})

    def __add__(self, other):
        out = dict(self.t)
        vec_add(out, other.t)
        return SPoly(out)

    def __sub__(self, other):
        out = dict(self.t)
        vec_add(out, other.t, -1)
        return SPoly(out)

    def __neg__(self):
        return SPoly({k: -v for k, v in self.t.items()})

    def scale(self, c):
        return SPoly({k: c * v for k, v in self.t.items()})

    def __mul__(self, other):
        out = {}
        for (e1, o1), c1 in self.t.items():
            for (e2, o2), c2 in other.t.items():
                sign, odds = _sort_odd(o1 + o2)
                if not sign:
                    continue
                key = (tuple(sorted(e1 + e2)), odds)
                vec_add(out, {key: sign * c1 * c2})
        return SPoly(out)

    def __eq__(self, other):
        return isinstance(other, SPoly) and self.t == other.t

    def __bool__(self):
        return bool(self.t)

    def degree_parts(self):
        return sorted({len(o) for (_, o) in self.t})

    def __repr__(self):
        return f"SPoly({len(self.t)} terms)"


def _mat_mul(P, Q):
    n = len(P)
    return [[_sum(P[i][k] * Q[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def _sum(items):
    acc = {}
    for x in items:
        vec_add(acc, x.t)
    return SPoly(acc)


def _trace(P):
    return _sum(P[i][i] for i in range(len(P)))


# ---------------------------------------------------------------------------
# the representation space


class RepScheme:
    """Variables of Rep(A, V) x g for free A on ``names`` and dim V = n."""

    def __init__(self, names, dimV):
        if dimV < 1:
            raise ValueError("dim V must be positive")
        self.names = list(names)
        self.n = int(dimV)
        self.var = {}
        self.labels = []
        for a in self.names:
            for i in range(self.n):
                for j in range(self.n):
                    self._new(("x", a, i, j))
        for i in range(self.n):
            for j in range(self.n):
                self._new(("g", i, j))
        # odd variables get their own index range
        self.ovar = {}
        self.olabels = []
        for a in self.names:
            for i in range(self.n):
                for j in range(self.n):
                    self.ovar[("dx", a, i, j)] = len(self.olabels)
                    self.olabels.append(("dx", a, i, j))

    def _new(self, label):
        self.var[label] = len(self.labels)
        self.labels.append(label)

    def matrix(self, letter):
        """Generic matrix of a letter: a, 't' or 'd'+a."""
        n = self.n
        if letter == "t":
            return [[SPoly.even(self.var[("g", i, j)]) for j in range(n)] for i in range(n)]
        if letter.startswith("d") and letter[1:] in self.names:
            a = letter[1:]
            return [[SPoly.odd(self.ovar[("dx", a, i, j)]) for j in range(n)] for i in range(n)]
        if letter in self.names:
            return [[SPoly.even(self.var[("x", letter, i, j)]) for j in range(n)] for i in range(n)]
        raise ValueError(f"unknown letter {letter!r}")

    def identity(self):
        n = self.n
        return [[SPoly.const(1) if i == j else SPoly() for j in range(n)] for i in range(n)]

    # differential operators on SPoly ------------------------------------
    def d_dr(self, f):
        """de Rham differential in the Rep directions (g-coordinates are constants)."""
        out = {}
        for (evens, odds), c in f.t.items():
            seen = set()
            for v in evens:
                if v in seen:
                    continue
                seen.add(v)
                lab = self.labels[v]
                if lab[0] != "x":
                    continue
                mult = evens.count(v)
                rest = list(evens)
                rest.remove(v)
                ov = self.ovar[("dx",) + lab[1:]]
                sign, new_odds = _sort_odd((ov,) + odds)
                if sign:
                    vec_add(out, {(tuple(rest), new_odds): sign * mult * c})
        return SPoly(out)

    def contract(self, f, r, s):
        """i_e for e = E_rs acting by conjugation: i_e(dX) = [E_rs, X]."""
        out = {}
        for (evens, odds), c in f.t.items():
            for m, ov in enumerate(odds):
                _, a, i, j = self.olabels[ov]
                rest = odds[:m] + odds[m + 1:]
                sign = -1 if m % 2 else 1
                # ([E_rs, X])_ij = delta_ir x_sj - x_ir delta_sj
                terms = []
                if i == r:
                    terms.append((self.var[("x", a, s, j)], 1))
                if j == s:
                    terms.append((self.var[("x", a, i, r)], -1))
                for v, cc in terms:
                    vec_add(out, {(tuple(sorted(evens + (v,))), rest): sign * cc * c})
        return SPoly(out)

    def lie(self, f, r, s):
        return self.d_dr(self.contract(f, r, s)) + self.contract(self.d_dr(f), r, s)

    def d_g(self, f):
        """Equivariant part: sum_rs g_rs * i_{E_rs} f."""
        out = {}
        for r in range(self.n):
            for s in range(self.n):
                g = self.var[("g", r, s)]
                for (evens, odds), c in self.contract(f, r, s).t.items():
                    vec_add(out, {(tuple(sorted(evens + (g,))), odds): c})
        return SPoly(out)

    def check_basic(self, f):
        """Basic = killed by every contraction and Lie derivative along g."""
        for r in range(self.n):
            for s in range(self.n):
                if self.contract(f, r, s):
                    return {"basic": False, "witness": ("contraction", r, s)}
                if self.lie(f, r, s):
                    return {"basic": False, "witness": ("lie", r, s)}
        return {"basic": True, "witness": None}

    def entry(self, label):
        return SPoly.even(self.var[label])

    def d_entry(self, a, i, j):
        return SPoly.odd(self.ovar[("dx", a, i, j)])


# ---------------------------------------------------------------------------
# noncommutative side: forms on A_t as letter words


def _is_odd(letter):
    return letter.startswith("d")


def form_degree(word):
    return sum(1 for l in word if _is_odd(l))


def nc_d(form, names):
    """Relative de Rham differential: a -> da, t -> 0, Koszul signs."""
    out = {}
    for word, c in form.items():
        odd = 0
        for k, l in enumerate(word):
            if l in names:
                vec_add(out, {word[:k] + ("d" + l,) + word[k + 1:]: (-1) ** odd * c})
            elif _is_odd(l):
                odd += 1
    return out


def nc_i_delta(form):
    """Contraction with the distinguished double derivation: da -> t a - a t."""
    out = {}
    for word, c in form.items():
        odd = 0
        for k, l in enumerate(word):
            if _is_odd(l):
                a = l[1:]
                sign = (-1) ** odd * c
                vec_add(out, {word[:k] + ("t", a) + word[k + 1:]: sign})
                vec_add(out, {word[:k] + (a, "t") + word[k + 1:]: -sign})
                odd += 1
    return out


def nc_mul(f, g):
    out = {}
    for u, a in f.items():
        for v, b in g.items():
            vec_add(out, {u + v: a * b})
    return out


def graded_commutator(f, g):
    out = nc_mul(f, g)
    for v, b in g.items():
        for u, a in f.items():
            sign = (-1) ** (form_degree(u) * form_degree(v))
            vec_add(out, {v + u: -sign * a * b})
    return out


def ev_word(R, word):
    M = R.identity()
    for l in word:
        M = _mat_mul(M, R.matrix(l))
    return M


def ev_omega(R, form):
    n = R.n
    acc = [[SPoly() for _ in range(n)] for _ in range(n)]
    for word, c in form.items():
        M = ev_word(R, word)
        acc = [[acc[i][j] + M[i][j].scale(c) for j in range(n)] for i in range(n)]
    return acc


def trace_ev(R, form):
    """(Id (x) Tr) of the evaluation of a form."""
    acc = SPoly()
    for word, c in form.items():
        acc = acc + _trace(ev_word(R, word)).scale(c)
    return acc


def ev_direct(R, word):
    """Entries of the evaluated word as explicit sums over index paths
    (a second route to the matrix product, used as an oracle)."""
    n = R.n
    mats = [R.matrix(l) for l in word]
    out = [[SPoly() for _ in range(n)] for _ in range(n)]
    if not word:
        return R.identity()
    for path in product(range(n), repeat=len(word) + 1):
        term = SPoly.const(1)
        for k, M in enumerate(mats):
            term = term * M[path[k]][path[k + 1]]
            if not term:
                break
        if term:
            out[path[0]][path[-1]] = out[path[0]][path[-1]] + term
    return out


# ---------------------------------------------------------------------------
# sample grids


def sample_words(names, max_t=2, max_odd=2, max_even=2, min_len=1):
    """All letter words with at most max_t t's, max_odd differentials and
    max_even algebra letters."""
    evens = list(names)
    odds = ["d" + a for a in names]
    out = []
    for nt in range(max_t + 1):
        for no in range(max_odd + 1):
            for ne in range(max_even + 1):
                L = nt + no + ne
                if L < min_len:
                    continue
                for kinds in set(_arrangements(["t"] * nt + ["o"] * no + ["e"] * ne)):
                    slots = [odds if k == "o" else evens for k in kinds if k != "t"]
                    for choice in product(*slots):
                        it = iter(choice)
                        out.append(tuple("t" if k == "t" else next(it) for k in kinds))
    return sorted(set(out), key=lambda w: (len(w), w))


def _arrangements(items):
    if not items:
        yield ()
        return
    seen = set()
    for i, x in enumerate(items):
        if x in seen:
            continue
        seen.add(x)
        for rest in _arrangements(items[:i] + items[i + 1:]):
            yield (x,) + rest


# ---------------------------------------------------------------------------
# forms of a findim truncation of the free algebra -> letter words


def key_to_letters(A, key):
    """a_0 da_1 ... da_n (basis indices of a free truncation) as a letter form."""
    names = A.gens.names
    words = [tuple(names[g] for g in A.words[i]) for i in key]
    form = {words[0]: 1}
    for w in words[1:]:
        dw = nc_d({w: 1}, names)
        form = nc_mul(form, dw)
    return form


def vector_to_letters(A, keys, vec):
    out = {}
    for j, c in vec.items():
        vec_add(out, key_to_letters(A, keys[j]), c)
    return out


def kernel_classes(fb, n, w):
    """Representatives in Omega^n of Ker(iota_Delta) on DR^n (one weight block)."""
    from .homology import dr_space
    from .linalg import QMat, kernel
    dim = fb.dim(n, w)
    if not dim:
        return []
    Q = dr_space(fb, n, w)
    if n == 0:
        return [Q.section({p: 1}) for p in range(Q.dim)]
    iota = fb.block("iota", n, w)
    cols = [iota.column(Q.reps[p]) for p in range(Q.dim)]
    if not cols:
        return []
    M = QMat.from_columns(cols, fb.dim(n - 1, w))
    return [Q.section(v) for v in kernel(M)]


# ---------------------------------------------------------------------------
# the theorem checks


def verify_rep_thm(names=("x", "y"), dims=(1, 2), max_t=2, max_odd=2, max_even=2,
                   cap=3, n_max=2):
    """Commutativity of evaluation with the differentials on a sample grid.

    (a) tr ev(d w) = d_DR tr ev(w) and tr ev(i_Delta w) = d_g tr ev(w) for all
        sample words; (d_DR + d_g)^2 = 0 on their images; traces of graded
        commutators vanish; ev agrees with the path-sum oracle.
    (b) for representatives of Ker(iota_Delta) on DR^n of the free algebra
        capped at ``cap``: the traces are basic and tr ev(B w) = (n+1) d_DR tr ev(w).
    """
    names = list(names)
    words = sample_words(names, max_t, max_odd, max_even)
    report = {"grid": {"words": len(words), "max_t": max_t, "max_odd": max_odd,
                       "max_even": max_even, "dims": list(dims)}}
    failures = []
    for n in dims:
        R = RepScheme(names, n)
        cache = {}

        def tr(form):
            acc = SPoly()
            for word, c in form.items():
                if word not in cache:
                    cache[word] = _trace(ev_word(R, word))
                acc = acc + cache[word].scale(c)
            return acc

        for w in words:
            f = {w: 1}
            eta = tr(f)
            if tr(nc_d(f, names)) != R.d_dr(eta):
                failures.append(("d", n, w))
            if tr(nc_i_delta(f)) != R.d_g(eta):
                failures.append(("i_delta", n, w))
            if len(w) > 4:
                continue
            D = lambda z: R.d_dr(z) + R.d_g(z)
            if D(D(eta)):
                failures.append(("square", n, w))
            if ev_word(R, w) != ev_direct(R, w):
                failures.append(("ev", n, w))
        # graded commutators: generators against all sample words
        gens = [(l,) for l in names + ["t"] + ["d" + a for a in names]]
        for g in gens:
            for w in words:
                if len(w) > 3:
                    continue
                if tr(graded_commutator({g: 1}, {w: 1})):
                    failures.append(("commutator", n, g, w))
    report["diagram_ok"] = not failures
    report["failures"] = failures[:10]
    report["kernel_classes"] = verify_hochschild_classes(names, dims, cap, n_max)
    report["ok"] = report["diagram_ok"] and report["kernel_classes"]["ok"]
    return report


def verify_hochschild_classes(names, dims, cap, n_max):
    from .algebra import free_algebra
    from .homology import FormBlocks
    from .forms import Forms
    A = free_algebra(list(names), cap)
    fb = FormBlocks(A)
    F = Forms(A)
    rows = []
    ok = True
    for n in range(n_max + 1):
        for w in range(1, cap + 1):
            keys = fb.keys(n, w)
            for vec in kernel_classes(fb, n, w):
                form = {keys[j]: c for j, c in vec.items()}
                Bform = {}
                for key, c in form.items():
                    vec_add(Bform, F.B({key: 1}), c)
                for dv in dims:
                    R = RepScheme(names, dv)
                    eta = trace_ev(R, _letters_of(A, form))
                    basic = R.check_basic(eta)["basic"]
                    lhs = trace_ev(R, _letters_of(A, Bform))
                    rhs = R.d_dr(eta).scale(n + 1)
                    good = basic and lhs == rhs
                    ok = ok and good
                    rows.append({"n": n, "weight": w, "dimV": dv, "basic": basic,
                                 "B_to_scaled_d": lhs == rhs, "nonzero": bool(eta)})
    return {"ok": ok, "classes": len(rows), "nonzero_images": sum(r["nonzero"] for r in rows),
            "rows": rows}


def _letters_of(A, form):
    out = {}
    for key, c in form.items():
        vec_add(out, key_to_letters(A, key), c)
    return out


def ev(R, word):
    """Matrix of a degree-0 word of the free algebra: the product of generic matrices."""
    for l in word:
        if l not in R.names:
            raise ValueError(f"ev takes words in the generators, got letter {l!r}")
    return ev_word(R, word)
