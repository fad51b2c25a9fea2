"""Presented associative algebras over Q.

Words are tuples of generator indices; ``()`` is the unit monomial.
Noncommutative polynomials are plain dicts ``{word: coefficient}``
wrapped in :class:`NCPoly`.  Rewriting follows the diamond lemma with the
order "total weight first, then lexicographic in generator order".
"""

import json
import os
import re
from fractions import Fraction
from itertools import product as iproduct

import numpy as np

from .linalg import Reducer, as_fraction, normalize_scalar, vec_add

DEFAULT_SIZE_LIMIT = 250000


def size_limit():
    env = os.environ.get("NCDR_SIZE_LIMIT")
    return int(env) if env else DEFAULT_SIZE_LIMIT


class SizeLimitError(RuntimeError):
    pass


class ParseError(ValueError):
    def __init__(self, msg, pos=None, text=None):
        self.pos = pos
        self.text = text
        if pos is not None:
            msg = f"{msg} at position {pos}"
            if text is not None:
                msg += f"\n  {text}\n  {' ' * pos}^"
        super().__init__(msg)


class GeneratorSet:
    def __init__(self, names, weights=None):
        names = list(names)
        if weights is None:
            weights = [1] * len(names)
        weights = [int(w) for w in weights]
        if len(set(names)) != len(names):
            raise ValueError("generator names must be unique")
        if len(weights) != len(names):
            raise ValueError("one weight per generator")
        for n in names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", n):
                raise ValueError(f"bad generator name {n!r}")
        if any(w < 1 for w in weights):
            raise ValueError("generator weights must be >= 1")
        self.names = names
        self.weights = weights
        self.index = {n: i for i, n in enumerate(names)}

    def __len__(self):
        return len(self.names)

    def __eq__(self, other):
        return isinstance(other, GeneratorSet) and self.names == other.names \
            and self.weights == other.weights

    def weight(self, word):
        w = self.weights
        return sum(w[i] for i in word)

    def key(self, word):
        """Monomial order key: weight, then lexicographic."""
        return (self.weight(word), tuple(word))

    def word_str(self, word):
        if not word:
            return "1"
        return "*".join(self.names[i] for i in word)


class NCPoly:
    """Finitely supported Q-combination of words."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        t = {}
        if terms:
            for w, c in dict(terms).items():
                c = normalize_scalar(c)
                if c:
                    t[tuple(w)] = c
        self.terms = t

    @classmethod
    def word(cls, w, c=1):
        return cls({tuple(w): c})

    @classmethod
    def const(cls, c):
        return cls({(): c})

    def copy(self):
        p = NCPoly()
        p.terms = dict(self.terms)
        return p

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, NCPoly):
            return self.terms == other.terms
        if isinstance(other, dict):
            return self.terms == NCPoly(other).terms
        return NotImplemented

    def __add__(self, other):
        out = dict(self.terms)
        vec_add(out, other.terms)
        p = NCPoly()
        p.terms = {k: normalize_scalar(v) for k, v in out.items()}
        return p

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = normalize_scalar(c)
        p = NCPoly()
        if c:
            p.terms = {k: normalize_scalar(v * c) for k, v in self.terms.items()}
        return p

    def __mul__(self, other):
        if not isinstance(other, NCPoly):
            return self.scale(other)
        out = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                v = out.get(w, 0) + c1 * c2
                if v:
                    out[w] = v
                else:
                    out.pop(w, None)
        return NCPoly(out)

    def leading(self, gens):
        return max(self.terms, key=gens.key)

    def max_weight(self, gens):
        return max((gens.weight(w) for w in self.terms), default=0)

    def is_homogeneous(self, gens):
        return len({gens.weight(w) for w in self.terms}) <= 1

    def sorted_terms(self, gens):
        return sorted(self.terms.items(), key=lambda kv: gens.key(kv[0]), reverse=True)

    def to_str(self, gens):
        if not self.terms:
            return "0"
        parts = []
        for w, c in self.sorted_terms(gens):
            c = as_fraction(c)
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not w:
                body = str(a)
            elif a == 1:
                body = gens.word_str(w)
            else:
                body = f"{a}*{gens.word_str(w)}"
            parts.append((sign, body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self):
        return f"NCPoly({self.terms!r})"


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokenize(text):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1):
            toks.append(("num", m.group(1), m.start(1)))
        elif m.group(2):
            toks.append(("id", m.group(2), m.start(2)))
        elif m.group(3):
            ch = m.group(3)
            if ch not in "+-*()^":
                raise ParseError(f"unexpected character {ch!r}", m.start(3), text)
            toks.append(("op", ch, m.start(3)))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


def parse_ncpoly(text, gens, extra=None):
    """Parse an expression such as ``"x*y - y*x - 1"``.

    Grammar: sums and differences of products, with explicit ``*``,
    parentheses, rational literals ``p`` or ``p/q`` and an optional
    nonnegative integer power ``^n``.  ``extra`` maps additional names to
    NCPoly values (used for the deformation parameter).
    """
    if not isinstance(text, str):
        raise ParseError("expression must be a string")
    toks = _tokenize(text)
    i = 0

    def peek():
        return toks[i]

    def take():
        nonlocal i
        t = toks[i]
        i += 1
        return t

    def expr():
        p = term()
        while peek()[0] == "op" and peek()[1] in "+-":
            op = take()[1]
            q = term()
            p = p + q if op == "+" else p - q
        return p

    def term():
        p = factor()
        while peek()[0] == "op" and peek()[1] == "*":
            take()
            p = p * factor()
        return p

    def factor():
        t = peek()
        if t[0] == "op" and t[1] in "+-":
            take()
            f = factor()
            return f if t[1] == "+" else -f
        base = atom()
        if peek()[0] == "op" and peek()[1] == "^":
            take()
            e = take()
            if e[0] != "num" or "/" in e[1]:
                raise ParseError("exponent must be a nonnegative integer", e[2], text)
            out = NCPoly.const(1)
            for _ in range(int(e[1])):
                out = out * base
            return out
        return base

    def atom():
        t = take()
        if t[0] == "num":
            return NCPoly.const(Fraction(t[1]))
        if t[0] == "id":
            if t[1] in gens.index:
                return NCPoly.word((gens.index[t[1]],))
            if extra and t[1] in extra:
                return extra[t[1]]
            raise ParseError(f"unknown identifier {t[1]!r}", t[2], text)
        if t[0] == "op" and t[1] == "(":
            p = expr()
            c = take()
            if c[0] != "op" or c[1] != ")":
                raise ParseError("expected ')'", c[2], text)
            return p
        if t[0] == "end":
            raise ParseError("unexpected end of expression", t[2], text)
        raise ParseError(f"unexpected token {t[1]!r}", t[2], text)

    p = expr()
    t = peek()
    if t[0] != "end":
        raise ParseError(f"unexpected token {t[1]!r}", t[2], text)
    return p


# ---------------------------------------------------------------------------
# presentations and rewriting


class AlgebraPresentation:
    def __init__(self, gens, relations, degree_cap):
        self.gens = gens
        self.relations = [r if isinstance(r, NCPoly) else parse_ncpoly(r, gens)
                          for r in relations]
        self.degree_cap = int(degree_cap)
        if self.degree_cap < 1:
            raise ValueError("degree_cap must be positive")
        for r in self.relations:
            if r.is_zero():
                raise ValueError("zero relation rejected")
        self.homogeneous = all(r.is_homogeneous(gens) for r in self.relations)

    @classmethod
    def from_strings(cls, names, relations, degree_cap, weights=None):
        gens = GeneratorSet(names, weights)
        return cls(gens, relations, degree_cap)


class CapExceeded(ValueError):
    pass


class RewriteSystem:
    def __init__(self, gens, rules, completion_cap, unresolved=()):
        self.gens = gens
        self.rules = dict(rules)          # leading word -> remainder dict
        self.order = "weight-lex"
        self.completion_cap = completion_cap
        self.unresolved_overlaps = list(unresolved)
        self._leads_by_len = None

    def rule_list(self):
        return sorted(self.rules.items(), key=lambda kv: self.gens.key(kv[0]))

    def _index(self):
        if self._leads_by_len is None:
            d = {}
            for lead in self.rules:
                d.setdefault(len(lead), set()).add(lead)
            self._leads_by_len = sorted(d.items())
        return self._leads_by_len

    def find(self, word):
        """Leftmost occurrence of a leading word; returns (pos, lead) or None."""
        idx = self._index()
        n = len(word)
        for pos in range(n):
            for L, leads in idx:
                if pos + L > n:
                    break
                sub = word[pos:pos + L]
                if sub in leads:
                    return pos, sub
        return None

    def is_normal(self, word):
        return self.find(word) is None

    def describe(self):
        g = self.gens
        return [f"{g.word_str(l)} -> {NCPoly(r).to_str(g)}" for l, r in self.rule_list()]


def reduce(p, rs, check_cap=True):
    """Normal form of p: replace leading words until none occurs."""
    terms = dict(p.terms if isinstance(p, NCPoly) else p)
    gens = rs.gens
    if check_cap:
        for w in terms:
            if gens.weight(w) > rs.completion_cap:
                raise CapExceeded(f"word {gens.word_str(w)} exceeds cap {rs.completion_cap}")
    done = {}
    while terms:
        w = max(terms, key=gens.key)
        c = terms.pop(w)
        hit = rs.find(w)
        if hit is None:
            done[w] = c
            continue
        pos, lead = hit
        u, v = w[:pos], w[pos + len(lead):]
        for r, rc in rs.rules[lead].items():
            nw = u + r + v
            vec_add(terms, {nw: c * rc})
    return NCPoly(done)


def _s_polys(l1, r1, l2, r2):
    """Overlap ambiguities l1 = u s, l2 = s v with s nonempty proper."""
    out = []
    for k in range(1, min(len(l1), len(l2))):
        if l1[-k:] == l2[:k]:
            u, v = l1[:-k], l2[k:]
            w = l1 + v
            a = NCPoly(r1) * NCPoly.word(v)
            b = NCPoly.word(u) * NCPoly(r2)
            out.append((w, a - b))
    return out


def complete_rewrite(pres, cap=None, max_rounds=10000):
    """Diamond-lemma completion, certified for overlaps of weight <= cap."""
    gens = pres.gens
    cap = pres.degree_cap if cap is None else int(cap)
    rs = RewriteSystem(gens, {}, cap)
    queue = [r.copy() for r in pres.relations]
    unresolved = set()

    def add_rule(poly):
        lead = poly.leading(gens)
        c = as_fraction(poly.terms[lead])
        rem = {w: normalize_scalar(-as_fraction(v) / c) for w, v in poly.terms.items() if w != lead}
        # inter-reduction: drop rules whose lead contains the new lead
        for old in list(rs.rules):
            if any(old[i:i + len(lead)] == lead for i in range(len(old) - len(lead) + 1)):
                queue.append(NCPoly.word(old) - NCPoly(rs.rules.pop(old)))
        rs.rules[lead] = rem
        rs._leads_by_len = None
        for other, orem in list(rs.rules.items()):
            pairs = _s_polys(lead, rem, other, orem)
            if other != lead:
                pairs += _s_polys(other, orem, lead, rem)
            for w, s in pairs:
                if gens.weight(w) > cap:
                    unresolved.add(w)
                else:
                    queue.append(s)

    rounds = 0
    while True:
        while queue:
            rounds += 1
            if rounds > max_rounds:
                raise RuntimeError("completion did not terminate below the cap")
            p = queue.pop(0)
            try:
                p = reduce(p, rs, check_cap=False)
            except RecursionError:
                raise
            if p.is_zero():
                continue
            if p.max_weight(gens) > cap and gens.weight(p.leading(gens)) > cap:
                unresolved.add(p.leading(gens))
                continue
            add_rule(p)
        # final sweep: every overlap below the cap must resolve
        for l1, r1 in list(rs.rules.items()):
            for l2, r2 in list(rs.rules.items()):
                for w, s in _s_polys(l1, r1, l2, r2):
                    if gens.weight(w) > cap:
                        unresolved.add(w)
                        continue
                    if not reduce(s, rs, check_cap=False).is_zero():
                        queue.append(s)
        if not queue:
            break
    # tidy remainders
    for lead in list(rs.rules):
        rs.rules[lead] = reduce(NCPoly(rs.rules[lead]), rs, check_cap=False).terms
    rs.unresolved_overlaps = sorted(unresolved, key=gens.key)
    return rs


def check_confluence(rs, cap=None):
    """Brute-force check: every word of weight <= cap has a unique normal form
    whichever applicable rule is tried first.  Returns offending words."""
    gens = rs.gens
    cap = rs.completion_cap if cap is None else cap
    bad = []
    for w in words_up_to(gens, cap):
        forms = set()
        for pos in range(len(w)):
            for lead, rem in rs.rules.items():
                if w[pos:pos + len(lead)] == lead:
                    u, v = w[:pos], w[pos + len(lead):]
                    step = NCPoly({u + r + v: c for r, c in rem.items()})
                    nf = reduce(step, rs, check_cap=False)
                    forms.add(tuple(sorted(nf.terms.items())))
        if len(forms) > 1:
            bad.append(w)
    return bad


def words_up_to(gens, cap):
    """All words of weight <= cap in monomial order."""
    out = [()]
    frontier = [()]
    while frontier:
        new = []
        for w in frontier:
            for g in range(len(gens)):
                nw = w + (g,)
                if gens.weight(nw) <= cap:
                    new.append(nw)
        out += new
        frontier = new
    return sorted(out, key=gens.key)


# ---------------------------------------------------------------------------
# finite-dimensional algebras


class FinDimAlgebra:
    """Basis (index 0 = unit), structure constants, optional weights.

    ``mult[i][j]`` is a tuple of ``(k, c)`` with ``e_i e_j = sum c e_k``.
    """

    def __init__(self, labels, mult, weights=None, truncated=False, gens=None,
                 rewrite=None, cap=None, name=None, words=None):
        self.labels = list(labels)
        self.mult = [[tuple(row_ij) for row_ij in row] for row in mult]
        self.N = len(self.labels)
        self.weights = None if weights is None else [int(w) for w in weights]
        self.truncated = bool(truncated)
        self.gens = gens
        self.rewrite = rewrite
        self.cap = cap
        self.name = name
        self.words = words
        self._tables = None
        if self.N == 0:
            raise ValueError("empty basis")

    dim = property(lambda self: self.N)

    def __repr__(self):
        return f"FinDimAlgebra({self.name or '?'}, dim={self.N}, truncated={self.truncated})"

    # element arithmetic ---------------------------------------------------
    def mul_basis(self, i, j):
        return dict(self.mult[i][j])

    def mul(self, u, v):
        out = {}
        for i, a in u.items():
            for j, b in v.items():
                for k, c in self.mult[i][j]:
                    w = out.get(k, 0) + a * b * c
                    if w:
                        out[k] = w
                    else:
                        out.pop(k, None)
        return out

    def unit(self):
        return {0: 1}

    def is_graded(self):
        """Weight grading usable for block decompositions: every non-unit
        basis element has positive weight and products are homogeneous."""
        if self.weights is None or self.weights[0] != 0:
            return False
        if any(w < 1 for w in self.weights[1:]):
            return False
        W = self.weights
        for i in range(self.N):
            for j in range(self.N):
                for k, _ in self.mult[i][j]:
                    if W[k] != W[i] + W[j]:
                        return False
        return True

    def label(self, i):
        return self.labels[i]

    def vec_str(self, v):
        if not v:
            return "0"
        parts = []
        for k in sorted(v):
            c = as_fraction(v[k])
            parts.append(f"{c}*{self.labels[k]}" if c != 1 else self.labels[k])
        return " + ".join(parts)

    def poly_to_vec(self, p):
        """Normal form of an NCPoly as a basis vector (presented algebras)."""
        if self.rewrite is None:
            raise ValueError("algebra has no presentation")
        index = {w: i for i, w in enumerate(self.words)}
        out = {}
        for w, c in p.terms.items():
            if self.gens.weight(w) > self.cap:
                continue
            nf = reduce(NCPoly({w: c}), self.rewrite)
            for w2, c2 in nf.terms.items():
                vec_add(out, {index[w2]: c2})
        return out

    def parse(self, text):
        return self.poly_to_vec(parse_ncpoly(text, self.gens))

    def index_of(self, label):
        return self.labels.index(label)

    # checks ----------------------------------------------------------------
    def unit_law_violations(self):
        bad = []
        for j in range(self.N):
            if self.mul_basis(0, j) != {j: 1}:
                bad.append(("left", j))
            if self.mul_basis(j, 0) != {j: 1}:
                bad.append(("right", j))
        return bad

    def associativity_violations(self, limit=None):
        bad = []
        N = self.N
        for i in range(N):
            for j in range(N):
                ij = self.mul_basis(i, j)
                for k in range(N):
                    left = self.mul(ij, {k: 1})
                    right = self.mul({i: 1}, self.mul_basis(j, k))
                    if left != right:
                        bad.append((i, j, k))
                        if limit and len(bad) >= limit:
                            return bad
        return bad

    # vectorization support --------------------------------------------------
    def tables(self):
        """Flattened integer structure constants for numpy kernels.

        Returns (ptr, K, C, scale) where products of (i, j) are the entries
        ``K[ptr[i*N+j]:ptr[i*N+j+1]]`` with coefficients ``C / scale``.
        """
        if self._tables is None:
            N = self.N
            scale = 1
            for row in self.mult:
                for cell in row:
                    for _, c in cell:
                        c = as_fraction(c)
                        scale = scale * c.denominator // np.gcd(scale, c.denominator)
            ptr = [0]
            K, C = [], []
            for i in range(N):
                for j in range(N):
                    for k, c in self.mult[i][j]:
                        K.append(k)
                        C.append(int(as_fraction(c) * scale))
                    ptr.append(len(K))
            self._tables = (np.array(ptr, dtype=np.int64), np.array(K, dtype=np.int64),
                            np.array(C, dtype=np.int64), int(scale))
        return self._tables

    def to_json(self):
        sc = []
        for i in range(self.N):
            for j in range(self.N):
                for k, c in self.mult[i][j]:
                    sc.append([i, j, k, str(as_fraction(c))])
        out = {"basis": self.labels, "structure_constants": sc}
        if self.weights is not None:
            out["weights"] = self.weights
        return out


def build_findim(pres, cap=None, rs=None, limit=None, name=None):
    """Materialize normal words of weight <= cap with their products.

    Products of weight above the cap are set to zero; ``truncated`` records
    whether that ever discards a nonzero normal word.
    """
    gens = pres.gens
    cap = pres.degree_cap if cap is None else int(cap)
    if rs is None:
        rs = complete_rewrite(pres, cap)
    limit = size_limit() if limit is None else limit
    words = [()]
    frontier = [()]
    truncated = False
    while frontier:
        new = []
        for w in frontier:
            for g in range(len(gens)):
                nw = w + (g,)
                if not rs.is_normal(nw):
                    continue
                if gens.weight(nw) > cap:
                    truncated = True
                    continue
                new.append(nw)
        words += new
        if len(words) > limit:
            raise SizeLimitError(f"basis size {len(words)} exceeds limit {limit}")
        frontier = new
    words.sort(key=gens.key)
    index = {w: i for i, w in enumerate(words)}
    N = len(words)
    mult = []
    for a in words:
        row = []
        wa = gens.weight(a)
        for b in words:
            if wa + gens.weight(b) > cap:
                row.append(())
                continue
            nf = reduce(NCPoly.word(a + b), rs, check_cap=False)
            row.append(tuple(sorted((index[w], c) for w, c in nf.terms.items())))
        mult.append(row)
    labels = [gens.word_str(w) for w in words]
    weights = [gens.weight(w) for w in words]
    return FinDimAlgebra(labels, mult, weights=weights, truncated=truncated, gens=gens,
                         rewrite=rs, cap=cap, name=name, words=words)


def free_algebra(names, cap, weights=None):
    pres = AlgebraPresentation(GeneratorSet(names, weights), [], cap)
    return build_findim(pres, cap, name=f"free({','.join(names)})<= {cap}")


def algebra_from_constants(labels, constants, weights=None, name=None):
    """Explicit basis + structure constants [[i, j, k, "p/q"], ...]."""
    N = len(labels)
    table = [[{} for _ in range(N)] for _ in range(N)]
    has_unit_rows = False
    for entry in constants:
        i, j, k, c = entry
        i, j, k = int(i), int(j), int(k)
        if not (0 <= i < N and 0 <= j < N and 0 <= k < N):
            raise ValueError(f"structure constant index out of range: {entry}")
        if i == 0 or j == 0:
            has_unit_rows = True
        vec_add(table[i][j], {k: normalize_scalar(as_fraction(c))})
    if not has_unit_rows:
        for j in range(N):
            table[0][j] = {j: 1}
            table[j][0] = {j: 1}
    mult = [[tuple(sorted(cell.items())) for cell in row] for row in table]
    A = FinDimAlgebra(labels, mult, weights=weights, name=name)
    bad = A.unit_law_violations()
    if bad:
        raise ValueError(f"basis[0] is not a unit: {bad[:3]}")
    return A


def load_algebra(spec, cap=None):
    """Load an algebra spec (path, JSON text or dict)."""
    if isinstance(spec, str):
        if os.path.exists(spec):
            with open(spec) as fh:
                spec = json.load(fh)
        else:
            spec = json.loads(spec)
    if not isinstance(spec, dict):
        raise ValueError("algebra spec must be a JSON object")
    name = spec.get("name")
    if "basis" in spec:
        return algebra_from_constants(spec["basis"], spec.get("structure_constants", []),
                                      spec.get("weights"), name=name)
    if "generators" not in spec:
        raise ValueError("algebra spec needs 'generators' or 'basis'")
    names, weights = [], []
    for g in spec["generators"]:
        if isinstance(g, str):
            names.append(g)
            weights.append(1)
        else:
            names.append(g["name"])
            weights.append(int(g.get("weight", 1)))
    gens = GeneratorSet(names, weights)
    c = int(cap if cap is not None else spec.get("degree_cap", 4))
    pres = AlgebraPresentation(gens, spec.get("relations", []), c)
    return build_findim(pres, c, name=name)


# ---------------------------------------------------------------------------
# tensor words in A_t = A * k[t]:  a_1 t a_2 t ... t a_r  <->  (a_1, ..., a_r)


def t_mul(A, u, v):
    """Product of two tensor words: the adjacent slots multiply in A."""
    out = {}
    for k, c in A.mult[u[-1]][v[0]]:
        out[u[:-1] + (k,) + v[1:]] = c
    return out


def t_mul_elems(A, x, y):
    out = {}
    for u, a in x.items():
        for v, b in y.items():
            for w, c in t_mul(A, u, v).items():
                vec_add(out, {w: a * b * c})
    return out


def extend_t(f, elem, strict=False, degree=0, slot_degree=None):
    """t-derivation extension of f: A -> A_t to tensor words.

    ``f`` maps a basis index to a dict {slots: coefficient}.  A word
    a_1 t ... t a_r goes to sum_k a_1 t ... t f(a_k) t ... t a_r.  With
    ``degree`` n and ``slot_degree`` (index -> degree) the graded sign
    (-1)^(n(|a_1|+...+|a_{k-1}|)) is applied.  f(1) must vanish; unless
    ``strict``, a unit component of f is ignored.
    """
    f1 = f(0) if callable(f) else f.get(0, {})
    if f1 and strict:
        raise ValueError("t-derivation extension needs f(1) = 0")
    get = f if callable(f) else (lambda i: f.get(i, {}))
    if isinstance(elem, tuple):
        elem = {elem: 1}
    out = {}
    for slots, c in elem.items():
        pre = 0
        for k, a in enumerate(slots):
            if a != 0:
                sign = -1 if (degree * pre) % 2 else 1
                for s, v in get(a).items():
                    vec_add(out, {slots[:k] + tuple(s) + slots[k + 1:]: sign * c * v})
            if slot_degree is not None:
                pre += slot_degree(a)
    return out


# ---------------------------------------------------------------------------
# double derivations A -> A (x) A


def delta_map(A):
    """The distinguished double derivation a -> 1(x)a - a(x)1."""
    out = {0: {}}
    for a in range(1, A.N):
        out[a] = {(0, a): 1, (a, 0): -1}
    return out


def double_derivation_from_generators(A, values):
    """Extend values on generators to all normal words by the Leibniz rule
    for the outer bimodule structure.  ``values`` maps generator index to
    a dict {(i, j): c} in A (x) A."""
    if A.words is None:
        raise ValueError("needs a presented algebra")
    theta = {}
    for idx, w in enumerate(A.words):
        acc = {}
        for k, g in enumerate(w):
            left = A.poly_to_vec(NCPoly.word(w[:k]))
            right = A.poly_to_vec(NCPoly.word(w[k + 1:]))
            for (u, v), c in values.get(g, {}).items():
                for lu, lc in left.items():
                    for k1, c1 in A.mult[lu][u]:
                        for rv, rc in right.items():
                            for k2, c2 in A.mult[v][rv]:
                                vec_add(acc, {(k1, k2): c * lc * c1 * rc * c2})
        theta[idx] = acc
    return theta


def _outer_left(A, a, x):
    out = {}
    for (u, v), c in x.items():
        for k, c1 in A.mult[a][u]:
            vec_add(out, {(k, v): c * c1})
    return out


def _outer_right(A, x, b):
    out = {}
    for (u, v), c in x.items():
        for k, c1 in A.mult[v][b]:
            vec_add(out, {(u, k): c * c1})
    return out


def check_double_derivation(A, theta):
    """Verify Leibniz for the outer bimodule and multiplicativity of
    Id + theta_t on A_t modulo (A_t^+)^2.  Both verdicts are reported and
    must agree."""
    get = lambda i: theta.get(i, {})
    leib_witness = None
    for i in range(A.N):
        for j in range(A.N):
            lhs = {}
            for k, c in A.mult[i][j]:
                vec_add(lhs, {kk: c * v for kk, v in get(k).items()})
            rhs = _outer_right(A, get(i), j)
            vec_add(rhs, _outer_left(A, i, get(j)))
            if lhs != rhs:
                leib_witness = (i, j)
                break
        if leib_witness:
            break

    # F = Id + theta_t on A (+) A(x)A; products of t-order >= 2 vanish
    def F(x):
        out = dict(x)
        for s, c in x.items():
            if len(s) == 1:
                vec_add(out, {kk: c * v for kk, v in get(s[0]).items()})
        return out

    def trunc(x):
        return {s: c for s, c in x.items() if len(s) <= 2}

    basis = [(i,) for i in range(A.N)] + [(i, j) for i in range(A.N) for j in range(A.N)]
    auto_witness = None
    for x in basis:
        for y in basis:
            if len(x) + len(y) > 3:
                continue
            lhs = F(trunc(t_mul_elems(A, {x: 1}, {y: 1})))
            rhs = trunc(t_mul_elems(A, F({x: 1}), F({y: 1})))
            if trunc(lhs) != rhs:
                auto_witness = (x, y)
                break
        if auto_witness:
            break
    leib = leib_witness is None
    auto = auto_witness is None
    report = {"leibniz": leib, "automorphism": auto, "agree": leib == auto,
              "pass": leib and auto}
    if leib_witness:
        i, j = leib_witness
        report["witness"] = {"pair": [A.labels[i], A.labels[j]],
                             "product": A.vec_str(A.mul_basis(i, j))}
    if auto_witness:
        report["automorphism_witness"] = [list(auto_witness[0]), list(auto_witness[1])]
    return report


# ---------------------------------------------------------------------------


def commutator_subspace(A, weight=None):
    """Echelon basis of [A, A] (optionally restricted to one weight)."""
    r = Reducer(track=False)
    for i in range(A.N):
        for j in range(i + 1, A.N):
            if weight is not None and A.weights is not None \
                    and A.weights[i] + A.weights[j] != weight:
                continue
            v = A.mul_basis(i, j)
            vec_add(v, A.mul_basis(j, i), -1)
            if v:
                r.add(v)
    return r.basis()


def graded_commutator_span(elems_p, elems_q, mul, p, q):
    """Span of u v - (-1)^(pq) v u for u in elems_p, v in elems_q."""
    r = Reducer(track=False)
    s = -1 if (p * q) % 2 else 1
    for u in elems_p:
        for v in elems_q:
            x = mul(u, v)
            vec_add(x, mul(v, u), -s)
            if x:
                r.add(x)
    return r.basis()


# standard test algebras


def ground_field():
    return FinDimAlgebra(["1"], [[((0, 1),)]], weights=[0], name="k")


def dual_numbers():
    pres = AlgebraPresentation.from_strings(["e"], ["e*e"], 3)
    return build_findim(pres, 3, name="k[e]/(e^2)")


def truncated_polynomial(n=3):
    pres = AlgebraPresentation.from_strings(["x"], [f"x^{n}"], n + 2)
    return build_findim(pres, n + 2, name=f"k[x]/(x^{n})")


def free_xy(cap=3):
    return free_algebra(["x", "y"], cap)


def commutative_xy(cap=3):
    pres = AlgebraPresentation.from_strings(["x", "y"], ["x*y - y*x"], cap)
    return build_findim(pres, cap, name=f"k[x,y]<= {cap}")


def standard_algebras():
    return {"k": ground_field(), "k[e]": dual_numbers(), "k[x]/x3": truncated_polynomial(3),
            "free_xy3": free_xy(3), "comm_xy3": commutative_xy(3)}
