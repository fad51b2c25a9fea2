"""Relative forms over a one-variable central base B = k[c] and the
Gauss-Manin connection obtained by lift and project.

A relative normal form is a dict keyed by ``(k, s0, ss, e)``, meaning

    c^k * a_{s0} da_{ss[0]} ... da_{ss[-1]} * dc^e

where ``a_s`` runs over the c-free normal words (``s = 0`` is the unit, so
``s0 = 0`` gives the exact forms da...da), and ``e`` is 0 or 1.  Since dc is
graded central and dc^2 = 0, these keys span Omega^B A; the brute-force
quotient in :meth:`RelativeForms.certify` confirms they form a basis below
the weight cap.

The periodic complex is handled weight by weight.  For a fixed weight only
finitely many form degrees occur, and t is an invertible degree-2 variable,
so the complex (Omega-bar (x) k[t, 1/t], d + t iota) is identified with the
Z/2-graded complex (Omega-bar, d + iota) by setting t = 1.  Nothing is lost
by this: each weight block is computed exactly.
"""

import random
from fractions import Fraction

from .algebra import (AlgebraPresentation, GeneratorSet, build_findim,
                      complete_rewrite, parse_ncpoly)
from .forms import Forms
from .linalg import Reducer, vec_add


class FamilyError(ValueError):
    """The family is rejected (bad input or A/B not free below the cap)."""


class InvariantError(RuntimeError):
    """An identity that must hold by construction failed."""


def _sign(k):
    return -1 if k % 2 else 1


# ---------------------------------------------------------------------------
# families


class RelativeFamily:
    """A = B<generators>/(relations) with B = k[base] central.

    Commutation relations ``g*base - base*g`` are added automatically.  The
    base variable is ordered first, so normal words have the shape
    ``base^k w`` with ``w`` free of the base; freeness of A over B below the
    cap is exactly the statement that every such product is normal.
    """

    def __init__(self, generators, relations, weights=None, base="c", cap=4,
                 b_basis=None, name=None):
        generators = list(generators)
        if base in generators:
            raise FamilyError(f"base variable {base!r} listed among generators")
        weights = dict(weights or {})
        names = [base] + generators
        try:
            gens = GeneratorSet(names, [weights.get(n, 1) for n in names])
        except ValueError as exc:
            raise FamilyError(str(exc)) from None
        rels = []
        for r in relations:
            try:
                rels.append(parse_ncpoly(r, gens) if isinstance(r, str) else r)
            except ValueError as exc:
                raise FamilyError(f"relation {r!r}: {exc}") from None
        rels += [parse_ncpoly(f"{g}*{base} - {base}*{g}", gens) for g in generators]
        self.name = name or "family"
        self.base = base
        self.generators = generators
        self.relation_strings = [r if isinstance(r, str) else r.to_str(gens) for r in relations]
        self.cap = int(cap)
        if self.cap < 1:
            raise FamilyError("weight cap must be positive")
        pres = AlgebraPresentation(gens, rels, self.cap)
        if not pres.homogeneous:
            raise FamilyError("relations must be weight-homogeneous")
        rs = complete_rewrite(pres, self.cap)
        self.A = A = build_findim(pres, self.cap, rs, name=self.name)
        self.gens = gens
        self.wc = gens.weights[0]

        words = A.words
        cfree = [w for w in words if 0 not in w]
        sindex = {w: s for s, w in enumerate(cfree)}
        self.cfree = cfree
        self.ks = []
        for w in words:
            k = 0
            while k < len(w) and w[k] == 0:
                k += 1
            rest = w[k:]
            if 0 in rest or rest not in sindex:
                raise FamilyError(f"A/B not free below cap: normal word "
                                  f"{gens.word_str(w)} is not base^k * (base-free word)")
            self.ks.append((k, sindex[rest]))
        self.lab = {ks: i for i, ks in enumerate(self.ks)}
        # freeness by counting: every base^k a_s inside the cap is a basis word
        expected = sum(1 for w in cfree for k in range(self.cap + 1)
                       if gens.weight(w) + k * self.wc <= self.cap)
        if expected != A.N:
            raise FamilyError(f"A/B not free below cap: {A.N} normal words, "
                              f"{expected} expected from the B-basis")
        self.b_basis = [gens.word_str(w) for w in cfree[1:]]
        if b_basis is not None:
            given = sorted(str(s).replace(" ", "") for s in b_basis)
            if given != sorted(self.b_basis):
                raise FamilyError(f"declared B-basis {given} differs from "
                                  f"normal words {sorted(self.b_basis)}")
        self.c_label = self.lab[(1, 0)] if (1, 0) in self.lab else None
        if self.c_label is None:
            raise FamilyError("cap below the weight of the base variable")

    @classmethod
    def from_spec(cls, spec):
        if not isinstance(spec, dict):
            raise FamilyError("family spec must be a JSON object")
        try:
            base = spec.get("base", "c")
            gens = spec["generators"]
            rels = spec.get("relations", [])
        except KeyError as exc:
            raise FamilyError(f"missing field {exc}") from None
        caps = spec.get("caps", {})
        cap = caps.get("weight", spec.get("cap", 4))
        return cls(gens, rels, weights=spec.get("weights"), base=base, cap=cap,
                   b_basis=spec.get("b_basis"), name=spec.get("name"))

    def a_weight(self, s):
        return self.gens.weight(self.cfree[s])

    def word(self, s):
        return self.gens.word_str(self.cfree[s])

    def key_weight(self, key):
        k, s0, ss, e = key
        return (k + e) * self.wc + self.a_weight(s0) + sum(self.a_weight(s) for s in ss)

    def key_str(self, key):
        k, s0, ss, e = key
        parts = []
        if k:
            parts.append(self.base if k == 1 else f"{self.base}^{k}")
        if s0:
            parts.append(self.word(s0))
        parts += [f"d({self.word(s)})" for s in ss]
        if e:
            parts.append(f"d{self.base}")
        return " ".join(parts) if parts else "1"

    def form_str(self, form):
        if not form:
            return "0"
        out = []
        for key in sorted(form):
            c = Fraction(form[key])
            body = self.key_str(key)
            out.append(body if c == 1 else f"({c})*{body}")
        return " + ".join(out)


def trivial_family(cap=4):
    """B (x) k[e] with e^2 = 0; both variables of weight 1."""
    return RelativeFamily(["e"], ["e*e"], weights={"c": 1, "e": 1}, cap=cap,
                          name="trivial")


def weyl_family(cap=4):
    """B<x, y>/(xy - yx - c) with c of weight 2."""
    return RelativeFamily(["x", "y"], ["x*y - y*x - c"], weights={"c": 2, "x": 1, "y": 1},
                          cap=cap, name="weyl")


# ---------------------------------------------------------------------------
# the normal-form engine


class RelativeForms:
    """Omega^B A in the basis of c-powers times a_{s0} da ... da times dc^e."""

    def __init__(self, fam):
        self.fam = fam
        self.A = fam.A
        self.F = Forms(fam.A)
        self._N = {}
        self._ops = {}
        self._abs_keys = {}

    # conversions ---------------------------------------------------------
    def lift_key(self, key):
        k, s0, ss, e = key
        lab = self.fam.lab
        out = (lab[(k, s0)],) + tuple(lab[(0, s)] for s in ss)
        if e:
            out += (self.fam.c_label,)
        return out

    def lift(self, form):
        out = {}
        for key, c in form.items():
            vec_add(out, {self.lift_key(key): c})
        return out

    def _pure(self, key, extra_k=0):
        """Part of the normal form of an absolute key without dc."""
        ks = self.fam.ks
        k0, s0 = ks[key[0]]
        K = k0 + extra_k
        ss = []
        for i in key[1:]:
            k, s = ks[i]
            if s == 0:
                return None
            K += k
            ss.append(s)
        return (K, s0, tuple(ss))

    def normal_key(self, key):
        hit = self._N.get(key)
        if hit is not None:
            return hit
        fam = self.fam
        ks, lab = fam.ks, fam.lab
        out = {}
        pure = self._pure(key)
        if pure is not None:
            out[pure + (0,)] = 1
        n = len(key) - 1
        k0, s0 = ks[key[0]]
        parts = [ks[i] for i in key[1:]]
        for j, (kj, sj) in enumerate(parts):
            if kj == 0 or any(p[1] == 0 for i, p in enumerate(parts) if i != j):
                continue
            K = k0 + sum(p[0] for p in parts) - 1
            head = (lab[(0, s0)],) + tuple(lab[(0, p[1])] for p in parts[:j])
            mid = self.F.rmul({head: 1}, lab[(0, sj)])
            tail = (0,) + tuple(lab[(0, p[1])] for p in parts[j + 1:])
            Y = self.F.mul(mid, {tail: 1})
            sgn = kj * _sign(n - 1 - j)
            for yk, yc in Y.items():
                p2 = self._pure(yk, K)
                if p2 is not None:
                    vec_add(out, {p2 + (1,): sgn * yc})
        self._N[key] = out
        return out

    def normal(self, form):
        out = {}
        for key, c in form.items():
            for k2, c2 in self.normal_key(key).items():
                vec_add(out, {k2: c * c2})
        return out

    # operators -----------------------------------------------------------
    def _apply(self, name, op, form):
        cache = self._ops.setdefault(name, {})
        out = {}
        for key, c in form.items():
            img = cache.get(key)
            if img is None:
                img = cache[key] = self.normal(op(self.lift({key: 1})))
            for k2, c2 in img.items():
                vec_add(out, {k2: c * c2})
        return out

    def d(self, form):
        return self._apply("d", self.F.d, form)

    def iota(self, form):
        return self._apply("iota", self.F.iota_delta, form)

    def D(self, form):
        """d + iota, the t = 1 specialization of d + t iota."""
        out = self.d(form)
        vec_add(out, self.iota(form))
        return out

    def mul(self, u, v):
        return self.normal(self.F.mul(self.lift(u), self.lift(v)))

    def c_mul(self, form, k=1):
        return {(key[0] + k,) + key[1:]: c for key, c in form.items()}

    def dc_left(self, gamma):
        """dc * gamma as a normal form (dc moves right past odd factors)."""
        out = {}
        for (k, s0, ss, e), c in gamma.items():
            if e:
                continue
            vec_add(out, {(k, s0, ss, 1): _sign(len(ss)) * c})
        return out

    def split(self, form):
        """form = f0 + dc * gamma with f0 free of dc; returns (f0, gamma)."""
        f0, gamma = {}, {}
        for (k, s0, ss, e), c in form.items():
            if e:
                gamma[(k, s0, ss, 0)] = _sign(len(ss)) * c
            else:
                f0[(k, s0, ss, 0)] = c
        return f0, gamma

    def derivative(self, form):
        """Coefficientwise d/dc in the normal basis."""
        out = {}
        for (k, s0, ss, e), c in form.items():
            if k:
                vec_add(out, {(k - 1, s0, ss, e): k * c})
        return out

    # bases -----------------------------------------------------------------
    def keys(self, n, w, e=0):
        """Normal keys with n factors da and weight w (dc counted in w)."""
        fam = self.fam
        wc = fam.wc
        rest = w - e * wc
        if rest < 0:
            return []
        sw = [fam.a_weight(s) for s in range(len(fam.cfree))]
        out = []

        def tails(m, budget):
            if m == 0:
                yield (), budget
                return
            for s in range(1, len(sw)):
                if sw[s] <= budget:
                    for t, left in tails(m - 1, budget - sw[s]):
                        yield (s,) + t, left

        for s0 in range(len(sw)):
            if sw[s0] > rest:
                continue
            for ss, left in tails(n, rest - sw[s0]):
                if left % wc == 0:
                    out.append((left // wc, s0, ss, e))
        return sorted(out)

    def abs_keys(self, n, w):
        """Absolute Omega^n A keys of weight w."""
        hit = self._abs_keys.get((n, w))
        if hit is not None:
            return hit
        W = self.A.weights
        labels = range(self.A.N)
        out = []

        def tails(m, budget):
            if m == 0:
                if budget == 0:
                    yield ()
                return
            for i in labels:
                if 0 < W[i] <= budget:
                    for t in tails(m - 1, budget - W[i]):
                        yield (i,) + t

        for i0 in labels:
            if W[i0] <= w:
                for t in tails(n, w - W[i0]):
                    out.append((i0,) + t)
        self._abs_keys[(n, w)] = out
        return out

    # brute-force certification ----------------------------------------------
    def _ideal_generators(self, n, w):
        """Spanning set of the commutator ideal in absolute degree n, weight w.

        The ideal is generated by h = [a, dc] and dh for a in A; it is
        spanned by alpha * h * omega with omega a pure form da ... da."""
        F = self.F
        W = self.A.weights
        cl = self.fam.c_label
        wc = self.fam.wc
        gens = []
        for a in range(1, self.A.N):
            wa = W[a] + wc
            if wa > w:
                continue
            h = F.mul({(a,): 1}, {(0, cl): 1})
            vec_add(h, F.mul({(0, cl): 1}, {(a,): 1}), -1)
            gens.append((1, wa, h))
            gens.append((2, wa, F.d(h)))
        out = []
        for deg, wh, h in gens:
            if deg > n:
                continue
            for n1 in range(n - deg + 1):
                n2 = n - deg - n1
                for w1 in range(w - wh + 1):
                    w2 = w - wh - w1
                    omegas = [k for k in self.abs_keys(n2, w2) if k[0] == 0]
                    if not omegas:
                        continue
                    for al in self.abs_keys(n1, w1):
                        left = F.mul({al: 1}, h)
                        if not left:
                            continue
                        for om in omegas:
                            v = F.mul(left, {om: 1})
                            if v:
                                out.append(v)
        return out

    def certify(self, max_weight=None):
        """Check the normal basis against the brute-force quotient.

        For every form degree n and weight w <= max_weight:

        * the normal-form map kills the commutator ideal I and is the
          identity on lifted normal keys, and dim Omega^n_w - rank I equals
          the number of normal keys (basis of Omega^B A);
        * with F^1 the image of the ideal generated by dc, the map
          alpha (x) dc -> alpha dc from Omega(A;B) (x) Omega^1 B onto
          gr^1 is injective and surjective (ranks over I);
        * d and iota preserve I and F^1.
        """
        fam = self.fam
        W = fam.cap if max_weight is None else int(max_weight)
        rows = []
        ok = True
        failures = []
        for w in range(W + 1):
            for n in range(w + 1):
                akeys = self.abs_keys(n, w)
                if not akeys:
                    continue
                I = Reducer(track=False)
                gens = self._ideal_generators(n, w)
                for g in gens:
                    I.add(g)
                rank_I = len(I)
                for g in gens:
                    if self.normal(g):
                        ok = False
                        failures.append(("kills_ideal", n, w))
                        break
                for op_name in ("d", "iota"):
                    op = self.F.d if op_name == "d" else self.F.iota_delta
                    for g in gens:
                        if self.normal(op(g)):
                            ok = False
                            failures.append((op_name + "_preserves_ideal", n, w))
                            break
                nk0 = self.keys(n, w, 0)
                nk1 = self.keys(n - 1, w, 1) if n >= 1 else []
                for key in nk0 + nk1:
                    if self.normal(self.lift({key: 1})) != {key: 1}:
                        ok = False
                        failures.append(("section", key))
                quotient_dim = len(akeys) - rank_I
                basis_ok = quotient_dim == len(nk0) + len(nk1)
                # F^1 = I + span{alpha dc omega}
                cl = fam.c_label
                FI = Reducer(track=False)
                for v in I.basis():
                    FI.add(v)
                if n >= 1:
                    for n1 in range(n):
                        for w1 in range(w - fam.wc + 1):
                            omegas = [k for k in self.abs_keys(n - 1 - n1, w - fam.wc - w1)
                                      if k[0] == 0]
                            for al in self.abs_keys(n1, w1):
                                left = self.F.mul({al: 1}, {(0, cl): 1})
                                for om in omegas:
                                    v = self.F.mul(left, {om: 1})
                                    if v:
                                        FI.add(v)
                F1_dim = len(FI) - rank_I
                gr0_dim = quotient_dim - F1_dim
                G = Reducer(track=False)
                for v in I.basis():
                    G.add(v)
                injective = True
                for key in self.keys(n - 1, w - fam.wc, 0) if n >= 1 else []:
                    v = self.F.mul(self.lift({key: 1}), {(0, cl): 1})
                    if G.add(v) is not None:
                        injective = False
                surjective = len(G) == len(FI)
                grass_ok = injective and surjective and F1_dim == len(nk1) \
                    and gr0_dim == len(nk0)
                for key in nk1:
                    for op in (self.d, self.iota):
                        if any(k[3] == 0 for k in op({key: 1})):
                            ok = False
                            failures.append(("F1_stable", key))
                if not (basis_ok and grass_ok):
                    ok = False
                    failures.append(("dims", n, w))
                rows.append({"n": n, "weight": w, "omega": len(akeys), "ideal_rank": rank_I,
                             "quotient": quotient_dim, "normal_keys": len(nk0) + len(nk1),
                             "gr0": gr0_dim, "gr1": F1_dim, "grass_injective": injective,
                             "grass_surjective": surjective})
        return {"family": fam.name, "max_weight": W, "ok": ok, "rows": rows,
                "failures": failures[:10]}


# ---------------------------------------------------------------------------
# the periodic complex of Omega-bar(A;B) and the connection


class GaussManin:
    """Weight blocks of (Omega-bar(A;B), d + iota) and the lift-and-project
    connection.  Parity p collects form degrees n = p mod 2."""

    def __init__(self, fam, rf=None, kill_scalars=False):
        self.fam = fam
        self.rf = rf or RelativeForms(fam)
        self.kill_scalars = kill_scalars
        self._blocks = {}

    def _bar(self, form):
        form = {k: c for k, c in form.items() if c}
        if self.kill_scalars:
            form.pop(_ONE, None)
        return form

    def chain_keys(self, w, p):
        if w < 0 or (w == 0 and self.kill_scalars):
            return []
        return [k for n in range(p, w + 1, 2) for k in self.rf.keys(n, w, 0)]

    def D_rel(self, form):
        """d + iota on Omega(A;B): drop the F^1 part."""
        f0, _ = self.rf.split(self.rf.D(form))
        return self._bar(f0)

    def block(self, w, p):
        """Boundary reducer, cycle basis and class representatives."""
        hit = self._blocks.get((w, p))
        if hit is not None:
            return hit
        bnd = Reducer(track=False)
        for key in self.chain_keys(w, 1 - p):
            bnd.add(self.D_rel({key: 1}))
        cyc = Reducer(track=True)
        cycles = []
        for key in self.chain_keys(w, p):
            rel = cyc.add(self.D_rel({key: 1}), tag=key)
            if rel is not None:
                cycles.append({k: v for k, v in rel.items() if v})
        classes = []
        probe = Reducer(track=False)
        for v in bnd.basis():
            probe.add(v)
        for z in cycles:
            if probe.add(z) is None:
                classes.append(z)
        hit = {"boundaries": bnd, "cycles": cycles, "classes": classes}
        self._blocks[(w, p)] = hit
        return hit

    def homology_dim(self, w, p):
        return len(self.block(w, p)["classes"])

    def is_boundary(self, form, w, p):
        form = self._bar(form)
        if not form or not self.chain_keys(w, p):
            return not form
        return self.block(w, p)["boundaries"].contains(form)

    def connect(self, cycle, w, p, zeta=None):
        """Connection value of the class of ``cycle`` (weight w, parity p).

        The lift is the normal-form section, plus dc * zeta when ``zeta`` is
        given.  Returns {"value", "weight", "parity", "lift", "residue"} with
        (d + iota)(lift) = dc * value."""
        rf = self.rf
        if self.D_rel(cycle):
            raise ValueError("input is not a cycle of (d + t iota)")
        lift = dict(cycle)
        if zeta:
            vec_add(lift, rf.dc_left(zeta))
        r = rf.D(lift)
        r0, gamma = rf.split(r)
        if r0:
            raise InvariantError("lift residue is not in F^1 = <dB>")
        return {"value": self._bar(gamma), "weight": w - self.fam.wc, "parity": p,
                "lift": lift, "residue": r}

    def same_class(self, u, v, w, p):
        diff = dict(u)
        vec_add(diff, v, -1)
        return self.is_boundary(diff, w, p)

    # checks ------------------------------------------------------------------
    def sample_classes(self, max_weight=None, limit=None):
        W = self.fam.cap if max_weight is None else max_weight
        out = []
        for w in range(W + 1):
            for p in (0, 1):
                for z in self.block(w, p)["classes"]:
                    out.append((w, p, z))
        return out[:limit] if limit else out

    def random_zeta(self, w, p, rng, bound=3):
        """Random element of Omega(A;B) so that dc * zeta has weight w, parity p."""
        v = w - self.fam.wc
        keys = [k for n in range(1 - p, v + 1, 2) for k in self.rf.keys(n, v, 0)] if v >= 0 else []
        out = {}
        for k in keys:
            c = rng.randint(-bound, bound)
            if c:
                out[k] = c
        return out

    def check_class(self, w, p, z, rng, max_k=2):
        """Lift independence and the two Leibniz identities for one class."""
        fam, rf = self.fam, self.rf
        wc = fam.wc
        res = {"weight": w, "parity": p, "cycle": fam.form_str(z)}
        base = self.connect(z, w, p)
        gamma = base["value"]
        res["value"] = fam.form_str(gamma)
        res["value_is_cycle"] = not self.D_rel(gamma)
        zeta = self.random_zeta(w, p, rng)
        pert = self.connect(z, w, p, zeta=zeta)
        res["lift_independent"] = self.same_class(gamma, pert["value"], w - wc, p)
        # another representative of the same class
        beta = {}
        for key in self.chain_keys(w, 1 - p):
            c = rng.randint(-2, 2)
            if c:
                beta[key] = c
        z2 = dict(z)
        vec_add(z2, self.D_rel(beta))
        other = self.connect(z2, w, p)["value"]
        res["representative_independent"] = self.same_class(gamma, other, w - wc, p)
        # Leibniz in b = c^k and a random polynomial b
        leib = True
        for k in range(1, max_k + 1):
            if w + k * wc > fam.cap:
                break
            lhs = self.connect(rf.c_mul(z, k), w + k * wc, p)["value"]
            rhs = rf.c_mul(gamma, k)
            vec_add(rhs, rf.c_mul(z, k - 1), k)
            if not self.same_class(lhs, rhs, w + (k - 1) * wc, p):
                leib = False
        res["leibniz_b"] = leib
        # Leibniz against a 1-form beta = c^k dc: (d + iota)(lift * beta) lies
        # in F^2 = 0, matching nabla(alpha) ^ beta + alpha (x) d(beta) = 0
        beta_ok = True
        for k in range(0, max_k):
            if w + (k + 1) * wc > fam.cap:
                break
            lb = rf.dc_left(rf.c_mul(base["lift"], k))
            if rf.D(lb):
                beta_ok = False
        res["leibniz_beta"] = beta_ok
        res["ok"] = (res["value_is_cycle"] and res["lift_independent"]
                     and res["representative_independent"] and leib and beta_ok)
        return res


_ONE = (0, 0, (), 0)


# ---------------------------------------------------------------------------
# drivers


def gm_flatness(fam, seed=0, min_samples=5, random_cycles=4, max_weight=None,
                kill_scalars=False):
    """Connection axioms on every homology class representative plus a few
    random cycles (which may be boundaries; the identities hold for those too).

    With one base variable Omega^2_comm(B) = 0, so curvature vanishes
    identically; the report says so and checks Leibniz and lift independence.
    """
    rng = random.Random(seed)
    gm = GaussManin(fam, kill_scalars=kill_scalars)
    samples = gm.sample_classes(max_weight)
    n_classes = len(samples)
    W = fam.cap if max_weight is None else max_weight
    pool = [(w, p) for w in range(1, W + 1) for p in (0, 1) if gm.block(w, p)["cycles"]]
    for _ in range(random_cycles if pool else 0):
        w, p = rng.choice(pool)
        z = {}
        for cyc in gm.block(w, p)["cycles"]:
            vec_add(z, cyc, rng.randint(-2, 2))
        if z:
            samples.append((w, p, z))
    rows = [gm.check_class(w, p, z, rng) for w, p, z in samples]
    enough = len(rows) >= min_samples
    return {"family": fam.name, "seed": seed, "classes": n_classes, "samples": len(rows),
            "enough_samples": enough, "kill_scalars": kill_scalars,
            "homology": {f"{w}/{p}": gm.homology_dim(w, p)
                         for w in range(W + 1) for p in (0, 1)},
            "curvature": "vanishes identically (one base variable)",
            "lift_independent": all(r["lift_independent"] for r in rows),
            "representative_independent": all(r["representative_independent"] for r in rows),
            "leibniz_b": all(r["leibniz_b"] for r in rows),
            "leibniz_beta": all(r["leibniz_beta"] for r in rows),
            "rows": rows,
            "ok": enough and all(r["ok"] for r in rows)}


def trivial_derivative_check(fam=None, seed=0, trials=10, max_weight=None):
    """On the trivial family the connection is d/dc on coefficients.

    Random cycles are sums c^k z_k of base-free cycles z_k; the canonical
    lift gives exactly the coefficientwise derivative."""
    fam = fam or trivial_family()
    rng = random.Random(seed)
    gm = GaussManin(fam)
    rf = gm.rf
    W = fam.cap if max_weight is None else max_weight
    wc = fam.wc
    rows = []
    ok = True
    for _ in range(trials):
        w = rng.randint(1 + wc, W)
        p = rng.randint(0, 1)
        z = {}
        for k in range(0, (w - 1) // wc + 1):
            cyc = [c for c in gm.block(w - k * wc, p)["cycles"]
                   if all(key[0] == 0 for key in c)]
            if not cyc:
                continue
            coef = rng.randint(-3, 3)
            if coef:
                vec_add(z, rf.c_mul(rng.choice(cyc), k), coef)
        if not z:
            continue
        val = gm.connect(z, w, p)["value"]
        expected = gm._bar(rf.derivative(z))
        exact = val == expected
        ok = ok and exact
        rows.append({"weight": w, "parity": p, "cycle": fam.form_str(z),
                     "value": fam.form_str(val), "exact": exact})
    return {"family": fam.name, "trials": len(rows), "rows": rows,
            "ok": ok and len(rows) > 0}


def verify_gm(families=None, seed=0):
    """Bijectivity certificates, connection axioms and the d/dc check."""
    families = families or [trivial_family(5), weyl_family(6)]
    out = {"seed": seed, "families": []}
    ok = True
    classes = 0
    for fam in families:
        rf = RelativeForms(fam)
        cert = rf.certify()
        flat = gm_flatness(fam, seed=seed)
        entry = {"family": fam.name, "cap": fam.cap, "b_basis": fam.b_basis,
                 "bijective": cert["ok"], "certificate": cert, "connection": flat}
        ok = ok and cert["ok"] and flat["ok"]
        classes += flat["classes"]
        out["families"].append(entry)
    out["classes"] = classes
    triv = trivial_derivative_check(seed=seed)
    out["trivial_derivative"] = triv
    out["ok"] = ok and triv["ok"] and classes >= 5
    return out


def build_relative(fam, max_weight=None):
    """Normal-form engine for the family, rejected unless the comparison map
    is certified bijective below the cap."""
    rf = RelativeForms(fam)
    cert = rf.certify(max_weight)
    if not cert["ok"]:
        raise FamilyError(f"freeness certificate failed: {cert['failures'][:3]}")
    rf.certificate = cert
    return rf


def gm_connect(gm, cycle, w, p, zeta=None):
    """Connection value of a cycle; ``gm`` is a GaussManin or a RelativeFamily."""
    if isinstance(gm, RelativeFamily):
        gm = GaussManin(gm)
    return gm.connect(cycle, w, p, zeta)
