"""Exact identity suites for the form operators.

Every identity is checked as an equality of rational matrices on the full
basis of Omega^n (or E^n), so passing means it holds on every basis form.
"""

from .forms import OperatorCache
from .homology import FormBlocks, trusted_weight_cap
from .linalg import QMat, rank


def _I(n):
    return QMat.identity(n)


def _record(rows, fails, n, name, ok):
    rows.setdefault(n, {})[name] = bool(ok)
    if not ok:
        fails.append({"n": n, "identity": name})


def verify_identities(A, n_max=4, oc=None):
    """b, d, kappa, B and iota_Delta relations up to form degree n_max."""
    oc = oc or OperatorCache(A)
    rows, fails = {}, []
    for n in range(n_max + 1):
        dO = oc.dim("O", n)
        if dO == 0:
            continue
        I, K = _I(dO), oc.kappa(n)
        rec = lambda name, ok: _record(rows, fails, n, name, ok)  # noqa: E731
        bd = oc.b_on_E(n + 1) @ oc.d(n)
        if n:
            bd = bd + oc.d_full(n - 1) @ oc.b(n)
        rec("bd+db=1-kappa", bd.equals(I - K))
        rec("b kappa^n d=kappa^n-1",
            (oc.b_on_E(n + 1) @ oc.kappa_power(n + 1, n, True) @ oc.d(n))
            .equals(oc.kappa_power(n, n) - I))
        rec("kappa^(n+1) d=d", (oc.kappa_power(n + 1, n + 1, True) @ oc.d(n)).equals(oc.d(n)))
        rec("d^2=0", (oc.d_on_E(n + 1) @ oc.d(n)).is_zero())
        rec("B^2=0", (oc.B_on_E(n + 1) @ oc.B(n)).is_zero())
        bB = oc.b_on_E(n + 1) @ oc.B(n)
        if n:
            bB = bB + oc.B(n - 1).pad_rows(dO) @ oc.b(n)
        rec("bB+Bb=0", bB.is_zero())
        if n >= 2:
            rec("b^2=0", (oc.b(n - 1) @ oc.b(n)).is_zero())
        if n:
            rec("iota=explicit", oc.iota(n).equals(oc.iota_explicit(n)))
            di = oc.iota_on_E(n + 1) @ oc.d(n) + oc.d_full(n - 1) @ oc.iota(n)
            rec("d iota+iota d=0", di.is_zero())
            rec("(kappa-1) iota=0",
                ((oc.kappa(n - 1) - _I(oc.dim("O", n - 1))) @ oc.iota(n)).is_zero())
        if n >= 2:
            rec("iota^2=0", (oc.iota(n - 1) @ oc.iota(n)).is_zero())
    return {"algebra": A.name, "n_max": n_max,
            "rows": [{"n": n, "checks": rows[n]} for n in sorted(rows)],
            "failures": fails, "ok": not fails}


def _hE(oc, n):
    """The d-homotopy restricted to E^n, as a map into Omega^(n-1)."""
    v = oc.v
    return v.to_qmat(v.homotopy_d(oc.keys("E", n)), oc.dim("O", n - 1), oc.dim("E", n))


def verify_harmonic(A, n_max=4, oc=None):
    """Harmonic projector P, both contractions, and window-rank acyclicity."""
    oc = oc or OperatorCache(A)
    rows, fails = {}, []
    for n in range(n_max + 1):
        dO = oc.dim("O", n)
        if dO == 0:
            continue
        rec = lambda name, ok: _record(rows, fails, n, name, ok)  # noqa: E731
        Pn, Pp, K = oc.harmonic(n), oc.harmonic_perp(n), oc.kappa(n)
        I = _I(dO)
        rec("P^2=P", (Pn @ Pn).equals(Pn))
        rec("P(1-kappa)^2=0", (Pn @ (I - K) @ (I - K)).is_zero())
        rec("Pd=dP", (oc.harmonic(n + 1, True) @ oc.d(n)).equals(oc.d(n) @ Pn))
        rec("PB=BP", (oc.harmonic(n + 1, True) @ oc.B(n)).equals(oc.B(n) @ Pn))
        rec("BP=(n+1)dP", (oc.B(n) @ Pn).equals((oc.d(n) @ Pn).scale(n + 1)))
        rec("BPperp=0", (oc.B(n) @ Pp).is_zero())
        if n:
            rec("Pb=bP", (oc.harmonic(n - 1) @ oc.b(n)).equals(oc.b(n) @ Pn))
            rec("P iota=iota P", (oc.harmonic(n - 1) @ oc.iota(n)).equals(oc.iota(n) @ Pn))
            rec("iota P=n bP", (oc.iota(n) @ Pn).equals((oc.b(n) @ Pn).scale(n)))
            rec("iota Pperp=0", (oc.iota(n) @ Pp).is_zero())
        # (P_perp Omega, b) contraction
        lhs = oc.b_on_E(n + 1) @ oc.b_homotopy(n)
        if n:
            lhs = lhs + oc.b_homotopy(n - 1).pad_rows(dO) @ oc.b(n)
        rec("bH+Hb=1 on Pperp", (lhs @ Pp).equals(Pp))
        # (reduced Omega, d) contraction
        hd = _hE(oc, n + 1) @ oc.d(n)
        if n:
            hd = hd + oc.d_full(n - 1) @ oc.homotopy_d(n)
            rec("dh+hd=1 reduced", hd.equals(I))
        else:
            sub = list(range(1, dO))
            rec("dh+hd=1 reduced", hd.submatrix(sub, sub).equals(_I(dO - 1)))
    ranks = window_acyclicity(A, n_max, FormBlocks(A, oc))
    for r in ranks["rows"]:
        if r["h_d"] or r["h_b_perp"]:
            fails.append({"n": r["n"], "weight": r["weight"], "identity": "acyclic"})
    return {"algebra": A.name, "n_max": n_max,
            "rows": [{"n": n, "checks": rows[n]} for n in sorted(rows)],
            "acyclicity": ranks, "failures": fails, "ok": not fails}


def window_acyclicity(A, n_max, fb=None):
    """Homology of (reduced Omega, d) and (P_perp Omega, b) by ranks per weight.

    Only weights whose whole complex sits in degrees <= n_max are used, so
    each block is a complete complex and both homologies must vanish.
    """
    fb = fb or FormBlocks(A)
    if not fb.graded:
        return {"checked": 0, "rows": [], "note": "ungraded: no finite weight blocks"}
    cap = trusted_weight_cap(A)
    out = []
    for w in fb.weight_range(n_max, cap):
        if w > n_max - 1:
            continue
        rk_d = [rank(fb.block("d", n, w, reduced=True)) for n in range(w + 1)]
        pp = [fb.block("Pperp", n, w) for n in range(w + 2)]
        dim_pp = [rank(p) for p in pp]
        rk_b = [0] + [rank(fb.block("b", n, w) @ pp[n]) for n in range(1, w + 2)]
        for n in range(w + 1):
            hd = fb.dim(n, w, reduced=True) - rk_d[n] - (rk_d[n - 1] if n else 0)
            hb = dim_pp[n] - rk_b[n] - rk_b[n + 1]
            out.append({"weight": w, "n": n, "h_d": hd, "h_b_perp": hb})
    return {"checked": len(out), "rows": out}
