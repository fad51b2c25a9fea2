from ncdr.suites import verify_harmonic, verify_identities, window_acyclicity
from ncdr.homology import FormBlocks


SMALL = ("k", "k[e]", "k[x]/x3")


def test_identities_small(algebras, caches):
    for name in SMALL:
        rep = verify_identities(algebras[name], 3, caches[name])
        assert rep["ok"], rep["failures"]
        assert {"bd+db=1-kappa", "d^2=0", "bB+Bb=0"} <= set(rep["rows"][0]["checks"])


def test_harmonic_small(algebras, caches):
    for name in SMALL:
        rep = verify_harmonic(algebras[name], 3, caches[name])
        assert rep["ok"], rep["failures"]


def test_acyclicity_rows(algebras, caches):
    A = algebras["k[e]"]
    rep = window_acyclicity(A, 3, FormBlocks(A, caches["k[e]"]))
    assert rep["checked"] > 0
    assert all(r["h_d"] == 0 and r["h_b_perp"] == 0 for r in rep["rows"])
