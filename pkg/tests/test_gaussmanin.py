import random

import pytest

from ncdr.gaussmanin import (FamilyError, GaussManin, RelativeFamily, RelativeForms,
                             build_relative, gm_connect, gm_flatness, trivial_derivative_check,
                             trivial_family, weyl_family)
from ncdr.linalg import vec_add


@pytest.fixture(scope="module")
def triv():
    fam = trivial_family(4)
    return fam, GaussManin(fam)


@pytest.fixture(scope="module")
def weyl():
    fam = weyl_family(4)
    return fam, GaussManin(fam)


def test_b_basis_examples(triv, weyl):
    assert triv[0].b_basis == ["e"]
    assert weyl[0].b_basis == ["x", "y", "x*x", "x*y", "y*y", "x*x*x", "x*x*y", "x*y*y",
                               "y*y*y", "x*x*x*x", "x*x*x*y", "x*x*y*y", "x*y*y*y", "y*y*y*y"]


def test_certificates(triv, weyl):
    for fam, _ in (triv, weyl):
        rf = build_relative(fam)
        cert = rf.certificate
        assert cert["ok"]
        assert all(r["grass_injective"] and r["grass_surjective"] for r in cert["rows"])


def test_non_free_family_rejected():
    with pytest.raises(FamilyError):
        RelativeFamily(["x"], ["c*x"], cap=3)


def test_declared_basis_mismatch():
    with pytest.raises(FamilyError):
        RelativeFamily(["e"], ["e*e"], cap=3, b_basis=["e", "e*e"])


def test_spec_errors():
    with pytest.raises(FamilyError):
        RelativeFamily.from_spec({"base": "c"})
    with pytest.raises(FamilyError):
        RelativeFamily(["c"], [], cap=3)


def test_trivial_constant_cycle_has_zero_derivative(triv):
    fam, gm = triv
    for w in range(1, 4):
        for p in (0, 1):
            for cyc in gm.block(w, p)["cycles"]:
                if all(k[0] == 0 for k in cyc):
                    assert gm.is_boundary(gm.connect(cyc, w, p)["value"], w - fam.wc, p) \
                        or gm.connect(cyc, w, p)["value"] == {}


def test_trivial_product_rule(triv):
    fam, gm = triv
    rf = gm.rf
    w, p = 2, 0
    gamma = next(c for c in gm.block(w, p)["cycles"] if all(k[0] == 0 for k in c))
    val = gm_connect(gm, rf.c_mul(gamma, 1), w + fam.wc, p)["value"]
    assert gm.same_class(val, gm._bar(gamma), w, p)


def test_non_cycle_rejected(weyl):
    fam, gm = weyl
    rf = gm.rf
    bad = None
    for w in range(1, 4):
        for p in (0, 1):
            for key in gm.chain_keys(w, p):
                if gm.D_rel({key: 1}):
                    bad = (w, p, {key: 1})
                    break
            if bad:
                break
        if bad:
            break
    assert bad
    with pytest.raises(ValueError):
        gm.connect(bad[2], bad[0], bad[1])


def test_weyl_lift_independence(weyl):
    fam, gm = weyl
    rng = random.Random(0)
    rows = [gm.check_class(w, p, z, rng) for w, p, z in gm.sample_classes(4)]
    assert rows and all(r["lift_independent"] and r["ok"] for r in rows)


def test_flatness_report(triv):
    rep = gm_flatness(triv[0], seed=1)
    assert rep["ok"] and rep["curvature"].startswith("vanishes")


def test_trivial_derivative():
    assert trivial_derivative_check(trivial_family(4), trials=5)["ok"]
