import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncdr.algebra import standard_algebras
from ncdr.deformation import (Cochain, DeformationDatum, anick, build_A_phi, coboundary,
                              cocycle_basis, cup, dashv, equivalence_linear, first_order,
                              flatness_check, gauge, gauge_action, identity_cochain, mc_check,
                              minimality, multiplication, random_cochain, random_homogeneous,
                              solve_coboundary, vdash, vee, verify_dg_suite)

SMALL = standard_algebras()


def R(name, p, k, seed):
    return random_cochain(SMALL[name], p, k, np.random.default_rng(seed))


def test_cup_unit_and_scalars():
    A = SMALL["k[x]/x3"]
    mu = multiplication(A)
    one = identity_cochain(A)
    assert cup(one, one).equals(mu)
    K = SMALL["k"]
    f = Cochain.from_dict(K, 2, 1, {((0, 0), (0,)): 3})
    g = Cochain.from_dict(K, 1, 2, {((0,), (0, 0)): -2})
    assert cup(f, g).to_dict() == {((0, 0, 0), (0, 0)): -6}


@pytest.mark.parametrize("shape", [(2, 2, 1, 3), (1, 2, 3, 1), (2, 3, 2, 2)])
def test_cup_bidegree(shape):
    p, k, q, m = shape
    f, g = R("k[e]", p, k, 3), R("k[e]", q, m, 4)
    h = cup(f, g)
    assert h.bidegree == (p + q, f.bidegree[1] + g.bidegree[1])


def test_scalar_collapse():
    f, g = R("k", 2, 2, 5), R("k", 2, 3, 6)
    assert vdash(f, g).equals(dashv(f, g))
    assert vee(f, g).is_zero()


def test_vdash_dual_numbers_example():
    A = SMALL["k[e]"]
    e = A.index_of("e")
    f = Cochain.from_dict(A, 2, 2, {((e, e), (e, e)): 1})
    expect = {((e, e, e), (e, e, e)): 1}
    assert vdash(f, f).to_dict() == expect
    assert dashv(f, f).to_dict() == expect


def test_vee_zero_operand():
    f = R("k[e]", 2, 2, 1)
    z = Cochain.zero(SMALL["k[e]"], 2, 2)
    assert vee(f, z).is_zero() and vee(z, f).is_zero()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["k[e]", "k[x]/x3"]),
       st.integers(1, 2), st.integers(1, 3))
def test_coboundary_squares_to_zero(seed, name, p, k):
    f = R(name, p, k, seed)
    assert coboundary(coboundary(f)).is_zero()


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_vee_associative(seed):
    rng = np.random.default_rng(seed)
    A = SMALL["k[e]"]
    f, g, h = (random_cochain(A, 2, int(rng.integers(2, 4)), rng) for _ in range(3))
    assert vee(f, vee(g, h)).equals(vee(vee(f, g), h))


def test_dg_suite_small():
    rep = verify_dg_suite(SMALL["k[e]"], trials=10, seed=2, cocycle_pairs=3)
    assert rep["ok"], rep["failures"]


def test_first_order_examples():
    A = SMALL["k[e]"]
    rng = np.random.default_rng(0)
    z = Cochain.zero(A, 2, 2)
    assert first_order(z)["associative"]
    f = random_cochain(A, 1, 2, rng)
    r = first_order(coboundary(f), z)
    assert r["associative"] and r["cocycle"] and r["equivalent"] and r["transport_ok"]
    e = A.index_of("e")
    beta = Cochain.from_dict(A, 2, 2, {((e, e), (0, 0)): 1})
    r = first_order(beta)
    assert r["cocycle"] is False and r["associative"] is False and r["witness"] is not None


def test_mc_examples():
    A = SMALL["k[x]/x3"]
    zeros = [Cochain.zero(A, 2, m + 1) for m in (1, 2, 3)]
    assert mc_check(zeros)["pass"]
    # order 1 is the cocycle condition
    cyc = cocycle_basis(A, 2, 2)
    assert mc_check([cyc[0]])["pass"]
    notcyc = Cochain.from_dict(A, 2, 2, {((1, 1), (0, 0)): 1})
    if not coboundary(notcyc).is_zero():
        assert mc_check([notcyc])["failing_order"] == 1


def test_obstruction_is_cocycle():
    A = SMALL["k[x]/x3"]
    rng = np.random.default_rng(4)
    cyc = cocycle_basis(A, 2, 2)
    c = Cochain.zero(A, 2, 2)
    for x in cyc:
        c = c + x.scale(int(rng.integers(-2, 3)))
    r = mc_check([c, Cochain.zero(A, 2, 3)])
    if not r["pass"]:
        assert r["obstruction_is_cocycle"]


def test_gauge_examples():
    A = SMALL["k[e]"]
    rng = np.random.default_rng(2)
    betas = [random_cochain(A, 2, 2, rng)]
    zero_phi = Cochain.zero(A, 1, 2)
    assert gauge([zero_phi], betas)[0].equals(betas[0])
    phi = random_cochain(A, 1, 2, rng)
    act = gauge_action([phi], [Cochain.zero(A, 2, 2)])
    assert act[2].equals(coboundary(phi))


@pytest.fixture(scope="module")
def weyl5():
    D = DeformationDatum(["x", "y"], ["x*y - y*x"], [("x*y - y*x", "t")], t_order=2, cap=5)
    return D, build_A_phi(D)


def test_build_A_phi_rewrite(weyl5):
    D, ap = weyl5
    assert "y*x -> x*y - t" in ap.rewrite.describe()
    labels = ap.algebra.labels
    assert "x*t" in labels and "t*x" in labels


def test_flatness_examples(weyl5):
    D, ap = weyl5
    assert flatness_check(ap)["flat"]
    D0 = DeformationDatum(["x", "y"], ["x*y - y*x"], [], t_order=2, cap=5)
    assert flatness_check(build_A_phi(D0))["flat"]
    De = DeformationDatum(["e"], ["e*e"], [("e*e", "t")], t_order=2, cap=5)
    assert not flatness_check(build_A_phi(De))["flat"]


def test_mc_weyl_low_order(weyl5):
    D, ap = weyl5
    betas = ap.t_cochains()
    assert mc_check(betas, max_input_weight=5)["pass"]


def test_anick_examples():
    r = anick(["x", "y"], ["x*y - y*x"], 4)
    assert r["composition_zero"] and r["exact"] and r["H3_zero"]
    r = anick(["x", "y"], [], 3)
    assert r["composition_zero"]
    assert minimality(["x", "y"], ["x*y - y*x"], 4)["minimal"]


def test_equivalence_examples():
    D = DeformationDatum(["x", "y"], ["x*y - y*x"], [("x*y - y*x", "t")], t_order=2, cap=5)
    same = equivalence_linear(D, D)
    assert same["equivalent"] and not any(same["f"].values())
    D2 = DeformationDatum(["x", "y"], ["x*y - y*x"], [("x*y - y*x", "2*t")], t_order=2, cap=5)
    assert "equivalent" in equivalence_linear(D, D2)


def test_solve_coboundary_round_trip():
    A = SMALL["k[e]"]
    f = random_cochain(A, 1, 2, np.random.default_rng(9))
    h = solve_coboundary(coboundary(f), 1)
    assert h is not None and coboundary(h).equals(coboundary(f))
