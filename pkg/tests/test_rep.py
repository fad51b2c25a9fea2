from hypothesis import given, settings, strategies as st

from ncdr.rep import (RepScheme, SPoly, _mat_mul, _trace, ev, ev_direct, ev_omega,
                      graded_commutator, nc_d, nc_i_delta, trace_ev, verify_rep_thm)

R2 = RepScheme(["x", "y"], 2)
R1 = RepScheme(["x", "y"], 1)


def test_ev_examples():
    assert ev(R2, ()) == R2.identity()
    assert ev(R2, ("x", "y")) == _mat_mul(R2.matrix("x"), R2.matrix("y"))
    comm = {("x", "y"): 1, ("y", "x"): -1}
    assert trace_ev(R2, comm) == SPoly()


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(["x", "y"]), max_size=2),
       st.lists(st.sampled_from(["x", "y"]), max_size=2))
def test_ev_multiplicative(u, v):
    assert ev(R2, tuple(u) + tuple(v)) == _mat_mul(ev(R2, tuple(u)), ev(R2, tuple(v)))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(["x", "y", "t", "dx", "dy"]), min_size=1, max_size=3))
def test_ev_matches_path_sums(word):
    from ncdr.rep import ev_word
    assert ev_word(R2, tuple(word)) == ev_direct(R2, tuple(word))


def test_ev_omega_forms():
    M = ev_omega(R2, {("dx",): 1})
    assert M[0][1] == R2.d_entry("x", 0, 1)
    M = ev_omega(R2, {("x", "dy"): 1})
    X, dY = R2.matrix("x"), R2.matrix("dy")
    assert M == _mat_mul(X, dY)


def test_trace_examples():
    assert trace_ev(R2, {("x",): 1}) == R2.entry(("x", "x", 0, 0)) + R2.entry(("x", "x", 1, 1))
    # dx dy and -dy dx have equal traces
    assert trace_ev(R2, {("dx", "dy"): 1}) == trace_ev(R2, {("dy", "dx"): -1})


def test_d_g_examples():
    f = trace_ev(R2, {("x",): 1})
    # a 0-form has nothing to contract
    assert R2.d_g(R2.entry(("x", "x", 0, 1))) == SPoly()
    # i_e dX_11 = [e, X]_11 for e = E_12: x_21
    got = R2.contract(R2.d_entry("x", 0, 0), 0, 1)
    assert got == R2.entry(("x", "x", 1, 0))
    assert R2.check_basic(f)["basic"]


def test_check_basic_examples():
    rep = R2.check_basic(R2.d_entry("x", 0, 0))
    assert not rep["basic"] and rep["witness"][0] == "contraction"


def test_abelian_case_commutators_vanish():
    w = ("x", "dy")
    assert trace_ev(R1, nc_i_delta({w: 1})) == SPoly()
    assert trace_ev(R1, graded_commutator({("x",): 1}, {("dy",): 1})) == SPoly()


def test_diagram_on_degree_one():
    f = {("x", "dy"): 1}
    eta = trace_ev(R2, f)
    assert trace_ev(R2, nc_d(f, ["x", "y"])) == R2.d_dr(eta)
    assert trace_ev(R2, nc_i_delta(f)) == R2.d_g(eta)


def test_verify_rep_small_grid():
    rep = verify_rep_thm(dims=(1, 2), max_t=1, max_odd=2, max_even=1, cap=2, n_max=1)
    assert rep["ok"], rep["failures"]
