import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isplab import (
    FinVector,
    Polynomial,
    apply_poly,
    certify_D,
    cyclic_approx,
    find_cyclic_poly,
    gamma,
    kn_locate,
    kn_membership,
    norm_N,
    tail_margin,
    tau_restrict,
)
from isplab.analysis import space_norm, weighted_part, witness_error
from isplab.errors import FrameError, HorizonError, PreconditionError, ZeroVectorError
from isplab.operator import to_gamma
from isplab.suites import continuity_suite, kn_d_suite, tail_suite
from isplab.vectors import E_FRAME, GAMMA_FRAME


def g(j, c=1):
    return FinVector.basis(j, c, GAMMA_FRAME)


def normalised(state, y):
    return y / norm_N(state, 1, y)


def test_weighted_part_by_hand():
    from isplab import make_space

    sp = make_space("l1_power")
    # e_0 = (1,0) has level 0: weight 2^0 p_1(e_0) = 1;  e_1 = (2,0) has level 1: 2^-1 p_2 = 1/2
    v = FinVector({0: Fraction(3), 1: Fraction(-2)})
    assert weighted_part(sp, v) == 3 + Fraction(1, 2) * 2
    assert space_norm(sp, 1, v) == 3 + 4


def test_norm_is_positive_on_nonzero(l1_state):
    for j in range(l1_state.horizon):
        assert norm_N(l1_state, 1, l1_state.u_vector(j)) > 0


def test_tau_restrict(l1_state):
    a1 = l1_state.a_(1)
    y = g(0) + g(a1) * 3
    assert tau_restrict(l1_state, 1, y) == g(0)
    with pytest.raises(FrameError):
        tau_restrict(l1_state, 1, g(l1_state.Delta[2]))


def test_kn_membership(l1_state):
    y = normalised(l1_state, g(0))
    m = kn_membership(l1_state, 1, y)
    assert m.in_set and m.norm1 == 1 and m.tau_norm1 == 1
    assert not kn_membership(l1_state, 1, y * 2).in_set
    far = normalised(l1_state, g(l1_state.a_(1)))
    assert not kn_membership(l1_state, 1, far).in_set


@pytest.mark.parametrize("n", [1, 2])
def test_certify_D_is_power_of_two_and_monotone(l1_state, n):
    D = certify_D(l1_state, n)
    assert D == l1_state.D_(n)
    assert D.denominator == 1 and D.numerator & (D.numerator - 1) == 0
    assert certify_D(l1_state, 2) >= certify_D(l1_state, 1)


def test_D_soundness_sampled(l2_state):
    rng = random.Random(7)
    for n in (1, 2):
        res = kn_d_suite(l2_state, n, 50, rng)
        assert res.passed and res.cases == 50


@pytest.mark.parametrize("ys", [[0], [1], [0, 1]])
def test_find_cyclic_poly_stage1(l1_state, ys):
    y = normalised(l1_state, sum((g(j) for j in ys[1:]), g(ys[0])))
    res = find_cyclic_poly(l1_state, 1, y)
    D2 = l1_state.Delta[2]
    assert res.P.val >= 1 and res.P.deg < D2
    # exact: P(T)y = γ_{a_1} + remainder on [Δ_2, 2Δ_2)
    img = to_gamma(l1_state, apply_poly(l1_state, res.P, y))
    expect = g(l1_state.a_(1)) + FinVector(res.remainder, GAMMA_FRAME)
    assert img == expect
    assert all(D2 <= m < 2 * D2 for m in res.remainder)
    assert res.verified and res.budget_flag


def test_find_cyclic_poly_preconditions(l1_state):
    with pytest.raises(PreconditionError):
        find_cyclic_poly(l1_state, 1, g(0) * 5)
    with pytest.raises(HorizonError):
        find_cyclic_poly(l1_state, 2, g(0))


def test_tail_suite(l1_state, l2_state):
    for st_ in (l1_state, l2_state):
        res = tail_suite(st_, 1, 25, random.Random(3))
        assert res.passed and res.cases == 25


def test_tail_margin_rejects_constant_term(l1_state):
    with pytest.raises(PreconditionError):
        tail_margin(l1_state, 1, Polynomial((1, 1)), l1_state.u_vector(20))


def test_continuity_suite(l1_state):
    for N in (1, 2):
        assert continuity_suite(l1_state, N, 30, random.Random(N)).passed


def test_kn_locate(l2_state):
    x = FinVector({0: l2_state.field.coerce(1), 4: l2_state.field.coerce(-2)}, E_FRAME)
    loc = kn_locate(l2_state, x, 1)
    assert loc.m0 == 1 and loc.M > 0
    assert [e["n_k"] for e in loc.entries] == [1, 2]
    with pytest.raises(ZeroVectorError):
        kn_locate(l2_state, FinVector({}, E_FRAME), 1)


def test_cyclic_shortcut(l2_state):
    u0 = l2_state.u_vector(0) * 3
    w = cyclic_approx(l2_state, u0, 1, Fraction(1, 4))
    assert w.shortcut and w.achieved_error == 0


@settings(max_examples=15, deadline=None)
@given(st.dictionaries(st.integers(0, 13), st.integers(-5, 5).filter(bool), min_size=1, max_size=4))
def test_cyclic_approx_random(l2_state, coords):
    F = l2_state.field
    x = FinVector({k: F.coerce(c) for k, c in coords.items()}, E_FRAME)
    w = cyclic_approx(l2_state, x, 1, Fraction(1, 4))
    assert w.achieved_error < 0.25
    assert F.close(witness_error(l2_state, x, w.Q, 1), w.achieved_error) or w.achieved_error == 0


def test_cyclic_rejects_zero(l2_state):
    with pytest.raises(ZeroVectorError):
        cyclic_approx(l2_state, FinVector({}, E_FRAME), 1, 0.25)


def test_gamma_in_span(l1_state):
    # γ_j is supported on placed positions only
    for j in range(0, l1_state.horizon, 37):
        assert set(gamma(l1_state, j).coords) <= set(l1_state.pos_to_index)
