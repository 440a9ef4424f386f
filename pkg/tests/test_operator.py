from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isplab import ConstructionState, FinVector, Polynomial, apply_poly, apply_T, gamma, make_space
from isplab.errors import HorizonError
from isplab.operator import apply_poly_horner, gamma_u, to_e, to_gamma, to_u
from isplab.vectors import E_FRAME, GAMMA_FRAME, U_FRAME


@pytest.fixture
def toy():
    """Two hand-made stages: Δ = 0,1,4,13 with a_1 = 3, a_2 = 9 and u_j = e_j."""
    sp = make_space("l1_power")
    return ConstructionState(
        sp,
        stages_done=2,
        Delta=[0, 1, 4, 13],
        a=[3, 9],
        s=[3, 12],
        N=[1, 1],
        pos_to_index=list(range(13)),
        alpha=[Fraction(1)] * 13,
    )


def u(j, c=1):
    return FinVector.basis(j, Fraction(c), U_FRAME)


def test_T_rule_by_hand(toy):
    assert apply_T(toy, u(0)) == u(1)
    # j = a_1 - 1: T u_2 = u_3 + u_0
    assert apply_T(toy, u(2)) == u(3) + u(0)
    # end of block 1: T u_3 = u_4 - u_1
    assert apply_T(toy, u(3)) == u(4) - u(1)
    # j = a_2 - 1: T u_8 = u_9 + u_0
    assert apply_T(toy, u(8)) == u(9) + u(0)
    assert apply_T(toy, u(5)) == u(6)
    with pytest.raises(HorizonError):
        apply_T(toy, u(12))


def test_gamma_by_hand(toy):
    assert gamma_u(toy, 3) == FinVector({3: 1, 0: 1}, U_FRAME)
    assert gamma_u(toy, 4) == FinVector({4: 1}, U_FRAME)
    # block 2 covers [9, 13): γ_10 = u_10 + γ_1
    assert gamma_u(toy, 10) == FinVector({10: 1, 1: 1}, U_FRAME)
    assert gamma_u(toy, 12) == FinVector({12: 1, 3: 1, 0: 1}, U_FRAME)
    assert gamma(toy, 12) == FinVector({12: 1, 3: 1, 0: 1}, E_FRAME)


def test_gamma_is_orbit(toy):
    v = u(0)
    for j in range(toy.horizon):
        assert to_u(toy, FinVector.basis(j, 1, GAMMA_FRAME)) == v
        if j + 1 < toy.horizon:
            v = apply_T(toy, v)


def test_frames_roundtrip(toy):
    v = FinVector({0: Fraction(2), 3: Fraction(-1), 11: Fraction(5, 3)}, U_FRAME)
    g = to_gamma(toy, v)
    assert to_u(toy, g) == v
    assert to_u(toy, to_e(toy, v)) == v


def test_polynomial_basics():
    P = Polynomial((0, 2, 0, -3, 0, 0))
    assert P.deg == 3 and P.val == 1
    assert P.abs_sum() == 5
    assert Polynomial(()).deg is None
    assert Polynomial.monomial(2, 7).items() == [(2, 7)]


@given(
    st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=5), min_size=1, max_size=5),
    st.dictionaries(st.integers(0, 6), st.fractions(min_value=-3, max_value=3, max_denominator=5), min_size=1, max_size=4),
)
def test_poly_convolution_matches_horner(toy_coeffs, coords):
    sp = make_space("l1_power")
    state = ConstructionState(
        sp, stages_done=2, Delta=[0, 1, 4, 13], a=[3, 9], s=[3, 12], N=[1, 1],
        pos_to_index=list(range(13)), alpha=[Fraction(1)] * 13,
    )
    P = Polynomial(tuple(toy_coeffs))
    v = FinVector(coords, U_FRAME)
    assert apply_poly(state, P, v, U_FRAME) == apply_poly_horner(state, P, v)


# on a real build


def test_gamma_matches_iterated_T(l1_state):
    v = l1_state.u_vector(0)
    for j in range(l1_state.horizon):
        assert gamma(l1_state, j) == v
        if j + 1 < l1_state.horizon:
            v = apply_T(l1_state, v, E_FRAME)


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_T_linear(l1_state, data):
    H = l1_state.horizon
    keys = st.integers(0, H - 2)
    cf = st.fractions(min_value=-4, max_value=4, max_denominator=9)
    a = FinVector(data.draw(st.dictionaries(keys, cf, max_size=4)), U_FRAME)
    b = FinVector(data.draw(st.dictionaries(keys, cf, max_size=4)), U_FRAME)
    c = data.draw(cf)
    assert apply_T(l1_state, a + b * c) == apply_T(l1_state, a) + apply_T(l1_state, b) * c
