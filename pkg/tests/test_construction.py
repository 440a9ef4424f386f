import pytest

from isplab import build, init_construction, make_space, nn_schedule
from isplab.errors import ConstructionRefused, StageBudgetExceeded
from isplab.persist import dumps_state

# frozen regression values for the default enumeration
FROZEN = {
    "l2_power": {"Delta": [0, 1, 14, 594], "a": [13, 580], "s": [13, 593], "log2_D": [10, 37]},
    "l1_power": {"Delta": [0, 1, 14, 594], "a": [13, 580], "s": [13, 593], "log2_D": [10, 37]},
}


def test_schedule():
    assert [nn_schedule(m) for m in range(1, 11)] == [1, 1, 2, 1, 2, 3, 1, 2, 3, 4]
    with pytest.raises(ValueError):
        nn_schedule(0)


@pytest.mark.parametrize("name", ["omega", "omega_power", "omega_plus_l2"])
def test_refuses_isp_spaces(name):
    with pytest.raises(ConstructionRefused):
        init_construction(make_space(name))


@pytest.mark.parametrize("fixture,name", [("l2_state", "l2_power"), ("l1_state", "l1_power")])
def test_frozen_parameters(fixture, name, request):
    st = request.getfixturevalue(fixture)
    want = FROZEN[name]
    assert st.Delta == want["Delta"] and st.a == want["a"] and st.s == want["s"]
    assert [round(st.field.log2(d)) for d in st.D] == want["log2_D"]


def test_structural_invariants(l1_state):
    st = l1_state
    for n in (1, 2):
        D, a = st.Delta[n], st.a_(n)
        assert st.Delta[n + 1] == a + D and a > 2 * D
        # every index up to s_{n+1} is placed before Δ_{n+1}
        assert set(range(st.s_(n + 1) + 1)) <= set(st.pos_to_index[: st.Delta[n + 1]])
    assert len(set(st.pos_to_index)) == len(st.pos_to_index)
    assert all(x > 0 for x in st.alpha)


def test_block_levels(l1_state):
    st, sp = l1_state, l1_state.space
    for n in (1, 2):
        for t in range(st.Delta[n]):
            assert sp.level(st.pos_to_index[st.a_(n) + t]) == st.N_(n)


def test_exact_and_float_builds_agree_on_indices(l1_state):
    st = build(make_space("l1_power", "binary64"), 2)
    assert st.pos_to_index == l1_state.pos_to_index
    assert st.Delta == l1_state.Delta


def test_budget_guard():
    with pytest.raises(StageBudgetExceeded):
        build(make_space("l2_power"), 2, max_positions=100)
    with pytest.raises(StageBudgetExceeded):
        build(make_space("l1_power"), 2, max_exact_bits=1000)


def test_deterministic(l2_state):
    again = build(make_space("l2_power"), 2)
    assert dumps_state(again) == dumps_state(l2_state)


def test_progress_callback():
    seen = []
    build(make_space("l2_power"), 1, progress=lambda s: seen.append(s.stages_done))
    assert seen == [1]
