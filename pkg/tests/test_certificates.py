import math

import pytest

from isplab import verify_certificates, verify_state
from isplab.certificates import CONDITIONS, CertificateReport, _window_max, content_digest


def mutated(state, fn):
    s = state.copy()
    s.pos_to_index = list(s.pos_to_index)
    s.alpha = list(s.alpha)
    s.a = list(s.a)
    fn(s)
    s.clear_cache()
    return s


def halve_alpha_a(s, n=1):
    s.alpha[s.a_(n)] = s.alpha[s.a_(n)] / 2


def swap_staircase(s, n=2):
    i, j = 2 * s.Delta[n], s.a_(n) - 1
    s.pos_to_index[i], s.pos_to_index[j] = s.pos_to_index[j], s.pos_to_index[i]


def shrink_a(s, n=2):
    s.a[n - 1] -= 1


def zero_alpha(s, n=2):
    s.alpha[s.a_(n) - 1] = s.field.zero()


def break_final1(s, n=2):
    s.alpha[s.a_(n)] = s.alpha[s.a_(n)] * s.field.pow2(64)


FAULTS = [
    ("halve alpha_a", halve_alpha_a, 1, "K1"),
    ("swap staircase", swap_staircase, 2, "finalcont4"),
    ("shrink a_n", shrink_a, 2, "param"),
    ("zero alpha", zero_alpha, 2, "finalcont2"),
    ("violate final1", break_final1, 2, "final1"),
]


def test_window_max():
    assert _window_max([5, 1, 4, 2, 3], 3) == [4, 4, 3, 3, None]
    assert _window_max([1, 2], 1) == [None, None]


@pytest.mark.parametrize("fixture", ["l1_state", "l2_state"])
def test_all_conditions_pass(fixture, request):
    state = request.getfixturevalue(fixture)
    for n in (1, 2):
        rep = verify_certificates(state, n)
        assert rep.passed, rep.failures()
        names = {c.condition for c in rep.checks}
        expected = set(CONDITIONS) if n >= 2 else set(CONDITIONS) - {"tail1", "tail1bis", "tail2", "tail3", "final2"}
        assert expected <= names
        assert all(c.margin >= 0 for c in rep.checks)


def test_stored_reports_match_recomputation(l1_state):
    assert verify_certificates(l1_state, 2).to_json() == l1_state.certificates[1].to_json()
    # once stage 2 exists, finalcont4 of stage 1 also covers its last position
    fresh, stored = verify_certificates(l1_state, 1), l1_state.certificates[0]
    for c in fresh.checks:
        old = stored.get(c.condition)
        extra = 1 if c.condition == "finalcont4" else 0
        assert (c.passed, c.count) == (old.passed, old.count + extra)


def test_report_json_roundtrip(l2_state):
    rep = l2_state.certificates[1]
    back = CertificateReport.from_json(rep.to_json())
    assert back.to_json() == rep.to_json()
    assert back.digest() == rep.digest()


@pytest.mark.parametrize("name,fault,stage,condition", FAULTS, ids=[f[0] for f in FAULTS])
def test_fault_injection(l1_state, name, fault, stage, condition):
    bad = mutated(l1_state, fault)
    rep = verify_certificates(bad, stage)
    assert condition in rep.failures()
    assert not verify_state(bad, l1_state.digests).passed


def test_failing_margin_is_negative(l1_state):
    bad = mutated(l1_state, break_final1)
    chk = verify_certificates(bad, 2).get("final1")
    assert not chk.passed and chk.margin < 0
    assert chk.worst == bad.a_(2)


def test_digest_detects_index_change(l2_state):
    bad = mutated(l2_state, lambda s: s.pos_to_index.__setitem__(5, s.pos_to_index[5]))
    assert content_digest(bad, 1) == content_digest(l2_state, 1)

    def bump(s):
        s.alpha[-1] = s.alpha[-1] * 2

    bad = mutated(l2_state, bump)
    result = verify_state(bad, l2_state.digests)
    assert (2, "digest") in result.failures()


def test_margins_finite_or_inf(l2_state):
    for rep in l2_state.certificates:
        for c in rep.checks:
            assert c.margin >= 0 and not math.isnan(c.margin)
