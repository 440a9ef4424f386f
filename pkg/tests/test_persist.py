import json

import pytest

from isplab import verify_state
from isplab.errors import CertificateFailure, ConfigError
from isplab.persist import dumps_state, load_state, save_state, state_from_json, state_to_json


@pytest.mark.parametrize("fixture", ["l1_state", "l2_state"])
def test_roundtrip_is_byte_identical(fixture, request, tmp_path):
    st = request.getfixturevalue(fixture)
    path = tmp_path / "st.json"
    save_state(st, path)
    back = load_state(path, verify=True)
    assert dumps_state(back) == path.read_text()
    assert back.alpha == st.alpha and back.D == st.D and back.L == st.L


def test_scalar_text_forms(l1_state, l2_state):
    d1 = state_to_json(l1_state)
    assert all("0x" not in a for a in d1["alpha"])
    d2 = state_to_json(l2_state)
    assert all(a.startswith(("0x", "-0x")) for a in d2["alpha"])
    assert d2["pos_to_index"][:2] == [[0, l2_state.pos_to_index[0]], [1, l2_state.pos_to_index[1]]]


def test_mutated_alpha_fails_verification(l2_state, tmp_path):
    d = state_to_json(l2_state)
    d["alpha"][20] = "0x1p+3"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(d))
    st = load_state(path)
    assert not verify_state(st, st.digests).passed
    with pytest.raises(CertificateFailure):
        load_state(path, verify=True)


def test_malformed_files(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_state(p)
    p.write_text(json.dumps({"format": "something-else"}))
    with pytest.raises(ConfigError):
        load_state(p)
    with pytest.raises(ConfigError):
        load_state(tmp_path / "missing.json")


def test_gapped_positions_rejected(l1_stage1):
    d = state_to_json(l1_stage1)
    d["pos_to_index"] = d["pos_to_index"][1:]
    with pytest.raises(ConfigError):
        state_from_json(d)
