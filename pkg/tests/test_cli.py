import io
import json
from fractions import Fraction

import pytest

from isplab.cli import RunConfig, main, parse_vector, run_command
from isplab.errors import ConfigError, DescriptorMismatch
from isplab.spaces import make_space


@pytest.fixture(scope="module")
def state_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "st.json"
    assert main(["build", "l2_power", "--stages", "2", "--out", str(path)]) == 0
    return path


def test_parse_vector():
    sp = make_space("l1_power")
    v = parse_vector("e(1,0) - 1/2*e(2,3) + 0.25*e(1,0)", sp)
    assert v.coords == {sp.enum((1, 0)): Fraction(5, 4), sp.enum((2, 3)): Fraction(-1, 2)}
    om = make_space("omega")
    assert parse_vector("3*e(2)", om).coords == {1: 3}


@pytest.mark.parametrize("bad", ["", "e(1,0) e(2,0)", "e(1,0) - e(1,0)", "x(1)", "e(0,1)"])
def test_parse_vector_rejects(bad):
    with pytest.raises((ConfigError, DescriptorMismatch)) as info:
        parse_vector(bad, make_space("l1_power"))
    assert info.value.exit_code == 2


def test_classify_output(capsys, tmp_path):
    cfg = tmp_path / "l2.json"
    cfg.write_text(json.dumps({"space": "l2_power"}))
    assert main(["classify", str(cfg)]) == 0
    assert capsys.readouterr().out.strip() == "ISP: no (infinite codimension at every level)"
    assert main(["classify", "omega_plus_l2"]) == 0
    assert capsys.readouterr().out.startswith("ISP: yes")


def test_exit_codes(tmp_path, state_file):
    assert main(["classify", str(tmp_path / "nope.json")]) == 2
    assert main(["build", "omega", "--stages", "1", "--out", str(tmp_path / "o.json")]) == 2
    assert main(["build", "l2_power", "--stages", "0"]) == 2
    assert main(["build", "l2_power", "--stages", "3", "--out", str(tmp_path / "s.json")]) == 3
    assert main(["cyclic", str(state_file), "--vector", "e(1,0)", "--eps", "0"]) == 2
    # index far beyond the committed horizon
    assert main(["cyclic", str(state_file), "--vector", "e(1,5000)", "--eps", "0.25"]) == 3


def test_keep_partial(tmp_path):
    out = tmp_path / "partial.json"
    rc = main(["build", "l2_power", "--stages", "3", "--out", str(out), "--keep-partial"])
    assert rc == 3
    assert json.loads(out.read_text())["stages_done"] == 2


def test_verify_pass_and_tamper(state_file, tmp_path, capsys):
    assert main(["verify", str(state_file), "--samples", "5"]) == 0
    assert "verify: PASS" in capsys.readouterr().out
    d = json.loads(state_file.read_text())
    d["pos_to_index"][3], d["pos_to_index"][5] = [3, d["pos_to_index"][5][1]], [5, d["pos_to_index"][3][1]]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(d))
    assert main(["verify", str(bad), "--samples", "2"]) == 4


def test_cyclic_and_report(state_file, tmp_path, capsys):
    w = tmp_path / "w.json"
    rc = main(["cyclic", str(state_file), "--vector", "e(1,0)+e(2,3)", "--norm", "1", "--eps", "0.25", "--out", str(w)])
    assert rc == 0
    doc = json.loads(w.read_text())
    assert float.fromhex(doc["achieved_error"]) < 0.25
    capsys.readouterr()
    assert main(["report", str(state_file), "--witness", str(w)]) == 0
    text = capsys.readouterr().out
    assert "replay matches" in text and "Delta_n" in text
    assert main(["report", str(state_file), "--format", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert [s["a"] for s in rep["stages"]] == [13, 580]


def test_build_is_deterministic(state_file, tmp_path):
    again = tmp_path / "again.json"
    assert main(["build", "l2_power", "--stages", "2", "--out", str(again), "--seed", "9"]) == 0
    assert again.read_bytes() == state_file.read_bytes()


def test_run_command_direct():
    out = io.StringIO()
    assert run_command(RunConfig("classify", "l1_power"), out) == 0
    assert out.getvalue().startswith("ISP: no")
