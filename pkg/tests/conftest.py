import pytest

from _acceptance import RESULTS, TITLES
from isplab import build, make_space


@pytest.fixture(scope="session")
def l2_state():
    return build(make_space("l2_power"), 2)


@pytest.fixture(scope="session")
def l1_state():
    return build(make_space("l1_power"), 2)


@pytest.fixture(scope="session")
def l1_stage1():
    return build(make_space("l1_power"), 1)


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(TITLES):
        if n not in RESULTS:
            tr.write_line(f"criterion {n:>2} NOT RUN  {TITLES[n]}")
            continue
        ok, detail = RESULTS[n]
        line = f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {TITLES[n]}"
        if detail:
            line += f": {detail}"
        tr.write_line(line)
