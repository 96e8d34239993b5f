import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import genmark as gm  # noqa: E402

ACCEPTANCE: dict = {}


@pytest.fixture
def M0():
    return gm.build_market([0.5, 0.5], [[1, 1], [0, 4]])


@pytest.fixture
def M1():
    return gm.build_market([0.5, 0.5], [[1, 1], [0, 4], [0, 2]])


@pytest.fixture
def record_criterion():
    def record(number: int, title: str, passed: bool, detail: str = ""):
        ACCEPTANCE[number] = (title, passed, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:2d}. {title}" + (f" -- {detail}" if detail else ""))
