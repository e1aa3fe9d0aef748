from fractions import Fraction as F
from pathlib import Path

import pytest

from aifvmc.core import ProblemSpec, StateSpec
from aifvmc.io import read_code

DATA = Path(__file__).parent / "data"

A = StateSpec(F(1), (F(1, 2), F(1, 2)))
B = StateSpec(F(3, 4), (F(1, 4), F(3, 4)))
C = StateSpec(F(2), (F(1), F(0)))
D = StateSpec(F(3, 2), (F(1, 2), F(1, 2)))


@pytest.fixture
def four_chain() -> ProblemSpec:
    """Two types with two states each; the optimum is (B, D) at x = 3/5, cost 6/5."""
    return ProblemSpec(2, ((A, B), (C, D)))


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def example_code():
    """AIFV-3 code over {a,b,c,d} with c->000, b->1 (degree 2) in T_0, a->empty in T_2, b->010 in T_1."""
    return read_code(DATA / "aifv3_example.json")


_VERDICTS: list[str] = []


@pytest.fixture(scope="session")
def verdict():
    """Record a one-line PASS/FAIL verdict, echoed again in the terminal summary."""

    def record(label: str, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'} {label}" + (f" ({detail})" if detail else "")
        print(line)
        _VERDICTS.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
