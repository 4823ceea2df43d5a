from fractions import Fraction

import pytest

from cpk import twotime as tt
from cpk.polytope import ProbTable, enumerate_classical_vertices

# Published table: rows are (x,y,z), columns (a,b,c), both in this order.
ORDER = ("000", "001", "010", "100", "011", "101", "110", "111")
PUBLISHED = """
1/2 0   0   0   0   0   0   1/2
0   0   1/2 0   0   1/2 0   0
0   0   0   1/2 1/2 0   0   0
0   1/2 0   0   0   0   1/2 0
0   1/2 0   0   0   0   1/2 0
0   0   0   1/2 1/2 0   0   0
0   0   1/2 0   0   1/2 0   0
1/2 0   0   0   0   0   0   1/2
"""


def _bits(s):
    return tuple(int(c) for c in s)


def published_table() -> ProbTable:
    mapping = {}
    for row, line in zip(ORDER, PUBLISHED.strip().splitlines()):
        for col, cell in zip(ORDER, line.split()):
            mapping[(_bits(col), _bits(row))] = Fraction(cell)
    return ProbTable.from_mapping(3, mapping)


@pytest.fixture(scope="session")
def table_one():
    return published_table()


@pytest.fixture(scope="session")
def eta():
    return tt.build_eta()


@pytest.fixture(scope="session")
def instruments():
    return tt.protocol_instruments()


@pytest.fixture(scope="session")
def vertices():
    return enumerate_classical_vertices()


_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line; printed in the terminal summary."""

    def record(number, text, passed, detail=""):
        _CRITERIA.append((number, text, passed, detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, text, passed, detail in sorted(_CRITERIA, key=lambda r: r[0]):
        mark = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{mark}] {number}. {text}" + (f"  ({detail})" if detail else ""))
