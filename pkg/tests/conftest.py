import itertools

import pytest

from dqsimon.gf2 import BitVector

ACCEPTANCE_LINES: list[str] = []


def bv(bits: str) -> BitVector:
    return BitVector.from_str(bits)


def naive_dot(x: str, y: str) -> int:
    return sum(int(a) * int(b) for a, b in zip(x, y)) % 2


def naive_span(vectors: list[str], width: int) -> set[str]:
    """Every 0/1 combination of the vectors, character by character."""
    out = set()
    for coeffs in itertools.product((0, 1), repeat=len(vectors)):
        acc = [0] * width
        for c, v in zip(coeffs, vectors):
            if c:
                acc = [(a + int(b)) % 2 for a, b in zip(acc, v)]
        out.add("".join(map(str, acc)))
    return out


@pytest.fixture
def acceptance_report():
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
