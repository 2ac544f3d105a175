import itertools

import pytest

from trigroup.presentation import Presentation


def brute_relators(n):
    """Every cyclically reduced length-3 word over ``n`` generators, by filtering all words."""
    letters = range(2 * n)
    return [
        w
        for w in itertools.product(letters, repeat=3)
        if w[0] != w[1] ^ 1 and w[1] != w[2] ^ 1 and w[2] != w[0] ^ 1
    ]


@pytest.fixture
def words():
    """Parse 'aab' style words over a=g1, b=g2, c=g3 (capitals are inverses)."""

    def parse(spec, n=None):
        rels = []
        for w in spec.split():
            rels.append(tuple(2 * (ord(ch.lower()) - ord("a")) + (1 if ch.isupper() else 0) for ch in w))
        size = n or max(x // 2 + 1 for r in rels for x in r)
        return Presentation(size, tuple(rels))

    return parse


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def report():
    """Record the one-line verdict of an acceptance criterion."""

    def record(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
