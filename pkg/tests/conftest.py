import numpy as np
import pytest

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


def dyadic(lo, hi):
    """[2^-lo, ..., 2^-hi]."""
    return [2.0 ** -k for k in range(lo, hi + 1)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed in the terminal summary
CRITERIA: dict[int, str] = {}


def record(number: int, ok: bool, detail: str) -> bool:
    CRITERIA[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[k])
