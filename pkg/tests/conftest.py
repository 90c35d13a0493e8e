import pytest
from hypothesis import settings

from symvi.cases import CASES
from symvi.landscape import sweep

settings.register_profile("repro", derandomize=True, deadline=None, print_blob=True)
settings.load_profile("repro")


@pytest.fixture(scope="session")
def case_sweeps():
    """Default-grid sweeps of every built-in case, computed once."""
    out = {}
    for name, case in CASES.items():
        spec, p, fam = case.build()
        out[name] = sweep(spec, p, fam)
    return out


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line; all lines are printed in the terminal summary."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
