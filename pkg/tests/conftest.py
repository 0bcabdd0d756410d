"""Acceptance-line collection and the whole-suite runtime budget."""

import time

import pytest

SUITE_BUDGET = 60.0

_lines: dict[int, str] = {}
_start = [0.0]


def pytest_sessionstart(session):
    _start[0] = time.perf_counter()


@pytest.fixture
def criterion():
    """``criterion(number, ok, detail)`` records one acceptance line."""

    def record(number: int, ok: bool, detail: str) -> bool:
        _lines[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok

    return record


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _start[0]
    _start.append(elapsed)
    # the budget only applies to a full run, not to a selection of tests
    if session.testscollected >= 150 and elapsed >= SUITE_BUDGET:
        session.exitstatus = pytest.ExitCode.TESTS_FAILED


def pytest_terminal_summary(terminalreporter):
    if not _lines:
        return
    elapsed = _start[-1] if len(_start) > 1 else time.perf_counter() - _start[0]
    terminalreporter.section("acceptance criteria")
    for number in sorted(_lines):
        terminalreporter.write_line(_lines[number])
    ok = elapsed < SUITE_BUDGET
    terminalreporter.write_line(
        f"suite runtime: {'PASS' if ok else 'FAIL'}  {elapsed:.1f} s (budget {SUITE_BUDGET:.0f} s)"
    )
