import time

import pytest

ACCEPTANCE: dict = {}
SUITE_LIMIT = 300.0
_START = time.perf_counter()


@pytest.fixture
def record():
    def _record(number: int, ok: bool, detail: str = ""):
        ACCEPTANCE[number] = (ok, detail)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    elapsed = time.perf_counter() - _START
    if 10 in ACCEPTANCE:
        # the wall-clock half of the determinism criterion can only be judged here
        ok, detail = ACCEPTANCE[10]
        ACCEPTANCE[10] = (ok and elapsed <= SUITE_LIMIT,
                          f"{detail}; whole run {elapsed:.1f}s (limit {SUITE_LIMIT:.0f}s)")
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
