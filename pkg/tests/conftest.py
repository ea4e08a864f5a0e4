import pytest

from fairrank.rng import XorShift64Star

_ACCEPTANCE: list[tuple[bool, str]] = []


@pytest.fixture
def rng():
    return XorShift64Star(20240601)


@pytest.fixture
def record():
    """Record one pass/fail line for the acceptance summary."""

    def _record(ok: bool, line: str) -> bool:
        _ACCEPTANCE.append((ok, line))
        print(("PASS " if ok else "FAIL ") + line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for ok, line in _ACCEPTANCE:
        terminalreporter.write_line(("PASS " if ok else "FAIL ") + line)
