import pytest

_ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance_report():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(_ACCEPTANCE_LINES[number])
