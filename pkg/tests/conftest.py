import pytest

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def report():
    """Record the one-line verdict of an acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> None:
        _ACCEPTANCE[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(_ACCEPTANCE[number])

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
