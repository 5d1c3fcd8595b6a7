import pytest

_LINES: dict = {}


@pytest.fixture(scope="session")
def acceptance_report():
    """Record one summary line per acceptance criterion."""

    def record(key: str, ok: bool, detail: str) -> None:
        _LINES[key] = f"{key:4s} {'PASS' if ok else 'FAIL'}  {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_LINES, key=lambda k: int(k[1:])):
        terminalreporter.write_line(_LINES[key])
