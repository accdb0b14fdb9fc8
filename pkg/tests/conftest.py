import pytest

_LINES: list[str] = []


@pytest.fixture
def report_line():
    """Print a criterion line and keep it for the end-of-run summary."""
    def emit(result):
        line = result.line()
        print(line)
        _LINES.append(line)
        return result
    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
