import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report_line():
    def emit(criterion: int, ok: bool, text: str) -> None:
        line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {text}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
