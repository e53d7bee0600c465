import pytest

# Filled by tests/test_acceptance.py: (criterion, passed, detail)
ACCEPTANCE_LINES: list[tuple[str, str, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for crit, verdict, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"[{verdict}] {crit}: {detail}")


@pytest.fixture
def record_acceptance():
    def record(criterion: str, passed: bool | None, detail: str):
        verdict = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        ACCEPTANCE_LINES.append((criterion, verdict, detail))

    return record
