import pytest

# filled by tests/test_acceptance.py, one entry per criterion
CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str) -> str:
        CRITERIA[number] = (passed, detail)
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
        print(line)
        return line

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        passed, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")
