import pytest
from hypothesis import settings

# fixed example streams so every run checks the same cases
settings.register_profile("repeatable", derandomize=True)
settings.load_profile("repeatable")

_CRITERIA: dict[str, str] = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line for an acceptance criterion."""
    def record(key: str, passed: bool, detail: str) -> None:
        line = f"criterion {key}: {'PASS' if passed else 'FAIL'} - {detail}"
        _CRITERIA[key] = line
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: (int("".join(c for c in k if c.isdigit())), k)):
        terminalreporter.write_line(_CRITERIA[key])
