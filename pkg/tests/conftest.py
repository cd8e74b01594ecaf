import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for an acceptance criterion.

    Usage: ``with criterion("3 oracle equivalence") as c: c.detail = ...; assert ...``
    """

    class _Rec:
        def __init__(self, name):
            self.name = name
            self.detail = ""

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            status = "PASS" if exc_type is None else "FAIL"
            line = f"[{status}] criterion {self.name}"
            if self.detail:
                line += f" -- {self.detail}"
            ACCEPTANCE_LINES.append(line)
            print(line)
            return False

    return _Rec


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
