import pytest

_VERDICTS = []


@pytest.fixture
def verdict():
    """Records one PASS/FAIL line for an acceptance check, then asserts.

    The lines are replayed in a terminal section after the run, so the
    log always carries one verdict per check even though pytest captures
    in-test output.
    """
    def record(name, ok, detail):
        line = "%s %s: %s" % ("PASS" if ok else "FAIL", name, detail)
        _VERDICTS.append(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance checks")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
