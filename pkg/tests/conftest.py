import pytest

_LINES = []


@pytest.fixture
def verdict():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(label, checks, elapsed=None, limit=None):
        failed = [name for name, ok in checks if not ok]
        if limit is not None:
            if elapsed > limit:
                failed.append(f"runtime {elapsed:.1f}s > {limit}s")
        status = "FAIL" if failed else "PASS"
        timing = f" [{elapsed:.1f}s]" if elapsed is not None else ""
        line = f"{status} {label}{timing}"
        if failed:
            line += ": " + "; ".join(failed)
        _LINES.append(line)
        print(line)
        return not failed

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance")
        for line in _LINES:
            terminalreporter.write_line(line)
