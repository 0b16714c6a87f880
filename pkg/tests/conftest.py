import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest


@pytest.fixture(scope="session")
def verdict(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash.setdefault(_LINES, {})

    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines[n] = line
        print(line)
        return ok

    return record


_LINES = pytest.StashKey[dict]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
