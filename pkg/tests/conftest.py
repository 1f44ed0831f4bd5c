"""Shared pytest wiring: surface acceptance verdicts after capture ends.

The acceptance tests record one PASS/FAIL line each in their module-level
``VERDICTS`` list.  Output printed inside passing tests is swallowed by
pytest's capture, so the lines are replayed here in the terminal summary,
which runs after capture is torn down and is always visible.
"""

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    mod = sys.modules.get("test_acceptance") or sys.modules.get(
        "tests.test_acceptance"
    )
    lines = getattr(mod, "VERDICTS", None) if mod else None
    if lines:
        terminalreporter.section("acceptance verdicts")
        for line in lines:
            terminalreporter.write_line(line)
