"""Shared pytest hooks for the test suite."""

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Replay the acceptance-criteria verdict lines after the test run.

    The acceptance tests print one PASS/FAIL line per criterion; pytest's
    output capture would otherwise hide them for passing tests.
    """
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
