"""Shared pytest wiring.

The acceptance tests register one human-readable line per check; the
terminal-summary hook prints them after capture ends, so the lines are
visible in any run mode (with or without -s).
"""

acceptance_lines: list[str] = []


def record_acceptance_line(line: str) -> None:
    acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance checks")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
