"""Collects the acceptance-criterion verdict lines and prints them after
the run, outside pytest's capture, so they show on every invocation."""

acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
