"""Collects the acceptance verdicts so they are listed at the end of every run."""

VERDICTS = []


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(VERDICTS, key=lambda s: int(s.split()[2].rstrip(":"))):
        terminalreporter.write_line(line)
