def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance criterion lines as one block after the run."""
    import sys

    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split()[2])):
        terminalreporter.write_line(line)
