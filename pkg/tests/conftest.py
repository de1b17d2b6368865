import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # Surface the acceptance suite's one-line-per-criterion report even when
    # everything passes (pytest otherwise swallows captured stdout).
    mod = sys.modules.get("test_acceptance")
    report = getattr(mod, "REPORT", None) if mod else None
    if report:
        terminalreporter.section("acceptance criteria")
        for line in report:
            terminalreporter.write_line(line)
