from acceptance_log import summary_lines


def pytest_terminal_summary(terminalreporter):
    lines = summary_lines()
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
