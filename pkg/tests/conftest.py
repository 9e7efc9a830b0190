"""Collects the acceptance-criterion result lines and re-emits them in
the terminal summary, so `pytest -v` shows one line per criterion even
with output capture on."""

_acceptance_lines: list[str] = []


def record_acceptance(line: str) -> None:
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
