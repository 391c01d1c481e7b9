import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    def log(line):
        ACCEPTANCE_LINES.append(line)
        print(line)

    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
