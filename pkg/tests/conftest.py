import os
import sys

from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    import _gate

    if _gate.LINES:
        terminalreporter.section("acceptance criteria")
        for line in _gate.LINES:
            terminalreporter.write_line(line)
