import numpy as np
import pytest

from _report import RESULTS


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(RESULTS, key=lambda s: int(s.split("-")[1])):
        terminalreporter.write_line(RESULTS[name])
