import numpy as np
import pytest

from bnsp.params import FluidParams

_CRITERIA = pytest.StashKey[list]()


@pytest.fixture
def p():
    return FluidParams()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def criterion_log(request):
    """List collecting ``PASS``/``FAIL criterion N`` lines for the terminal summary."""
    return request.config.stash.setdefault(_CRITERIA, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
