import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tailchain.distributions import cached_backward_sampler  # noqa: E402
from tailchain.tail_index import GarchParams, solve_tail_index  # noqa: E402


@pytest.fixture(scope="session")
def garch():
    p = GarchParams(1e-6, 0.15, 0.84)
    return p, solve_tail_index(p).alpha


@pytest.fixture(scope="session")
def arch():
    p = GarchParams(1e-6, 0.99, 0.0)
    return p, solve_tail_index(p).alpha


@pytest.fixture(scope="session")
def garch_table(garch):
    return cached_backward_sampler(*garch)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)
