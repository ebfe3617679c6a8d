import numpy as np
import pytest
from scipy.stats import unitary_group


def random_unitary(rng):
    return unitary_group.rvs(2, random_state=rng)


def random_passive(rng, min_sv=0.05):
    """U diag(s) V with singular values in [min_sv, 1]."""
    s = np.sort(rng.uniform(min_sv, 1.0, 2))[::-1]
    return random_unitary(rng) @ np.diag(s) @ random_unitary(rng)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
