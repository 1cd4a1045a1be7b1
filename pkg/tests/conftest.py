import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qsecret.qcore import DensityMatrix  # noqa: E402

SINGLET = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


@pytest.fixture
def singlet():
    return DensityMatrix.from_vector(SINGLET, (2, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_density(dims, rng, rank=None):
    n = int(np.prod(dims))
    rank = rank or n
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    m = g @ g.conj().T
    return DensityMatrix(tuple(dims), m / np.trace(m).real)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
