import numpy as np
import pytest

from hybridfield.array_geometry import ArrayConfig
from hybridfield.dictionaries import dft_dictionary, polar_dictionary


@pytest.fixture(scope="session")
def small_array():
    return ArrayConfig(64)


@pytest.fixture(scope="session")
def small_dicts(small_array):
    # rho_min = 1 m keeps a few distance rings per angle at N = 64
    return dft_dictionary(small_array), polar_dictionary(small_array, beta=1.2, rho_min=1.0)


@pytest.fixture(scope="session")
def desk_dicts():
    cfg = ArrayConfig(256)
    return dft_dictionary(cfg), polar_dictionary(cfg)


def nmse(h, h_hat):
    return float(np.linalg.norm(h - h_hat) ** 2 / np.linalg.norm(h) ** 2)


# one line per acceptance criterion, echoed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
