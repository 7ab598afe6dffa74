import numpy as np
import pytest
from hypothesis import settings

from cmnls_halfline.config import load_config
from cmnls_halfline.verification import generate_dataset

settings.register_profile("repo", max_examples=60, deadline=None)
settings.load_profile("repo")

SMALL_GRID = {"L": 20.0, "T": 1.0, "dx": 0.05, "store_dt": 0.01, "store_x_every": 1}


def small_config(**initial):
    return load_config(overrides={"name": "small", "grid": dict(SMALL_GRID), "initial": initial})


@pytest.fixture(scope="session")
def small_gaussian():
    """A coarse Gaussian dataset (quick to build, accurate to about 1e-5)."""
    return generate_dataset(small_config())


@pytest.fixture(scope="session")
def zero_data():
    return generate_dataset(small_config(u_amp=0.0, v_amp=0.0))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one PASS/FAIL line per acceptance criterion, collected by tests/test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
