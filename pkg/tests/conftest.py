import numpy as np
import pytest

from iwp.model import FrictionParams, MechParams

DT = 0.005


@pytest.fixture
def mp():
    return MechParams()


@pytest.fixture
def fp():
    return FrictionParams()


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_states(rng, n, scale=(3.0, 3.0, 3.0)):
    return rng.uniform(-1, 1, size=(n, 3)) * np.asarray(scale)


# criterion label -> one-line verdict, filled by test_acceptance
ACCEPTANCE: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
