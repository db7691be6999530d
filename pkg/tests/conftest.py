import sys

import numpy as np
import pytest

from d2dcache.config import NetworkConfig, load_config
from d2dcache.energy import EnergyParams


@pytest.fixture(scope="session")
def table_config():
    return load_config()


@pytest.fixture(scope="session")
def table_network(table_config):
    return table_config[0]


@pytest.fixture(scope="session")
def table_energy_params(table_config):
    network, content, _ = table_config
    return EnergyParams.from_config(network, content)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def default_network():
    return NetworkConfig()


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
