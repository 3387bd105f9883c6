"""
Shared fixtures for the QICC test suite
"""

import json

import pytest

from estimator import Scenario

collect_ignore = ['examples']


@pytest.fixture
def reference_scenario():
    """K=2, M=2, eta=(0.3, 0.3, 0.2, 0.2), N0=2, Pc=Pt=10"""
    return Scenario(K=2, M=2, eta=(0.3, 0.3, 0.2, 0.2), N0=2.0, Pc=10.0, Pt=10.0)


@pytest.fixture
def single_device_scenario():
    """One OAC device with eta_1 = 0.6 and one communication device"""
    return Scenario(K=1, M=1, eta=(0.6, 0.4), N0=2.0, Pc=10.0, Pt=10.0)


@pytest.fixture
def asymmetric_scenario():
    return Scenario(K=3, M=1, eta=(0.35, 0.15, 0.1, 0.4), N0=2.0, Pc=10.0, Pt=10.0)


@pytest.fixture
def config_file(tmp_path):
    """Write a config dict to a JSON file and return its path"""
    def write(data, name='config.json'):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return str(path)
    return write
