import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pollinate.landscape import PoolConfig, scenario_s1  # noqa: E402


@pytest.fixture
def s1():
    return scenario_s1(0.0)


@pytest.fixture
def s1_half():
    return scenario_s1(0.5)


@pytest.fixture
def s1_pool():
    return scenario_s1(0.0, pool=PoolConfig(True, 1.0, 2.0))
