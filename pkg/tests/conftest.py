import numpy as np
import pytest

from phosim import config as cf
from phosim.engine import run


@pytest.fixture(scope="session")
def default_cfg():
    return cf.load_config()


@pytest.fixture(scope="session")
def default_scenario(default_cfg):
    return cf.build_scenario(default_cfg)


def scenario_with(**over):
    """Default scenario with nested config overrides, e.g. strategy={"name": "none"}."""
    return cf.build_scenario(cf.load_config(overrides=over))


@pytest.fixture(scope="session")
def runs():
    """Default 30 mph run for each strategy, computed once."""
    return {s: run(scenario_with(strategy={"name": s})) for s in ("proactive", "reactive", "none")}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
