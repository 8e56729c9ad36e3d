import pytest

from robinpart.grid import make_grid
from robinpart.optimizer import OptimizerConfig, optimize


@pytest.fixture(scope="session")
def unit_grid64():
    return make_grid([1.0, 1.0], 1 / 64)


@pytest.fixture(scope="session")
def k2_run(unit_grid64):
    config = OptimizerConfig(grid=unit_grid64, k=2, beta=1.0, seed=42)
    state, trace = optimize(config)
    return config, state, trace


@pytest.fixture(scope="session")
def k4_run(unit_grid64):
    config = OptimizerConfig(grid=unit_grid64, k=4, beta=1.0, seed=42)
    state, trace = optimize(config)
    return config, state, trace
