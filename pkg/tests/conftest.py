import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240615)


def pytest_addoption(parser):
    parser.addoption("--run-long", action="store_true", default=False,
                     help="run the long wrinkle reproduction at full resolution")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-long"):
        return
    skip = pytest.mark.skip(reason="needs --run-long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)
