import pytest


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="executa as reproduções lentas")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="precisa de --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def kk_simple():
    from services.problems import get_problem

    return get_problem("kk-simple")


@pytest.fixture(scope="session")
def kk_simple_para(kk_simple):
    from services.field import desingularize

    return desingularize(kk_simple.model, kk_simple.default_chart())


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240611)
