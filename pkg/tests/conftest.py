from __future__ import annotations

import pytest

from extnfs.fixtures import TOY_ELL, TOY_P, record_fixture, toy_params
from extnfs.polyselect import PolySetup, select_polynomials


def pytest_addoption(parser) -> None:
    parser.addoption("--runslow", action="store_true", default=False, help="run slow tests")


def pytest_collection_modifyitems(config, items) -> None:
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def toy_setup() -> PolySetup:
    return select_polynomials(toy_params())


@pytest.fixture(scope="session")
def record_setup() -> PolySetup:
    return record_fixture().setup()


@pytest.fixture(scope="session")
def toy_p() -> int:
    return TOY_P


@pytest.fixture(scope="session")
def toy_ell() -> int:
    return TOY_ELL
