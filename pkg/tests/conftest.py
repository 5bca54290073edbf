import importlib.resources

import pytest

from markab import benchmark_system, load_chain


@pytest.fixture(scope="session")
def fixture_dir():
    return importlib.resources.files("markab") / "fixtures"


@pytest.fixture(scope="session")
def fig2(fixture_dir):
    """The shipped pair of 4-state chains with uniform vs shifted 2-word laws."""
    return (
        load_chain(fixture_dir / "fig2_left.json"),
        load_chain(fixture_dir / "fig2_right.json"),
    )


@pytest.fixture(scope="session")
def benchmark():
    """(system, exact oracle) for the built-in five-region benchmark."""
    return benchmark_system()
