import pytest

from compact_routing.graphs import generate_uniform
from compact_routing.harness import sample_graph


@pytest.fixture(scope="session")
def g64():
    return sample_graph(64, 1, 3).g


@pytest.fixture(scope="session")
def g128():
    return sample_graph(128, 1, 3).g


@pytest.fixture(scope="session")
def g_small():
    return generate_uniform(24, 5)
