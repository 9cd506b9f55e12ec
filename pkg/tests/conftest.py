import numpy as np
import pytest

from oscim.problem import WeightedGraph, gen_instance, maxcut_to_ising

STAR_GROUND = [1, 1, -1, 1]


@pytest.fixture
def star_graph():
    return gen_instance("star", 4)


@pytest.fixture
def star(star_graph):
    return maxcut_to_ising(star_graph)


@pytest.fixture
def edge():
    return maxcut_to_ising(WeightedGraph(2, ((0, 1, 1.0),)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_J():
    """Factory for dense symmetric couplings with zero diagonal."""

    def make(rng, n, scale=1.0):
        J = np.triu(rng.normal(scale=scale, size=(n, n)), 1)
        return J + J.T

    return make
