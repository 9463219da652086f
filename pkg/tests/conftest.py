import numpy as np
import pytest

from kuramoto_certify.engines.dynamics_engine import DynamicsEngine, PhaseState
from kuramoto_certify.engines.graph_engine import Graph, GraphEngine


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_graph(rng, n: int, density: float = 0.5, self_loops: bool = False) -> Graph:
    """随机对称邻接矩阵，不要求连通"""
    upper = np.triu(rng.random((n, n)) < density, k=1)
    return Graph(upper | upper.T, self_loops=self_loops)


def random_state(rng, n: int) -> PhaseState:
    return PhaseState(rng.uniform(-np.pi, np.pi, size=n))


def four_group_state(n_per_group: int, phi: float) -> PhaseState:
    centers = phi + 0.5 * np.pi * np.arange(4)
    return PhaseState(np.repeat(centers, n_per_group))


@pytest.fixture
def c4_twisted():
    return GraphEngine.cycle(4), DynamicsEngine.twisted_state(4, 1)
