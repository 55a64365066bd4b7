import numpy as np
import pytest

from gnn_risk.graph import Graph


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def random_connected_graph(n, extra_edges, rng):
    """A random spanning tree plus ``extra_edges`` random chords."""
    order = rng.permutation(n)
    edges = [(int(order[i]), int(order[rng.integers(i)])) for i in range(1, n)]
    for _ in range(extra_edges):
        u, v = rng.choice(n, size=2, replace=False)
        edges.append((int(u), int(v)))
    return Graph.from_edges(n, edges)


@pytest.fixture
def connected_graph(rng):
    return random_connected_graph(8, 6, rng)
