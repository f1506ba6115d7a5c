from typing import Callable, Optional

import numpy as np
import pytest
from rich import print

from archsearch_mip.graphs.graph import LabeledGraph

GraphFactory = Callable[..., LabeledGraph]


@pytest.fixture(scope="function", autouse=True)
def pretty():
    # Code to run before each test
    print("\n")
    yield
    # Code to run after each test
    print("\n")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)


@pytest.fixture
def random_digraph(rng: np.random.Generator) -> GraphFactory:
    """Random digraph on ``n`` slots, the first ``k`` nodes existing."""

    def make(n: int, k: Optional[int] = None, density: float = 0.4) -> LabeledGraph:
        k = n if k is None else k
        adjacency = (rng.random((n, n)) < density).astype(np.int8)
        adjacency[k:, :] = 0
        adjacency[:, k:] = 0
        np.fill_diagonal(adjacency, 0)
        adjacency[np.arange(k), np.arange(k)] = 1
        return LabeledGraph.from_adjacency(adjacency)

    return make


@pytest.fixture
def random_cell(rng: np.random.Generator) -> GraphFactory:
    """Random upper-triangular cell with node labels (source 0, sink L-1) or edge labels."""

    def make(n: int, node_labels: Optional[int] = None, edge_labels: Optional[int] = None, density: float = 0.5) -> LabeledGraph:
        adjacency = np.triu((rng.random((n, n)) < density).astype(np.int8), k=1)
        np.fill_diagonal(adjacency, 1)
        labels = None
        if node_labels is not None:
            inner = rng.integers(1, node_labels - 1, size=max(n - 2, 0)).tolist()
            labels = [0, *inner, node_labels - 1][:n]
        edges = None
        if edge_labels is not None:
            edges = {(u, v): int(rng.integers(edge_labels)) for u in range(n) for v in range(u + 1, n) if adjacency[u, v]}
        return LabeledGraph.from_adjacency(adjacency, node_labels=labels, edge_labels=edges)

    return make
