"""
Tests for the shortest-path, node and edge kernels and their feature maps.
"""

import itertools
import math

import networkx as nx
import numpy as np
import pytest

from archsearch_mip.exceptions import KernelSizeMismatchError, LabelVocabularyError
from archsearch_mip.graphs.graph import LabeledGraph
from archsearch_mip.graphs.space import LabelVocabulary, enumerate_space, nas_bench_201
from archsearch_mip.kernels.features import featurize, gram, gram_components, self_components
from archsearch_mip.kernels.graph_kernels import (
    KernelParams,
    combined_kernel,
    edge_kernel,
    infer_vocabulary,
    linear_kernel,
    linear_kernel_range,
    node_kernel,
    path_counts,
    sp_kernel,
)


def _distances(g: LabeledGraph) -> dict:
    digraph = nx.DiGraph()
    nodes = [v for v in range(g.n) if g.node_exists[v]]
    digraph.add_nodes_from(nodes)
    digraph.add_edges_from(g.edges)
    lengths = dict(nx.all_pairs_shortest_path_length(digraph))
    return {(u, v): lengths[u].get(v, math.inf) for u in nodes for v in nodes}


def _sp_oracle(g1: LabeledGraph, g2: LabeledGraph) -> float:
    """Quadruple sum over ordered node pairs of both graphs."""
    d1, d2 = _distances(g1), _distances(g2)
    labels1 = g1.node_labels or [0] * g1.n
    labels2 = g2.node_labels or [0] * g2.n
    total = 0
    for (u, v), duv in d1.items():
        for (a, b), dab in d2.items():
            if labels1[u] == labels2[a] and labels1[v] == labels2[b] and duv == dab:
                total += 1
    return total / (g1.num_nodes**2 * g2.num_nodes**2)


class TestShortestPathKernel:
    """The shortest-path kernel against a direct quadruple sum."""

    def test_unlabeled_pairs(self, random_digraph, rng):
        """100 random pairs, mixed sizes, agree to 1e-12."""
        for _ in range(100):
            n1, n2 = rng.integers(1, 6, size=2)
            g1 = random_digraph(int(n1), k=int(rng.integers(1, n1 + 1)))
            g2 = random_digraph(int(n2), k=int(rng.integers(1, n2 + 1)))
            assert sp_kernel(g1, g2) == pytest.approx(_sp_oracle(g1, g2), abs=1e-12)

    def test_node_labeled_pairs(self, random_cell):
        """Labeled cells match on endpoint labels as well as distance."""
        vocabulary = LabelVocabulary(node_labels=5)
        for _ in range(50):
            g1 = random_cell(5, node_labels=5)
            g2 = random_cell(5, node_labels=5)
            assert sp_kernel(g1, g2, vocabulary) == pytest.approx(_sp_oracle(g1, g2), abs=1e-12)

    def test_unreachable_pairs_can_be_ignored(self):
        """With match_unreachable off, two edgeless graphs only share the diagonal."""
        g = LabeledGraph.from_adjacency(np.eye(3, dtype=int))
        assert sp_kernel(g, g) == pytest.approx((3 * 3 + 6 * 6) / 81)
        assert sp_kernel(g, g, match_unreachable=False) == pytest.approx(9 / 81)

    def test_symmetric_and_bounded(self, random_digraph):
        """k(a, b) = k(b, a) and values stay in [0, 1]."""
        for _ in range(30):
            g1, g2 = random_digraph(4), random_digraph(3)
            value = sp_kernel(g1, g2)
            assert value == pytest.approx(sp_kernel(g2, g1))
            assert 0.0 <= value <= 1.0

    def test_path_counts_total(self, random_digraph):
        """Every ordered pair of existing nodes lands in exactly one bucket."""
        g = random_digraph(5, k=4)
        counts = path_counts(g)
        assert counts.counts.sum() == 16
        assert counts.num_nodes == 4


class TestLabelKernels:
    """Node histogram and edge slot kernels."""

    def test_node_kernel(self):
        """Histogram inner product over n1 n2 L."""
        g1 = LabeledGraph.from_adjacency(np.eye(3, dtype=int), node_labels=[0, 1, 4])
        g2 = LabeledGraph.from_adjacency(np.eye(3, dtype=int), node_labels=[0, 1, 4])
        vocabulary = LabelVocabulary(node_labels=5)
        assert node_kernel(g1, g2, vocabulary) == pytest.approx(3 / (3 * 3 * 5))

    def test_edge_kernel_counts_shared_slots(self, random_cell):
        """Shared (slot, label) pairs over n(n-1)/2."""
        vocabulary = LabelVocabulary(edge_labels=4)
        for _ in range(50):
            g1 = random_cell(4, edge_labels=4)
            g2 = random_cell(4, edge_labels=4)
            labels1, labels2 = g1.edge_label_map(), g2.edge_label_map()
            shared = sum(1 for u, v in itertools.combinations(range(4), 2) if (u, v) in labels1 and labels1[(u, v)] == labels2.get((u, v)))
            assert edge_kernel(g1, g2, vocabulary) == pytest.approx(shared / 6)

    def test_edge_kernel_needs_equal_sizes(self, random_cell):
        """Cells with different slot counts are not comparable edge by edge."""
        with pytest.raises(KernelSizeMismatchError):
            edge_kernel(random_cell(3, edge_labels=2), random_cell(4, edge_labels=2))

    def test_node_kernel_needs_labels(self, random_digraph):
        """Unlabeled graphs have no node kernel."""
        with pytest.raises(LabelVocabularyError):
            node_kernel(random_digraph(3), random_digraph(3))

    def test_mixed_labeling_rejected(self, random_digraph, random_cell):
        """Labeled and unlabeled graphs do not share a vocabulary."""
        with pytest.raises(LabelVocabularyError):
            infer_vocabulary([random_digraph(3), random_cell(3, node_labels=3)])


class TestCombinedKernel:
    """Linear and exponential combinations."""

    def test_linear_combination(self, random_cell):
        """alpha k_sp + gamma k_e for edge-labeled cells."""
        params = KernelParams(alpha=0.7, gamma=2.5)
        vocabulary = LabelVocabulary(edge_labels=3)
        g1, g2 = random_cell(4, edge_labels=3), random_cell(4, edge_labels=3)
        expected = 0.7 * sp_kernel(g1, g2, vocabulary) + 2.5 * edge_kernel(g1, g2, vocabulary)
        assert linear_kernel(g1, g2, params, vocabulary) == pytest.approx(expected)

    def test_exponential_form(self, random_digraph):
        """sigma^2 exp of the linear combination."""
        params = KernelParams(alpha=1.5, variance=0.3, form="exponential")
        g1, g2 = random_digraph(3), random_digraph(3)
        linear = linear_kernel(g1, g2, params)
        assert combined_kernel(g1, g2, params) == pytest.approx(0.3 * math.exp(linear))

    def test_range_bounds_values(self, random_cell):
        """Every attainable linear value lies below linear_kernel_range."""
        params = KernelParams(alpha=2.0, beta=3.0)
        vocabulary = LabelVocabulary(node_labels=5)
        upper = linear_kernel_range(params, vocabulary)
        for _ in range(20):
            g1, g2 = random_cell(4, node_labels=5), random_cell(4, node_labels=5)
            assert 0.0 <= linear_kernel(g1, g2, params, vocabulary) <= upper + 1e-12


class TestFeatures:
    """Feature maps reproduce the scalar kernels."""

    @pytest.mark.parametrize("form", ["linear", "exponential"])
    def test_gram_matches_scalar_kernel(self, random_digraph, form):
        """Gram entries equal combined_kernel, including mixed sizes."""
        graphs = [random_digraph(n) for n in (2, 3, 4, 4, 3, 1)]
        params = KernelParams(alpha=1.3, variance=0.5, form=form)
        block = featurize(graphs, width=4)
        matrix = gram(block, block, params)
        for i, j in itertools.product(range(len(graphs)), repeat=2):
            assert matrix[i, j] == pytest.approx(combined_kernel(graphs[i], graphs[j], params), abs=1e-12)

    def test_labeled_gram(self, random_cell):
        """Node and edge components carry through the feature map."""
        node_cells = [random_cell(5, node_labels=5) for _ in range(6)]
        params = KernelParams(alpha=0.5, beta=2.0)
        vocabulary = LabelVocabulary(node_labels=5)
        block = featurize(node_cells, vocabulary)
        matrix = gram(block, block, params)
        for i, j in itertools.product(range(6), repeat=2):
            assert matrix[i, j] == pytest.approx(combined_kernel(node_cells[i], node_cells[j], params, vocabulary), abs=1e-12)

    def test_nas_bench_201_gram(self):
        """Feature rows over the zero-op space agree with the scalar kernel on a sample."""
        spec = nas_bench_201()
        cells = list(enumerate_space(spec))[::1000]
        params = KernelParams(alpha=1.0, gamma=1.0)
        block = featurize(cells, spec.vocabulary())
        matrix = gram(block, block, params)
        for i, j in itertools.product(range(len(cells)), repeat=2):
            assert matrix[i, j] == pytest.approx(combined_kernel(cells[i], cells[j], params, spec.vocabulary()), abs=1e-12)

    def test_self_components_are_the_diagonal(self, random_digraph):
        """self_components equals the Gram diagonal."""
        block = featurize([random_digraph(4) for _ in range(8)])
        full = gram_components(block, block)
        diagonal = self_components(block)
        np.testing.assert_allclose(diagonal.graph, np.diag(full.graph))

    def test_width_too_small(self, random_digraph):
        """A graph wider than the layout is refused."""
        with pytest.raises(KernelSizeMismatchError):
            featurize([random_digraph(4)], width=3)
