"""
Tests for labeled graphs, metrics, canonical keys and graph spaces.
"""

import itertools

import networkx as nx
import numpy as np
import pytest
from pydantic import ValidationError

from archsearch_mip.exceptions import GraphValidationError, SpaceTooLargeError
from archsearch_mip.graphs.graph import LabeledGraph, canonical_key, compute_metrics, compute_metrics_batch, graph_from_key, key_hex
from archsearch_mip.graphs.space import (
    Dag,
    EdgeLabeled,
    GraphSpaceSpec,
    NodeLabeled,
    StronglyConnected,
    Undirected,
    digraphs,
    enumerate_space,
    estimate_space_size,
    nas_bench_101,
    nas_bench_201,
    resolve_space,
)


def _bfs_distances(g: LabeledGraph) -> np.ndarray:
    digraph = nx.DiGraph()
    digraph.add_nodes_from(range(g.n))
    digraph.add_edges_from(g.edges)
    dist = np.full((g.n, g.n), g.n, dtype=np.int64)
    for source, lengths in nx.all_pairs_shortest_path_length(digraph):
        for target, length in lengths.items():
            dist[source, target] = length
    return dist


class TestLabeledGraph:
    """Construction and validation of labeled graphs."""

    def test_from_adjacency(self):
        """Edges come from the off-diagonal, existence from the diagonal."""
        g = LabeledGraph.from_adjacency([[1, 1, 0], [0, 1, 0], [0, 0, 0]])
        assert g.node_exists == (True, True, False)
        assert g.edges == ((0, 1),)
        assert g.num_nodes == 2
        assert g.num_edges == 1

    def test_adjacency_round_trip(self, random_digraph):
        """adjacency_matrix inverts from_adjacency."""
        for _ in range(20):
            g = random_digraph(4, k=3)
            assert LabeledGraph.from_adjacency(g.adjacency_matrix()) == g

    def test_self_loop_rejected(self):
        """Self-loops are not graphs of this model."""
        with pytest.raises(ValidationError):
            LabeledGraph(n=2, node_exists=(True, True), edges=((0, 0),))

    def test_edge_to_missing_node_rejected(self):
        """Edges must join existing nodes."""
        with pytest.raises(ValidationError):
            LabeledGraph(n=2, node_exists=(True, False), edges=((0, 1),))

    def test_missing_node_label_is_minus_one(self):
        """Nonexistent nodes carry label -1 in node-labeled graphs."""
        with pytest.raises(ValidationError):
            LabeledGraph(n=2, node_exists=(True, False), node_labels=(0, 0))
        g = LabeledGraph(n=2, node_exists=(True, False), node_labels=(0, -1))
        assert g.existing_labels() == (0,)

    def test_edge_labels_must_cover_every_edge(self):
        """An edge without a label is rejected."""
        with pytest.raises(ValidationError):
            LabeledGraph(n=2, node_exists=(True, True), edges=((0, 1),), edge_labels=())

    def test_from_json_wraps_validation_errors(self):
        """from_json reports invalid payloads as GraphValidationError."""
        with pytest.raises(GraphValidationError):
            LabeledGraph.from_json({"n": 2, "node_exists": [True, True], "edges": [[1, 1]]})

    def test_json_round_trip(self, random_cell):
        """to_json / from_json preserve labels."""
        g = random_cell(4, edge_labels=3)
        assert LabeledGraph.from_json(g.to_json()) == g


class TestMetrics:
    """Reachability, distances and path membership against a BFS oracle."""

    def test_distances_match_bfs(self, random_digraph, rng):
        """compute_metrics agrees with networkx on random graphs up to n = 4."""
        for n in range(1, 5):
            for _ in range(25):
                g = random_digraph(n, k=int(rng.integers(1, n + 1)))
                metrics = compute_metrics(g)
                dist = _bfs_distances(g)
                np.testing.assert_array_equal(metrics.dist, dist)
                np.testing.assert_array_equal(metrics.reach, (dist < n).astype(np.int8))

    def test_path_membership(self, random_digraph):
        """w is on a shortest u->v path iff d(u,w) + d(w,v) = d(u,v); endpoints always count."""
        for _ in range(25):
            g = random_digraph(4)
            metrics = compute_metrics(g)
            dist = _bfs_distances(g)
            n = g.n
            for u, v, w in itertools.product(range(n), repeat=3):
                if w in (u, v):
                    expected = 1
                elif u == v or dist[u, v] == n:
                    expected = 0
                else:
                    expected = int(dist[u, w] + dist[w, v] == dist[u, v])
                assert metrics.on_path[u, v, w] == expected, (g.edges, u, v, w)

    def test_batch_matches_scalar(self, random_digraph):
        """The vectorised Floyd-Warshall equals the scalar path."""
        graphs = [random_digraph(4) for _ in range(30)]
        reach, dist, on_path = compute_metrics_batch(np.stack([g.adjacency_matrix() for g in graphs]))
        for b, g in enumerate(graphs):
            metrics = compute_metrics(g)
            np.testing.assert_array_equal(reach[b], metrics.reach)
            np.testing.assert_array_equal(dist[b], metrics.dist)
            np.testing.assert_array_equal(on_path[b], metrics.on_path)

    def test_path_graph(self):
        """A directed path 0->1->2 has d(0,2) = 2 and node 1 on the way."""
        g = LabeledGraph.from_adjacency([[1, 1, 0], [0, 1, 1], [0, 0, 1]])
        metrics = compute_metrics(g)
        assert metrics.dist[0, 2] == 2
        assert metrics.dist[2, 0] == 3
        assert metrics.on_path[0, 2, 1] == 1
        assert metrics.reach[2, 0] == 0


class TestCanonicalKey:
    """Injective graph keys."""

    def test_round_trip(self, random_digraph, random_cell):
        """graph_from_key inverts canonical_key for every label kind."""
        graphs = [random_digraph(4, k=2), random_cell(4, node_labels=5), random_cell(4, edge_labels=4), random_digraph(1)]
        for g in graphs:
            assert graph_from_key(canonical_key(g)) == g

    def test_keys_are_distinct(self):
        """Every graph of a space gets its own key."""
        keys = [key_hex(g) for g in enumerate_space(digraphs(3, n0=1))]
        assert len(keys) == len(set(keys)) == 69

    def test_truncated_key(self):
        """Truncated keys are rejected."""
        key = canonical_key(LabeledGraph.from_adjacency(np.eye(3, dtype=int)))
        with pytest.raises(GraphValidationError):
            graph_from_key(key[:1])

    def test_trailing_bytes(self):
        """Keys with extra bytes are rejected."""
        key = canonical_key(LabeledGraph.from_adjacency(np.eye(3, dtype=int)))
        with pytest.raises(GraphValidationError):
            graph_from_key(key + b"\x00")


class TestGraphSpaces:
    """Restrictions, presets and enumeration."""

    @pytest.mark.parametrize(
        "spec, expected",
        [
            (digraphs(1), 1),
            (digraphs(2), 4),
            (digraphs(3), 64),
            (digraphs(3, n0=1), 69),
            (digraphs(3, restrictions=(Dag(),)), 25),
            (digraphs(3, restrictions=(Undirected(),)), 8),
            (digraphs(3, restrictions=(StronglyConnected(),)), 18),
            (nas_bench_101(4), 90),
        ],
    )
    def test_enumeration_counts(self, spec, expected):
        """Enumerated counts match the known cardinalities."""
        graphs = list(enumerate_space(spec))
        assert len(graphs) == expected
        assert all(spec.contains(g) for g in graphs)

    def test_nas_bench_201_cardinality(self):
        """The zero-op edge-labeled space has 5^6 = 15,625 cells."""
        spec = nas_bench_201()
        assert estimate_space_size(spec) == 15_625
        assert sum(1 for _ in enumerate_space(spec)) == 15_625

    def test_nas_bench_101_instantiates(self):
        """The node-labeled preset carries n = 7, E = 9 and L_n = 5."""
        spec = nas_bench_101()
        node_labeled = spec.node_labeled
        assert spec.n == 7
        assert node_labeled is not None
        assert node_labeled.max_edges == 9
        assert node_labeled.num_labels == 5
        assert spec.vocabulary().node_labels == 5

    def test_enumeration_is_key_ordered(self):
        """Graphs come out in ascending key order."""
        keys = [canonical_key(g) for g in enumerate_space(digraphs(3, n0=1))]
        assert keys == sorted(keys)

    def test_cap(self):
        """Spaces above the cap refuse to enumerate."""
        with pytest.raises(SpaceTooLargeError) as excinfo:
            enumerate_space(digraphs(5), cap=1000)
        assert excinfo.value.estimated_count == 2**20

    def test_conflicting_restrictions(self):
        """Undirected DAGs and doubly labeled spaces are rejected."""
        with pytest.raises(ValidationError):
            digraphs(3, restrictions=(Undirected(), Dag()))
        with pytest.raises(ValidationError):
            GraphSpaceSpec(n0=4, n=4, restrictions=(Dag(), NodeLabeled(num_labels=5, max_edges=9), EdgeLabeled(num_labels=3)))

    def test_labeled_spaces_need_fixed_size(self):
        """Labeled spaces need n0 = n."""
        with pytest.raises(ValidationError):
            GraphSpaceSpec(n0=3, n=4, restrictions=(Dag(), EdgeLabeled(num_labels=3)))

    def test_violations_explain_membership(self):
        """A cycle is reported against the dag restriction."""
        spec = digraphs(2, restrictions=(Dag(),))
        cycle = LabeledGraph.from_adjacency([[1, 1], [1, 1]])
        assert not spec.contains(cycle)
        assert any("cycle" in problem for problem in spec.violations(cycle))

    def test_zero_op_cells_may_disconnect(self):
        """With the zero op every slot may be empty, including the all-zero cell."""
        empty = LabeledGraph.from_adjacency(np.eye(4, dtype=int), edge_labels={})
        assert nas_bench_201().contains(empty)
        assert not nas_bench_201(zero_op=False).contains(empty)

    def test_resolve_presets(self):
        """Preset names resolve to spaces."""
        assert resolve_space("nb201").n == 4
        assert resolve_space("nb101-6").n == 6
        assert resolve_space("digraph-3") == digraphs(3)
        assert resolve_space("dag-3").has("dag")

    def test_resolve_file(self, tmp_path):
        """Space files round-trip through JSON."""
        path = tmp_path / "space.json"
        path.write_text(nas_bench_201().model_dump_json())
        assert resolve_space(str(path)) == nas_bench_201()
