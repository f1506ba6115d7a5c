"""Explicit feature maps whose inner products reproduce the kernels exactly.

Every kernel in :mod:`graph_kernels` is an inner product of count vectors, so Gram
matrices over thousands of graphs reduce to a few dense matrix products.
"""

from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from archsearch_mip.exceptions import KernelSizeMismatchError, LabelVocabularyError
from archsearch_mip.graphs.graph import LabeledGraph, compute_metrics_batch
from archsearch_mip.graphs.space import LabelVocabulary
from archsearch_mip.kernels.graph_kernels import KernelParams, infer_vocabulary


@dataclass(frozen=True)
class FeatureBlock:
    graph: np.ndarray
    node: Optional[np.ndarray]
    edge: Optional[np.ndarray]
    width: int
    vocabulary: LabelVocabulary
    match_unreachable: bool

    def __len__(self) -> int:
        return int(self.graph.shape[0])

    def take(self, rows: Sequence[int]) -> "FeatureBlock":
        index = np.asarray(rows, dtype=np.int64)
        return FeatureBlock(
            graph=self.graph[index],
            node=self.node[index] if self.node is not None else None,
            edge=self.edge[index] if self.edge is not None else None,
            width=self.width,
            vocabulary=self.vocabulary,
            match_unreachable=self.match_unreachable,
        )


def _graph_rows(graphs: Sequence[LabeledGraph], width: int, num_labels: int, match_unreachable: bool) -> np.ndarray:
    buckets = width + 1
    rows = np.zeros((len(graphs), buckets * num_labels * num_labels), dtype=np.float64)
    by_size: Dict[int, List[int]] = defaultdict(list)
    for i, g in enumerate(graphs):
        by_size[g.n].append(i)
    for n, members in by_size.items():
        adjacency = np.stack([graphs[i].adjacency_matrix() for i in members])
        _, dist, _ = compute_metrics_batch(adjacency)
        # the unreachable bucket is shared by every size
        dist = np.where(dist >= n, width, dist)
        labels = np.array(
            [[label if exists else -1 for label, exists in zip(graphs[i].node_labels or [0] * n, graphs[i].node_exists)] for i in members],
            dtype=np.int64,
        )
        exists = labels >= 0
        pair_mask = exists[:, :, None] & exists[:, None, :]
        safe = np.where(exists, labels, 0)
        flat = (dist * num_labels + safe[:, :, None]) * num_labels + safe[:, None, :]
        batch_index = np.broadcast_to(np.arange(len(members))[:, None, None], flat.shape)
        counts = np.zeros((len(members), rows.shape[1]), dtype=np.float64)
        np.add.at(counts, (batch_index[pair_mask], flat[pair_mask]), 1.0)
        sizes = exists.sum(axis=1).astype(np.float64)
        scale = np.divide(1.0, sizes**2, out=np.zeros_like(sizes), where=sizes > 0)
        rows[members] = counts * scale[:, None]
    if not match_unreachable:
        rows = rows.reshape(len(graphs), buckets, -1)[:, :width].reshape(len(graphs), -1)
    return rows


def _node_rows(graphs: Sequence[LabeledGraph], num_labels: int) -> np.ndarray:
    rows = np.zeros((len(graphs), num_labels), dtype=np.float64)
    for i, g in enumerate(graphs):
        labels = g.existing_labels()
        if labels:
            rows[i] = np.bincount(np.asarray(labels, dtype=np.int64), minlength=num_labels) / (len(labels) * np.sqrt(num_labels))
    return rows


def _edge_rows(graphs: Sequence[LabeledGraph], num_labels: int) -> np.ndarray:
    sizes = {g.n for g in graphs}
    if len(sizes) > 1:
        raise KernelSizeMismatchError(f"edge features need one slot count, got {sorted(sizes)}")
    n = sizes.pop() if sizes else 2
    slots = {(u, v): i for i, (u, v) in enumerate((u, v) for u in range(n) for v in range(u + 1, n))}
    rows = np.zeros((len(graphs), max(len(slots), 1) * num_labels), dtype=np.float64)
    scale = np.sqrt(2.0 / (n * (n - 1))) if n >= 2 else 0.0
    for i, g in enumerate(graphs):
        for (u, v), label in g.edge_label_map().items():
            if u < v:
                rows[i, slots[(u, v)] * num_labels + label] = scale
    return rows


def featurize(
    graphs: Sequence[LabeledGraph],
    vocabulary: Optional[LabelVocabulary] = None,
    width: Optional[int] = None,
    match_unreachable: bool = True,
) -> FeatureBlock:
    """Feature rows for ``graphs``; ``width`` fixes the distance layout shared across blocks."""
    vocabulary = vocabulary or infer_vocabulary(graphs)
    largest = max((g.n for g in graphs), default=1)
    width = width or largest
    if largest > width:
        raise KernelSizeMismatchError(f"graph with {largest} slots exceeds the feature width {width}")
    for g in graphs:
        if g.has_node_labels != (vocabulary.node_labels is not None) or g.has_edge_labels != (vocabulary.edge_labels is not None):
            raise LabelVocabularyError("graph labels do not match the vocabulary")
        if any(label >= vocabulary.node_label_count for label in g.existing_labels()):
            raise LabelVocabularyError("node label outside the vocabulary")
        if vocabulary.edge_labels is not None and any(label >= vocabulary.edge_labels for _, _, label in g.edge_labels or ()):
            raise LabelVocabularyError("edge label outside the vocabulary")
    return FeatureBlock(
        graph=_graph_rows(graphs, width, vocabulary.node_label_count, match_unreachable),
        node=_node_rows(graphs, vocabulary.node_labels) if vocabulary.node_labels is not None else None,
        edge=_edge_rows(graphs, vocabulary.edge_labels) if vocabulary.edge_labels is not None else None,
        width=width,
        vocabulary=vocabulary,
        match_unreachable=match_unreachable,
    )


@dataclass(frozen=True)
class GramComponents:
    graph: np.ndarray
    node: Optional[np.ndarray]
    edge: Optional[np.ndarray]

    def linear(self, params: KernelParams) -> np.ndarray:
        value = params.alpha * self.graph
        if self.node is not None:
            value = value + params.beta * self.node
        if self.edge is not None:
            value = value + params.gamma * self.edge
        return value

    def combine(self, params: KernelParams) -> np.ndarray:
        value = self.linear(params)
        if params.form == "exponential":
            return params.variance * np.exp(value)
        return value


def gram_components(a: FeatureBlock, b: FeatureBlock) -> GramComponents:
    if a.graph.shape[1] != b.graph.shape[1]:
        raise KernelSizeMismatchError("feature blocks use different distance layouts")
    if (a.node is None) != (b.node is None) or (a.edge is None) != (b.edge is None):
        raise LabelVocabularyError("feature blocks use different label structures")
    node = a.node @ b.node.T if a.node is not None and b.node is not None else None
    edge = None
    if a.edge is not None and b.edge is not None:
        if a.edge.shape[1] != b.edge.shape[1]:
            raise KernelSizeMismatchError("edge features of different slot counts")
        edge = a.edge @ b.edge.T
    return GramComponents(graph=a.graph @ b.graph.T, node=node, edge=edge)


def self_components(a: FeatureBlock) -> GramComponents:
    """Diagonal of ``gram_components(a, a)`` without forming the full matrix."""
    return GramComponents(
        graph=np.einsum("ij,ij->i", a.graph, a.graph),
        node=np.einsum("ij,ij->i", a.node, a.node) if a.node is not None else None,
        edge=np.einsum("ij,ij->i", a.edge, a.edge) if a.edge is not None else None,
    )


def gram(a: FeatureBlock, b: FeatureBlock, params: KernelParams) -> np.ndarray:
    return gram_components(a, b).combine(params)
