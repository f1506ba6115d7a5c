"""Shortest-path, node-label and edge-label kernels between concrete graphs.

The shortest-path kernel compares ordered node pairs by endpoint labels and shortest
distance and is normalised by ``n1**2 * n2**2`` (existing nodes). It factors through the
path-count table :class:`PathCounts`, which is also what the MIP encoding counts.
"""

import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from archsearch_mip.exceptions import KernelSizeMismatchError, LabelVocabularyError
from archsearch_mip.graphs.graph import GraphMetrics, LabeledGraph, compute_metrics
from archsearch_mip.graphs.space import LabelVocabulary

KernelForm = Literal["linear", "exponential"]


class KernelParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=1.0, ge=0.0, description="Weight of the shortest-path kernel")
    beta: float = Field(default=1.0, ge=0.0, description="Weight of the node-label kernel")
    gamma: float = Field(default=1.0, ge=0.0, description="Weight of the edge-label kernel")
    variance: float = Field(default=1.0, gt=0.0, description="sigma_k^2 of the exponential form")
    form: KernelForm = "linear"
    match_unreachable: bool = Field(default=True, description="Count node pairs that are unreachable in both graphs as matching")


@dataclass(frozen=True)
class PathCounts:
    """Counts of ordered node pairs by (distance bucket, source label, target label).

    ``counts`` has shape ``(n + 1, L, L)``; buckets ``0..n-1`` are finite distances and the
    last bucket holds unreachable pairs.
    """

    counts: np.ndarray
    node_counts: np.ndarray
    num_nodes: int
    n: int

    @property
    def num_labels(self) -> int:
        return int(self.node_counts.shape[0])

    @property
    def finite(self) -> np.ndarray:
        return self.counts[:-1]

    @property
    def unreachable(self) -> np.ndarray:
        return self.counts[-1]


def infer_vocabulary(graphs: Sequence[LabeledGraph]) -> LabelVocabulary:
    node_flags = {g.has_node_labels for g in graphs}
    edge_flags = {g.has_edge_labels for g in graphs}
    if len(node_flags) > 1:
        raise LabelVocabularyError("some graphs carry node labels and others do not")
    if len(edge_flags) > 1:
        raise LabelVocabularyError("some graphs carry edge labels and others do not")
    node_labels = None
    if True in node_flags:
        node_labels = 1 + max(max(g.existing_labels(), default=0) for g in graphs)
    edge_labels = None
    if True in edge_flags:
        edge_labels = 1 + max(max((label for _, _, label in g.edge_labels or ()), default=0) for g in graphs)
    return LabelVocabulary(node_labels=node_labels, edge_labels=edge_labels)


def _check_node_labels(g: LabeledGraph, vocabulary: LabelVocabulary) -> None:
    if g.has_node_labels != (vocabulary.node_labels is not None):
        raise LabelVocabularyError("graph node labels do not match the vocabulary")
    if any(label >= vocabulary.node_label_count for label in g.existing_labels()):
        raise LabelVocabularyError(f"node label outside the vocabulary of {vocabulary.node_label_count}")


def _check_edge_labels(g: LabeledGraph, vocabulary: LabelVocabulary) -> None:
    if g.has_edge_labels != (vocabulary.edge_labels is not None):
        raise LabelVocabularyError("graph edge labels do not match the vocabulary")
    if vocabulary.edge_labels is not None and any(label >= vocabulary.edge_labels for _, _, label in g.edge_labels or ()):
        raise LabelVocabularyError(f"edge label outside the vocabulary of {vocabulary.edge_labels}")


def path_counts(g: LabeledGraph, metrics: Optional[GraphMetrics] = None, vocabulary: Optional[LabelVocabulary] = None) -> PathCounts:
    vocabulary = vocabulary or infer_vocabulary([g])
    _check_node_labels(g, vocabulary)
    metrics = metrics or compute_metrics(g)
    num_labels = vocabulary.node_label_count
    existing = np.flatnonzero(np.asarray(g.node_exists))
    labels = np.asarray(g.existing_labels(), dtype=np.int64)
    dist = metrics.dist[np.ix_(existing, existing)]
    counts = np.zeros((g.n + 1, num_labels, num_labels), dtype=np.int64)
    np.add.at(counts, (dist, labels[:, None], labels[None, :]), 1)
    node_counts = np.bincount(labels, minlength=num_labels).astype(np.int64)
    return PathCounts(counts=counts, node_counts=node_counts, num_nodes=int(existing.size), n=g.n)


def path_count_product(a: PathCounts, b: PathCounts, match_unreachable: bool = True) -> float:
    """Inner product of two path-count tables; unreachable buckets match each other."""
    if a.num_labels != b.num_labels:
        raise LabelVocabularyError("path counts use different label vocabularies")
    shared = min(a.n, b.n)
    total = float(np.sum(a.finite[:shared] * b.finite[:shared]))
    if match_unreachable:
        total += float(np.sum(a.unreachable * b.unreachable))
    return total


def sp_kernel(
    g1: LabeledGraph,
    g2: LabeledGraph,
    vocabulary: Optional[LabelVocabulary] = None,
    match_unreachable: bool = True,
) -> float:
    vocabulary = vocabulary or infer_vocabulary([g1, g2])
    p1 = path_counts(g1, vocabulary=vocabulary)
    p2 = path_counts(g2, vocabulary=vocabulary)
    if p1.num_nodes == 0 or p2.num_nodes == 0:
        return 0.0
    return path_count_product(p1, p2, match_unreachable) / (p1.num_nodes**2 * p2.num_nodes**2)


def node_kernel(g1: LabeledGraph, g2: LabeledGraph, vocabulary: Optional[LabelVocabulary] = None) -> float:
    vocabulary = vocabulary or infer_vocabulary([g1, g2])
    if vocabulary.node_labels is None:
        raise LabelVocabularyError("node kernel needs node-labeled graphs")
    _check_node_labels(g1, vocabulary)
    _check_node_labels(g2, vocabulary)
    counts1 = np.bincount(np.asarray(g1.existing_labels(), dtype=np.int64), minlength=vocabulary.node_labels)
    counts2 = np.bincount(np.asarray(g2.existing_labels(), dtype=np.int64), minlength=vocabulary.node_labels)
    n1, n2 = g1.num_nodes, g2.num_nodes
    if n1 == 0 or n2 == 0:
        return 0.0
    return float(counts1 @ counts2) / (n1 * n2 * vocabulary.node_labels)


def edge_kernel(g1: LabeledGraph, g2: LabeledGraph, vocabulary: Optional[LabelVocabulary] = None) -> float:
    """Share of the ``n(n-1)/2`` forward slots carrying the same labeled edge in both graphs."""
    if g1.n != g2.n:
        raise KernelSizeMismatchError(f"edge kernel needs equal slot counts, got {g1.n} and {g2.n}")
    vocabulary = vocabulary or infer_vocabulary([g1, g2])
    if vocabulary.edge_labels is None:
        raise LabelVocabularyError("edge kernel needs edge-labeled graphs")
    _check_edge_labels(g1, vocabulary)
    _check_edge_labels(g2, vocabulary)
    n = g1.n
    if n < 2:
        return 0.0
    labels2 = g2.edge_label_map()
    shared = sum(1 for (u, v), label in g1.edge_label_map().items() if u < v and labels2.get((u, v)) == label)
    return 2.0 * shared / (n * (n - 1))


def linear_kernel(x1: LabeledGraph, x2: LabeledGraph, params: KernelParams, vocabulary: Optional[LabelVocabulary] = None) -> float:
    vocabulary = vocabulary or infer_vocabulary([x1, x2])
    value = params.alpha * sp_kernel(x1, x2, vocabulary, params.match_unreachable)
    if vocabulary.node_labels is not None:
        value += params.beta * node_kernel(x1, x2, vocabulary)
    if vocabulary.edge_labels is not None:
        value += params.gamma * edge_kernel(x1, x2, vocabulary)
    return value


def combined_kernel(x1: LabeledGraph, x2: LabeledGraph, params: KernelParams, vocabulary: Optional[LabelVocabulary] = None) -> float:
    value = linear_kernel(x1, x2, params, vocabulary)
    if params.form == "exponential":
        return params.variance * math.exp(value)
    return value


def linear_kernel_range(params: KernelParams, vocabulary: LabelVocabulary) -> float:
    """Upper end of the attainable linear-kernel values; the lower end is 0."""
    upper = params.alpha
    if vocabulary.node_labels is not None:
        upper += params.beta / vocabulary.node_labels
    if vocabulary.edge_labels is not None:
        upper += params.gamma
    return upper
