"""Labeled graphs and their exact shortest-path properties.

Distances use the value ``n`` (the number of node slots) for "unreachable", so every
quantity stays inside the integer range ``[0, n]`` used by the MIP encoding.
"""

from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import floyd_warshall

from archsearch_mip.exceptions import GraphValidationError

MAX_LABEL = 254
_NODE_LABELS_FLAG = 1
_EDGE_LABELS_FLAG = 2


class LabeledGraph(BaseModel):
    """A directed graph on ``n`` indexed node slots with optional node and edge labels."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1, le=255, description="Number of node slots")
    node_exists: Tuple[bool, ...] = Field(description="Per-slot existence flag (the adjacency diagonal)")
    edges: Tuple[Tuple[int, int], ...] = Field(default=(), description="Directed edges u->v between existing nodes")
    node_labels: Optional[Tuple[int, ...]] = Field(default=None, description="Label per slot, -1 for nonexistent slots")
    edge_labels: Optional[Tuple[Tuple[int, int, int], ...]] = Field(default=None, description="One (u, v, label) triple per edge")

    @field_validator("edges")
    @classmethod
    def _sort_edges(cls, edges: Tuple[Tuple[int, int], ...]) -> Tuple[Tuple[int, int], ...]:
        ordered = tuple(sorted(edges))
        if len(set(ordered)) != len(ordered):
            raise ValueError("duplicate edge")
        return ordered

    @field_validator("edge_labels")
    @classmethod
    def _sort_edge_labels(cls, labels: Optional[Tuple[Tuple[int, int, int], ...]]) -> Optional[Tuple[Tuple[int, int, int], ...]]:
        if labels is None:
            return None
        return tuple(sorted(labels))

    @model_validator(mode="after")
    def _check_invariants(self) -> "LabeledGraph":
        n = self.n
        if len(self.node_exists) != n:
            raise ValueError(f"node_exists has {len(self.node_exists)} entries for n={n}")
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range")
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (self.node_exists[u] and self.node_exists[v]):
                raise ValueError(f"edge ({u}, {v}) touches a nonexistent node")
        if self.node_labels is not None:
            if len(self.node_labels) != n:
                raise ValueError(f"node_labels has {len(self.node_labels)} entries for n={n}")
            for v, label in enumerate(self.node_labels):
                if self.node_exists[v] and not 0 <= label <= MAX_LABEL:
                    raise ValueError(f"existing node {v} needs a label in [0, {MAX_LABEL}], got {label}")
                if not self.node_exists[v] and label != -1:
                    raise ValueError(f"nonexistent node {v} must carry label -1")
        if self.edge_labels is not None:
            labeled = [(u, v) for u, v, _ in self.edge_labels]
            if labeled != list(self.edges):
                raise ValueError("edge_labels must carry exactly one label per edge")
            for u, v, label in self.edge_labels:
                if not 0 <= label <= MAX_LABEL:
                    raise ValueError(f"edge ({u}, {v}) label {label} out of range")
        return self

    @property
    def num_nodes(self) -> int:
        return sum(self.node_exists)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def has_node_labels(self) -> bool:
        return self.node_labels is not None

    @property
    def has_edge_labels(self) -> bool:
        return self.edge_labels is not None

    def adjacency_matrix(self) -> np.ndarray:
        """0/1 matrix with node existence on the diagonal."""
        adjacency = np.zeros((self.n, self.n), dtype=np.int8)
        adjacency[np.diag_indices(self.n)] = self.node_exists
        for u, v in self.edges:
            adjacency[u, v] = 1
        return adjacency

    def edge_label_map(self) -> Dict[Tuple[int, int], int]:
        if self.edge_labels is None:
            return {}
        return {(u, v): label for u, v, label in self.edge_labels}

    def existing_labels(self) -> Tuple[int, ...]:
        """Labels of existing nodes; unlabeled graphs use the single label 0."""
        if self.node_labels is None:
            return tuple(0 for exists in self.node_exists if exists)
        return tuple(label for label, exists in zip(self.node_labels, self.node_exists) if exists)

    @classmethod
    def from_adjacency(
        cls,
        adjacency: Any,
        node_labels: Optional[Sequence[int]] = None,
        edge_labels: Optional[Mapping[Tuple[int, int], int]] = None,
    ) -> "LabeledGraph":
        matrix = np.asarray(adjacency)
        n = matrix.shape[0]
        edges = [(u, v) for u in range(n) for v in range(n) if u != v and matrix[u, v]]
        labels = None
        if edge_labels is not None:
            labels = tuple((u, v, int(edge_labels[(u, v)])) for u, v in edges)
        return cls(
            n=n,
            node_exists=tuple(bool(matrix[v, v]) for v in range(n)),
            edges=tuple(edges),
            node_labels=tuple(int(label) for label in node_labels) if node_labels is not None else None,
            edge_labels=labels,
        )

    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "node_exists": list(self.node_exists),
            "edges": [[u, v] for u, v in self.edges],
            "node_labels": list(self.node_labels) if self.node_labels is not None else None,
            "edge_labels": [[u, v, label] for u, v, label in self.edge_labels] if self.edge_labels is not None else None,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "LabeledGraph":
        try:
            return cls.model_validate(data)
        except ValidationError as exc:
            raise GraphValidationError(str(exc)) from exc


@dataclass(frozen=True)
class GraphMetrics:
    """Reachability, shortest distances and shortest-path membership of one graph.

    ``on_path[u, v, w]`` is 1 when ``w`` lies on some shortest ``u -> v`` path, with both
    endpoints always counted.
    """

    reach: np.ndarray
    dist: np.ndarray
    on_path: np.ndarray

    @property
    def n(self) -> int:
        return int(self.dist.shape[0])


def _on_path(dist: np.ndarray, n: int) -> np.ndarray:
    """Path membership for distance arrays shaped (..., n, n)."""
    # through[..., u, v, w] = d(u, w) + d(w, v)
    through = dist[..., :, None, :] + np.swapaxes(dist, -1, -2)[..., None, :, :]
    reach = dist < n
    on_path = (through == dist[..., :, :, None]) & reach[..., :, :, None]
    eye = np.eye(n, dtype=bool)
    # endpoints always belong to the path; for u == v this leaves only v itself
    on_path |= eye[:, None, :] | eye[None, :, :]
    return on_path.astype(np.int8)


def compute_metrics(g: LabeledGraph) -> GraphMetrics:
    n = g.n
    adjacency = g.adjacency_matrix()
    off_diagonal = adjacency.copy()
    np.fill_diagonal(off_diagonal, 0)
    raw = floyd_warshall(csr_matrix(off_diagonal), directed=True, unweighted=True)
    dist = np.where(np.isinf(raw), n, raw).astype(np.int64)
    np.fill_diagonal(dist, 0)
    reach = (dist < n).astype(np.int8)
    return GraphMetrics(reach=reach, dist=dist, on_path=_on_path(dist, n))


def compute_metrics_batch(adjacency: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised min-plus Floyd-Warshall over a (batch, n, n) stack of adjacency matrices.

    Returns ``(reach, dist, on_path)`` with the same conventions as :func:`compute_metrics`.
    """
    batch, n, _ = adjacency.shape
    eye = np.eye(n, dtype=bool)
    sentinel = 2 * n
    dist = np.where((adjacency != 0) & ~eye, 1, sentinel).astype(np.int64)
    dist[:, eye] = 0
    for k in range(n):
        dist = np.minimum(dist, dist[:, :, k, None] + dist[:, None, k, :])
    dist = np.minimum(dist, n)
    reach = (dist < n).astype(np.int8)
    return reach, dist, _on_path(dist, n)


def canonical_key(g: LabeledGraph) -> bytes:
    """Injective byte encoding of the index-ordered graph.

    Layout: ``n``, label flags, packed bits (node existence then off-diagonal adjacency
    row-major), node labels shifted by one, edge labels in edge order.
    """
    n = g.n
    adjacency = g.adjacency_matrix()
    off_diagonal = adjacency[~np.eye(n, dtype=bool)]
    bits = np.concatenate([np.asarray(g.node_exists, dtype=np.uint8), off_diagonal.astype(np.uint8)])
    flags = (_NODE_LABELS_FLAG if g.node_labels is not None else 0) | (_EDGE_LABELS_FLAG if g.edge_labels is not None else 0)
    key = bytes([n, flags]) + np.packbits(bits).tobytes()
    if g.node_labels is not None:
        key += bytes(label + 1 for label in g.node_labels)
    if g.edge_labels is not None:
        key += bytes(label for _, _, label in g.edge_labels)
    return key


def graph_from_key(key: bytes) -> LabeledGraph:
    if len(key) < 2:
        raise GraphValidationError("graph key is truncated")
    n, flags = key[0], key[1]
    num_bits = n * n
    num_bytes = (num_bits + 7) // 8
    bits = np.unpackbits(np.frombuffer(key[2 : 2 + num_bytes], dtype=np.uint8), count=num_bits)
    if bits.shape[0] != num_bits:
        raise GraphValidationError("graph key is truncated")
    adjacency = np.zeros((n, n), dtype=np.int8)
    adjacency[np.diag_indices(n)] = bits[:n]
    adjacency[~np.eye(n, dtype=bool)] = bits[n:]
    offset = 2 + num_bytes
    node_labels = None
    if flags & _NODE_LABELS_FLAG:
        node_labels = [b - 1 for b in key[offset : offset + n]]
        offset += n
    edges = [(u, v) for u in range(n) for v in range(n) if u != v and adjacency[u, v]]
    edge_labels = None
    if flags & _EDGE_LABELS_FLAG:
        raw = key[offset:]
        if len(raw) != len(edges):
            raise GraphValidationError("edge label section does not match the edge count")
        edge_labels = dict(zip(edges, raw))
        offset += len(raw)
    if offset != len(key):
        raise GraphValidationError("graph key has trailing bytes")
    try:
        return LabeledGraph.from_adjacency(adjacency, node_labels=node_labels, edge_labels=edge_labels)
    except ValidationError as exc:
        raise GraphValidationError(str(exc)) from exc


def key_hex(g: LabeledGraph) -> str:
    return canonical_key(g).hex()
