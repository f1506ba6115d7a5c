"""Graph search spaces: node-count bounds plus a set of structural and label restrictions."""

import itertools
import json
import logging
import tomllib
from pathlib import Path
from typing import Annotated, Iterator, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from archsearch_mip.exceptions import ArchSearchError, SpaceTooLargeError
from archsearch_mip.graphs.graph import LabeledGraph

log = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 10**7


class Undirected(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["undirected"] = "undirected"


class StronglyConnected(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["strongly_connected"] = "strongly_connected"


class Dag(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["dag"] = "dag"


class NodeLabeled(BaseModel):
    """Single-source single-sink DAG cells with labeled operations on the nodes."""

    model_config = ConfigDict(frozen=True)
    kind: Literal["node_labeled"] = "node_labeled"
    num_labels: int = Field(ge=2, description="L_n, including the source and sink labels")
    max_edges: int = Field(ge=1, description="Edge budget E")


class EdgeLabeled(BaseModel):
    """Fully indexed DAG cells with labeled operations on the edges.

    With ``zero_op`` label 0 stands for the zeroize operation and is realised as a missing
    edge, so every upper-triangular slot takes exactly one label.
    """

    model_config = ConfigDict(frozen=True)
    kind: Literal["edge_labeled"] = "edge_labeled"
    num_labels: int = Field(ge=1, description="L_e")
    zero_op: bool = Field(default=False, description="Label 0 means 'no edge'")

    @property
    def edge_label_range(self) -> range:
        return range(1, self.num_labels) if self.zero_op else range(self.num_labels)


Restriction = Annotated[Union[Undirected, StronglyConnected, Dag, NodeLabeled, EdgeLabeled], Field(discriminator="kind")]


class LabelVocabulary(BaseModel):
    """Label counts shared by every graph compared within one space."""

    model_config = ConfigDict(frozen=True)

    node_labels: Optional[int] = Field(default=None, ge=1, description="L_n, None for unlabeled nodes")
    edge_labels: Optional[int] = Field(default=None, ge=1, description="L_e, None for unlabeled edges")
    zero_op: bool = False

    @property
    def node_label_count(self) -> int:
        return self.node_labels if self.node_labels is not None else 1


class GraphSpaceSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n0: int = Field(ge=1, description="Minimum number of existing nodes")
    n: int = Field(ge=1, le=255, description="Number of node slots")
    directed: bool = True
    restrictions: Tuple[Restriction, ...] = ()
    name: Optional[str] = None

    @model_validator(mode="before")
    @classmethod
    def _sync_directedness(cls, data: object) -> object:
        if not isinstance(data, dict):
            return data
        restrictions = list(data.get("restrictions") or ())
        kinds = {r["kind"] if isinstance(r, dict) else r.kind for r in restrictions}
        if data.get("directed", True) is False and "undirected" not in kinds:
            restrictions.append(Undirected())
        if "undirected" in kinds:
            data = {**data, "directed": False}
        return {**data, "restrictions": tuple(restrictions)}

    @model_validator(mode="after")
    def _check_restrictions(self) -> "GraphSpaceSpec":
        if self.n0 > self.n:
            raise ValueError(f"n0={self.n0} exceeds n={self.n}")
        kinds = [r.kind for r in self.restrictions]
        if len(set(kinds)) != len(kinds):
            raise ValueError("a restriction appears twice")
        if "undirected" in kinds and "dag" in kinds:
            raise ValueError("undirected and dag restrictions conflict")
        if "node_labeled" in kinds and "edge_labeled" in kinds:
            raise ValueError("node_labeled and edge_labeled are mutually exclusive")
        for labeled in ("node_labeled", "edge_labeled"):
            if labeled in kinds:
                if "dag" not in kinds:
                    raise ValueError(f"{labeled} requires the dag restriction")
                if self.n0 != self.n or self.n < 2:
                    raise ValueError(f"{labeled} requires n0 == n >= 2")
        node_labeled = self.node_labeled
        if node_labeled is not None and self.n > 2 and node_labeled.num_labels < 3:
            raise ValueError("node_labeled cells with inner nodes need at least 3 labels")
        edge_labeled = self.edge_labeled
        if edge_labeled is not None and edge_labeled.zero_op and edge_labeled.num_labels < 2:
            raise ValueError("a zero-op edge vocabulary needs at least 2 labels")
        return self

    def has(self, kind: str) -> bool:
        return any(r.kind == kind for r in self.restrictions)

    @property
    def node_labeled(self) -> Optional[NodeLabeled]:
        return next((r for r in self.restrictions if isinstance(r, NodeLabeled)), None)

    @property
    def edge_labeled(self) -> Optional[EdgeLabeled]:
        return next((r for r in self.restrictions if isinstance(r, EdgeLabeled)), None)

    @property
    def upper_triangular(self) -> bool:
        return self.node_labeled is not None or self.edge_labeled is not None

    @property
    def label(self) -> str:
        return self.name or f"space(n0={self.n0}, n={self.n}, {'+'.join(r.kind for r in self.restrictions) or 'digraph'})"

    def vocabulary(self) -> LabelVocabulary:
        node_labeled = self.node_labeled
        edge_labeled = self.edge_labeled
        return LabelVocabulary(
            node_labels=node_labeled.num_labels if node_labeled else None,
            edge_labels=edge_labeled.num_labels if edge_labeled else None,
            zero_op=edge_labeled.zero_op if edge_labeled else False,
        )

    def free_pairs(self, k: int) -> List[Tuple[int, int]]:
        """Adjacency slots that vary among graphs with ``k`` existing nodes, row-major."""
        if self.upper_triangular or not self.directed:
            return [(u, v) for u in range(k) for v in range(k) if u < v]
        return [(u, v) for u in range(k) for v in range(k) if u != v]

    def max_edges(self) -> int:
        node_labeled = self.node_labeled
        if node_labeled is not None:
            return min(node_labeled.max_edges, self.n * (self.n - 1) // 2)
        if self.upper_triangular or self.has("dag") or not self.directed:
            return self.n * (self.n - 1) // 2
        return self.n * (self.n - 1)

    def violations(self, g: LabeledGraph) -> List[str]:
        """Reasons ``g`` lies outside this space; empty when it belongs."""
        problems: List[str] = []
        if g.n != self.n:
            return [f"graph has {g.n} slots, space has {self.n}"]
        k = g.num_nodes
        if not self.n0 <= k <= self.n:
            problems.append(f"{k} existing nodes outside [{self.n0}, {self.n}]")
        if any(g.node_exists[v] < g.node_exists[v + 1] for v in range(self.n - 1)):
            problems.append("existing nodes are not the lowest indexes")
        node_labeled = self.node_labeled
        edge_labeled = self.edge_labeled
        if (node_labeled is not None) != g.has_node_labels:
            problems.append("node labels present/absent mismatch")
        if (edge_labeled is not None) != g.has_edge_labels:
            problems.append("edge labels present/absent mismatch")
        if problems:
            return problems

        reach = _reachability(g.adjacency_matrix())
        existing = [v for v in range(self.n) if g.node_exists[v]]
        edge_set = set(g.edges)
        if not self.directed and any((v, u) not in edge_set for u, v in g.edges):
            problems.append("edges are not symmetric")
        if self.has("dag") and any(reach[u, v] and reach[v, u] for u in existing for v in existing if u != v):
            problems.append("graph has a cycle")
        if self.has("strongly_connected") and not all(reach[u, v] for u in existing for v in existing):
            problems.append("graph is not strongly connected")
        if self.upper_triangular and any(u > v for u, v in g.edges):
            problems.append("edge against index order")
        if node_labeled is not None:
            labels = g.node_labels or ()
            last = node_labeled.num_labels - 1
            if labels[0] != 0 or labels[-1] != last:
                problems.append("source/sink labels are not pinned")
            if any(not 1 <= label < last for label in labels[1:-1]):
                problems.append("inner node label outside [1, L_n - 1)")
            if g.num_edges > node_labeled.max_edges:
                problems.append(f"{g.num_edges} edges exceed the budget {node_labeled.max_edges}")
        if edge_labeled is not None:
            allowed = edge_labeled.edge_label_range
            if any(label not in allowed for _, _, label in g.edge_labels or ()):
                problems.append("edge label outside the vocabulary")
        needs_source_sink = node_labeled is not None or (edge_labeled is not None and not edge_labeled.zero_op)
        if needs_source_sink and not (reach[0, :].all() and reach[:, self.n - 1].all()):
            problems.append("not every node is reachable from the source and reaches the sink")
        return problems

    def contains(self, g: LabeledGraph) -> bool:
        return not self.violations(g)


def _reachability(adjacency: np.ndarray) -> np.ndarray:
    n = adjacency.shape[0]
    reach = (adjacency != 0) | np.eye(n, dtype=bool)
    for _ in range(max(1, n.bit_length())):
        reach = reach | ((reach.astype(np.int32) @ reach.astype(np.int32)) > 0)
    return reach


def estimate_space_size(spec: GraphSpaceSpec) -> int:
    """Upper bound on the space size, counted before structural filtering."""
    total = 0
    for k in range(spec.n0, spec.n + 1):
        slots = len(spec.free_pairs(k))
        node_labeled = spec.node_labeled
        edge_labeled = spec.edge_labeled
        if edge_labeled is not None:
            choices = edge_labeled.num_labels if edge_labeled.zero_op else edge_labeled.num_labels + 1
            total += choices**slots
        elif node_labeled is not None:
            total += 2**slots * (node_labeled.num_labels - 2) ** max(spec.n - 2, 0)
        else:
            total += 2**slots
    return total


def enumerate_space(spec: GraphSpaceSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[LabeledGraph]:
    """Yield every graph of ``spec`` once, in ascending canonical-key order."""
    estimated = estimate_space_size(spec)
    if estimated > cap:
        raise SpaceTooLargeError(estimated, cap)
    log.debug("Enumerating %s (at most %d graphs)", spec.label, estimated)
    return _enumerate(spec)


def _enumerate(spec: GraphSpaceSpec) -> Iterator[LabeledGraph]:
    n = spec.n
    node_labeled = spec.node_labeled
    edge_labeled = spec.edge_labeled
    needs_source_sink = node_labeled is not None or (edge_labeled is not None and not edge_labeled.zero_op)
    for k in range(spec.n0, n + 1):
        pairs = spec.free_pairs(k)
        m = len(pairs)
        for mask in range(2**m):
            if node_labeled is not None and mask.bit_count() > node_labeled.max_edges:
                continue
            adjacency = np.zeros((n, n), dtype=np.int8)
            adjacency[np.arange(k), np.arange(k)] = 1
            for i, (u, v) in enumerate(pairs):
                if mask >> (m - 1 - i) & 1:
                    adjacency[u, v] = 1
                    if not spec.directed:
                        adjacency[v, u] = 1
            if spec.has("dag") or spec.has("strongly_connected") or needs_source_sink:
                reach = _reachability(adjacency)
                inner = reach[:k, :k]
                if spec.has("dag") and (inner & inner.T & ~np.eye(k, dtype=bool)).any():
                    continue
                if spec.has("strongly_connected") and not inner.all():
                    continue
                if needs_source_sink and not (reach[0, :].all() and reach[:, n - 1].all()):
                    continue
            if node_labeled is not None:
                inner_labels = range(1, node_labeled.num_labels - 1)
                for middle in itertools.product(inner_labels, repeat=max(n - 2, 0)):
                    labels = (0, *middle, node_labeled.num_labels - 1)
                    yield LabeledGraph.from_adjacency(adjacency, node_labels=labels)
            elif edge_labeled is not None:
                edges = [(u, v) for u in range(n) for v in range(n) if u != v and adjacency[u, v]]
                for choice in itertools.product(edge_labeled.edge_label_range, repeat=len(edges)):
                    yield LabeledGraph.from_adjacency(adjacency, edge_labels=dict(zip(edges, choice)))
            else:
                yield LabeledGraph.from_adjacency(adjacency)


def nas_bench_201(zero_op: bool = True) -> GraphSpaceSpec:
    """4-node edge-labeled cells; with the zero op this is the 15,625-architecture space."""
    if zero_op:
        return GraphSpaceSpec(n0=4, n=4, restrictions=(Dag(), EdgeLabeled(num_labels=5, zero_op=True)), name="nb201")
    return GraphSpaceSpec(n0=4, n=4, restrictions=(Dag(), EdgeLabeled(num_labels=4)), name="nb201-encoded")


def nas_bench_101(n: int = 7) -> GraphSpaceSpec:
    """Node-labeled cells with at most 9 edges and 3 operations between input and output."""
    name = "nb101" if n == 7 else f"nb101-{n}"
    return GraphSpaceSpec(n0=n, n=n, restrictions=(Dag(), NodeLabeled(num_labels=5, max_edges=9)), name=name)


def digraphs(n: int, n0: Optional[int] = None, restrictions: Sequence[Restriction] = ()) -> GraphSpaceSpec:
    kinds = "+".join(r.kind for r in restrictions)
    name = f"digraph-{n}" if not kinds else f"{kinds}-{n}"
    return GraphSpaceSpec(n0=n if n0 is None else n0, n=n, restrictions=tuple(restrictions), name=name)


PRESETS = ("nb201", "nb201-encoded", "nb101", "nb101-6", "digraph-<n>", "dag-<n>")


def resolve_space(name_or_path: str) -> GraphSpaceSpec:
    """Turn a preset name or a JSON/TOML spec file into a space."""
    if name_or_path == "nb201":
        return nas_bench_201()
    if name_or_path == "nb201-encoded":
        return nas_bench_201(zero_op=False)
    if name_or_path == "nb101":
        return nas_bench_101()
    if name_or_path.startswith("nb101-") and name_or_path[6:].isdigit():
        return nas_bench_101(int(name_or_path[6:]))
    if name_or_path.startswith("digraph-") and name_or_path[8:].isdigit():
        return digraphs(int(name_or_path[8:]))
    if name_or_path.startswith("dag-") and name_or_path[4:].isdigit():
        return digraphs(int(name_or_path[4:]), restrictions=(Dag(),))
    path = Path(name_or_path)
    if not path.exists():
        raise ArchSearchError(f"Unknown space '{name_or_path}': not a preset ({', '.join(PRESETS)}) nor a file")
    if path.suffix == ".toml":
        with path.open("rb") as f:
            return GraphSpaceSpec.model_validate(tomllib.load(f))
    return GraphSpaceSpec.model_validate(json.loads(path.read_text()))
