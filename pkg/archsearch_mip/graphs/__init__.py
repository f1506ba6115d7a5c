from archsearch_mip.graphs.graph import (
    GraphMetrics,
    LabeledGraph,
    canonical_key,
    compute_metrics,
    compute_metrics_batch,
    graph_from_key,
    key_hex,
)
from archsearch_mip.graphs.space import (
    DEFAULT_ENUMERATION_CAP,
    Dag,
    EdgeLabeled,
    GraphSpaceSpec,
    LabelVocabulary,
    NodeLabeled,
    Restriction,
    StronglyConnected,
    Undirected,
    digraphs,
    enumerate_space,
    estimate_space_size,
    nas_bench_101,
    nas_bench_201,
    resolve_space,
)

__all__ = [
    "DEFAULT_ENUMERATION_CAP",
    "Dag",
    "EdgeLabeled",
    "GraphMetrics",
    "GraphSpaceSpec",
    "LabelVocabulary",
    "LabeledGraph",
    "NodeLabeled",
    "Restriction",
    "StronglyConnected",
    "Undirected",
    "canonical_key",
    "compute_metrics",
    "compute_metrics_batch",
    "digraphs",
    "enumerate_space",
    "estimate_space_size",
    "graph_from_key",
    "key_hex",
    "nas_bench_101",
    "nas_bench_201",
    "resolve_space",
]
