"""Graph <-> assignment maps.

``complete_assignment`` extends the metrics of a graph to every auxiliary variable of a
model, so a feasible model has exactly the assignments produced here.
"""

import math
from typing import Dict, Mapping, Optional

import numpy as np
from pydantic import ValidationError

from archsearch_mip.exceptions import GraphValidationError, ModelBuildError
from archsearch_mip.graphs.graph import GraphMetrics, LabeledGraph, compute_metrics
from archsearch_mip.kernels.graph_kernels import PathCounts, path_counts
from archsearch_mip.mip.model import LinExpr, MipModel, var_name

Assignment = Dict[str, float]


def evaluate(expr: LinExpr, assignment: Mapping[str, float]) -> float:
    return expr.evaluate(assignment)


def graph_variables(g: LabeledGraph, metrics: Optional[GraphMetrics] = None) -> Assignment:
    """Values of ``A``, ``r``, ``d`` and ``delta`` for ``g``."""
    metrics = metrics or compute_metrics(g)
    n = g.n
    adjacency = g.adjacency_matrix()
    values: Assignment = {}
    for u in range(n):
        for v in range(n):
            values[var_name("A", u, v)] = float(adjacency[u, v])
    for u in range(n):
        for v in range(n):
            values[var_name("r", u, v)] = float(metrics.reach[u, v])
    for u in range(n):
        for v in range(n):
            values[var_name("d", u, v)] = float(metrics.dist[u, v])
    for u in range(n):
        for v in range(n):
            for w in range(n):
                values[var_name("delta", u, v, w)] = float(metrics.on_path[u, v, w])
    return values


def _label_values(model: MipModel, g: LabeledGraph, values: Assignment) -> None:
    vocabulary = model.metadata.vocabulary
    if vocabulary.node_labels is not None:
        labels = g.node_labels or ()
        for v in range(model.n):
            for label in range(vocabulary.node_labels):
                values[var_name("F", v, label)] = float(labels[v] == label)
    if vocabulary.edge_labels is not None:
        edge_labels = g.edge_label_map()
        for name, variable in model.variables.items():
            if variable.kind == "F":
                u, v, label = variable.index
                values[name] = float(edge_labels.get((u, v)) == label)


def _kernel_values(model: MipModel, g: LabeledGraph, metrics: GraphMetrics, values: Assignment) -> None:
    kernel = model.kernel
    if kernel is None:
        return
    n = model.n
    counts: PathCounts = path_counts(g, metrics, kernel.vocabulary)
    labels = np.zeros(n, dtype=np.int64)
    if g.node_labels is not None:
        labels = np.asarray(g.node_labels, dtype=np.int64)
    for u in range(n):
        for v in range(n):
            if u == v:
                continue
            distance = int(metrics.dist[u, v])
            for s in range(1, n + 1):
                values[var_name("dind", u, v, s)] = float(distance == s)
    for name, variable in model.variables.items():
        if variable.kind == "p":
            u, v, s, l1, l2 = variable.index
            values[name] = float(metrics.dist[u, v] == s and labels[u] == l1 and labels[v] == l2)
        elif variable.kind == "P":
            s, l1, l2 = variable.index
            values[name] = float(counts.counts[s, l1, l2])
        elif variable.kind == "Pc":
            s, l1, l2, c = variable.index
            values[name] = float(counts.counts[s, l1, l2] == c)
        elif variable.kind == "N":
            values[name] = float(counts.node_counts[variable.index[0]])
        elif variable.kind == "Nc":
            label, c = variable.index
            values[name] = float(counts.node_counts[label] == c)


def _pwl_values(model: MipModel, index: tuple, target: float, values: Assignment) -> float:
    kernel = model.kernel
    assert kernel is not None and kernel.breakpoints is not None
    grid = kernel.breakpoints
    lam_kind, seg_kind = ("lam", "seg") if index else ("lamxx", "segxx")
    count = len(grid)
    segment = int(np.clip(np.searchsorted(grid, target, side="right") - 1, 0, count - 2))
    weight = float(np.clip((target - grid[segment]) / (grid[segment + 1] - grid[segment]), 0.0, 1.0))
    for b in range(count):
        values[var_name(lam_kind, *index, b)] = 0.0
    for b in range(count - 1):
        values[var_name(seg_kind, *index, b)] = float(b == segment)
    values[var_name(lam_kind, *index, segment)] = 1.0 - weight
    values[var_name(lam_kind, *index, segment + 1)] = weight
    approx = (1.0 - weight) * math.exp(grid[segment]) + weight * math.exp(grid[segment + 1])
    return kernel.params.variance * approx


def _acquisition_values(model: MipModel, values: Assignment) -> None:
    kernel = model.kernel
    if kernel is None:
        return
    exponential = kernel.params.form == "exponential"
    klin_xx = model.expressions["klin_xx"].evaluate(values)
    values["kxx"] = _pwl_values(model, (), klin_xx, values) if exponential else klin_xx
    for i in range(kernel.num_data):
        klin = model.expressions[f"klin_{i}"].evaluate(values)
        values[var_name("kxX", i)] = _pwl_values(model, (i,), klin, values) if exponential else klin
    acquisition = model.acquisition
    if acquisition is None:
        return
    k = np.array([values[var_name("kxX", i)] for i in range(kernel.num_data)])
    values["mu"] = acquisition.y_mean + acquisition.y_std * float(acquisition.weights @ k)
    latent = values["kxx"] - float(k @ acquisition.precision @ k)
    values["sigma"] = acquisition.y_std * math.sqrt(max(0.0, latent))


def complete_assignment(model: MipModel, g: LabeledGraph) -> Assignment:
    """Full canonical assignment of ``g`` in ``model``."""
    if g.n != model.n:
        raise ModelBuildError(f"graph has {g.n} slots, model has {model.n}")
    metrics = compute_metrics(g)
    values = graph_variables(g, metrics)
    _label_values(model, g, values)
    _kernel_values(model, g, metrics, values)
    _acquisition_values(model, values)
    return values


def decode_graph(model: MipModel, assignment: Mapping[str, float]) -> LabeledGraph:
    """Read the graph off the ``A`` and ``F`` variables; missing values read as 0."""
    n = model.n
    adjacency = np.zeros((n, n), dtype=np.int8)
    for u in range(n):
        for v in range(n):
            adjacency[u, v] = assignment.get(var_name("A", u, v), 0.0) > 0.5
    vocabulary = model.metadata.vocabulary
    node_labels = None
    if vocabulary.node_labels is not None:
        scores = np.array(
            [[assignment.get(var_name("F", v, label), 0.0) for label in range(vocabulary.node_labels)] for v in range(n)]
        )
        node_labels = [int(np.argmax(scores[v])) if adjacency[v, v] else -1 for v in range(n)]
    edge_labels = None
    if vocabulary.edge_labels is not None:
        edge_labels = {}
        for name, variable in model.variables.items():
            if variable.kind == "F" and assignment.get(name, 0.0) > 0.5:
                u, v, label = variable.index
                if adjacency[u, v]:
                    edge_labels[(u, v)] = label
    try:
        return LabeledGraph.from_adjacency(adjacency, node_labels=node_labels, edge_labels=edge_labels)
    except KeyError as exc:
        raise GraphValidationError(f"edge {exc.args[0]} carries no label") from exc
    except ValidationError as exc:
        raise GraphValidationError(str(exc)) from exc
