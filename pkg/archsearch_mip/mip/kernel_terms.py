"""Kernel values between the decision graph and each training graph, as MIP terms.

Shortest-path kernel: distance indicators ``dind_u_v_s`` channel ``d_u_v``; ``p_u_v_s_l1_l2``
is the product of a distance indicator and two label indicators; ``P_s_l1_l2`` counts pairs
per bucket and ``Pc_s_l1_l2_c`` one-hot encodes that count so the squared count in the
self-kernel is linear. Node-label counts ``N_l`` are encoded the same way with ``Nc_l_c``.
Edge labels enter through ``F_u_v_l`` directly.

The exponential form is approximated by a piecewise-linear interpolation of ``exp`` on
uniform breakpoints over the attainable range of the linear kernel.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from archsearch_mip.exceptions import KernelSizeMismatchError, LabelVocabularyError, ModelBuildError
from archsearch_mip.graphs.graph import LabeledGraph
from archsearch_mip.graphs.space import LabelVocabulary
from archsearch_mip.kernels.graph_kernels import KernelParams, PathCounts, linear_kernel_range, path_counts
from archsearch_mip.mip.encoding import node_label_indicator
from archsearch_mip.mip.model import KernelEncoding, LinExpr, MipModel, quicksum

log = logging.getLogger(__name__)

DEFAULT_BREAKPOINTS = 32

KernelDatum = Tuple[LabeledGraph, PathCounts]


def kernel_data(graphs: Sequence[LabeledGraph], vocabulary: LabelVocabulary) -> List[KernelDatum]:
    return [(g, path_counts(g, vocabulary=vocabulary)) for g in graphs]


def pwl_breakpoints(upper: float, count: int = DEFAULT_BREAKPOINTS) -> np.ndarray:
    if count < 2:
        raise ModelBuildError("piecewise-linear exp needs at least 2 breakpoints")
    return np.linspace(0.0, max(upper, 1e-9), count)


def pwl_error(breakpoints: np.ndarray) -> Tuple[float, float]:
    """Largest chord error of ``exp`` over the grid, absolute and relative to ``exp``.

    On ``[a, b]`` the chord minus ``exp`` peaks where ``exp(t)`` equals the chord slope.
    """
    worst_abs = worst_rel = 0.0
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        slope = (math.exp(b) - math.exp(a)) / (b - a)
        peak = math.log(slope)
        gap = math.exp(a) + slope * (peak - a) - slope
        worst_abs = max(worst_abs, gap)
        worst_rel = max(worst_rel, gap / slope)
    return worst_abs, worst_rel


def _label_count(model: MipModel) -> int:
    return model.metadata.vocabulary.node_label_count


def _add_path_counts(model: MipModel, buckets: Sequence[int]) -> None:
    n, num_labels = model.n, _label_count(model)
    add = model.add_constraint
    for u in range(n):
        for v in range(n):
            if u == v:
                continue
            for s in range(1, n + 1):
                model.add_variable("dind", u, v, s)
            indicators = [model.var("dind", u, v, s) for s in range(1, n + 1)]
            add(quicksum(indicators), "=", 1, "kernel", f"kernel_dindsum_{u}_{v}")
            add(quicksum(s * ind for s, ind in zip(range(1, n + 1), indicators)), "=", model.var("d", u, v), "kernel", f"kernel_dind_{u}_{v}")

    labels = range(num_labels)
    for s in buckets:
        for l1 in labels:
            for l2 in labels:
                total = LinExpr()
                if s == 0:
                    if l1 == l2:
                        total = quicksum(node_label_indicator(model, v, l1) for v in range(n))
                else:
                    for u in range(n):
                        for v in range(n):
                            if u == v:
                                continue
                            p = model.add_variable("p", u, v, s, l1, l2)
                            parts = model.var("dind", u, v, s) + node_label_indicator(model, u, l1) + node_label_indicator(model, v, l2)
                            add(p, ">=", parts - 2, "kernel", f"kernel_plb_{u}_{v}_{s}_{l1}_{l2}")
                            add(3 * p, "<=", parts, "kernel", f"kernel_pub_{u}_{v}_{s}_{l1}_{l2}")
                            total.add_scaled(p)
                # diagonal pairs only ever sit in bucket 0, off-diagonal pairs never do
                cap = n if s == 0 else n * (n - 1)
                count = model.add_variable("P", s, l1, l2, domain="integer", lower=0, upper=cap)
                add(count, "=", total, "kernel", f"kernel_P_{s}_{l1}_{l2}")
                onehot = [model.add_variable("Pc", s, l1, l2, c) for c in range(cap + 1)]
                add(quicksum(onehot), "=", 1, "kernel", f"kernel_Pcsum_{s}_{l1}_{l2}")
                add(quicksum(c * x for c, x in enumerate(onehot)), "=", count, "kernel", f"kernel_Pc_{s}_{l1}_{l2}")


def _add_node_counts(model: MipModel) -> None:
    n = model.n
    for label in range(_label_count(model)):
        count = model.add_variable("N", label, domain="integer", lower=0, upper=n)
        model.add_constraint(count, "=", quicksum(model.var("F", v, label) for v in range(n)), "kernel", f"kernel_N_{label}")
        onehot = [model.add_variable("Nc", label, c) for c in range(n + 1)]
        model.add_constraint(quicksum(onehot), "=", 1, "kernel", f"kernel_Ncsum_{label}")
        model.add_constraint(quicksum(c * x for c, x in enumerate(onehot)), "=", count, "kernel", f"kernel_Nc_{label}")


def _sp_expression(model: MipModel, counts: PathCounts, buckets: Sequence[int], match_unreachable: bool) -> LinExpr:
    n = model.n
    expr = LinExpr()
    if counts.num_nodes == 0:
        return expr
    scale = 1.0 / (n**2 * counts.num_nodes**2)
    for s in buckets:
        if s == n:
            source = counts.unreachable if match_unreachable else None
        else:
            source = counts.finite[s] if s < counts.n else None
        if source is None:
            continue
        for l1, l2 in zip(*np.nonzero(source)):
            expr.add_term(model.var("P", s, int(l1), int(l2)).name, float(source[l1, l2]) * scale)
    return expr


def _sp_self_expression(model: MipModel, buckets: Sequence[int]) -> LinExpr:
    n, num_labels = model.n, _label_count(model)
    expr = LinExpr()
    for s in buckets:
        cap = n if s == 0 else n * (n - 1)
        for l1 in range(num_labels):
            for l2 in range(num_labels):
                for c in range(1, cap + 1):
                    expr.add_term(model.var("Pc", s, l1, l2, c).name, c * c / n**4)
    return expr


def _edge_expression(model: MipModel, g: LabeledGraph) -> LinExpr:
    n = model.n
    if g.n != n:
        raise KernelSizeMismatchError(f"edge kernel needs {n}-slot graphs, got {g.n}")
    expr = LinExpr()
    scale = 2.0 / (n * (n - 1))
    for u, v, label in g.edge_labels or ():
        if u >= v:
            continue
        if not model.has_var("F", u, v, label):
            raise LabelVocabularyError(f"edge label {label} on ({u}, {v}) has no counterpart in the model")
        expr.add_term(model.var("F", u, v, label).name, scale)
    return expr


def _add_pwl(model: MipModel, index: Tuple[int, ...], target: LinExpr, output: str, breakpoints: np.ndarray, variance: float) -> None:
    """``output = variance * pwl_exp(target)`` with weights ``lam`` and segment selectors ``seg``.

    The self-kernel (empty ``index``) uses ``lamxx`` and ``segxx``.
    """
    lam_kind, seg_kind = ("lam", "seg") if index else ("lamxx", "segxx")
    count = len(breakpoints)
    weights = [model.add_variable(lam_kind, *index, b, domain="continuous", lower=0.0, upper=1.0) for b in range(count)]
    segments = [model.add_variable(seg_kind, *index, b) for b in range(count - 1)]
    name = "_".join([output, *(str(i) for i in index)])
    add = model.add_constraint
    add(quicksum(weights), "=", 1, "pwl", f"pwl_lamsum_{name}")
    add(quicksum(segments), "=", 1, "pwl", f"pwl_segsum_{name}")
    add(quicksum(float(x) * w for x, w in zip(breakpoints, weights)), "=", target, "pwl", f"pwl_x_{name}")
    for b, weight in enumerate(weights):
        adjacent = [segments[j] for j in (b - 1, b) if 0 <= j < count - 1]
        add(weight, "<=", quicksum(adjacent), "pwl", f"pwl_adj_{name}_{b}")
    values = quicksum(variance * math.exp(float(x)) * w for x, w in zip(breakpoints, weights))
    add(model.var(output, *index), "=", values, "pwl", f"pwl_y_{name}")


def add_kernel_terms(
    model: MipModel,
    data: Sequence[KernelDatum],
    params: KernelParams,
    vocabulary: Optional[LabelVocabulary] = None,
    breakpoints: int = DEFAULT_BREAKPOINTS,
) -> MipModel:
    """Declare ``kxX_i`` (kernel with training graph ``i``) and ``kxx`` (self-kernel)."""
    if model.kernel is not None:
        raise ModelBuildError("kernel terms are already present")
    if not data:
        raise ModelBuildError("kernel terms need at least one training graph")
    if model.metadata.n0 != model.n:
        raise ModelBuildError("kernel terms need a fixed graph size (n0 == n)")
    n = model.n
    model_vocabulary = model.metadata.vocabulary
    if vocabulary is not None and vocabulary.model_dump() != model_vocabulary.model_dump():
        raise LabelVocabularyError(f"vocabulary {vocabulary} does not match the model's {model_vocabulary}")
    vocabulary = model_vocabulary
    node_labeled = vocabulary.node_labels is not None
    edge_labeled = vocabulary.edge_labels is not None
    for g, counts in data:
        if g.has_node_labels != node_labeled or g.has_edge_labels != edge_labeled:
            raise LabelVocabularyError("training graph labels do not match the model")
        if counts.num_labels != vocabulary.node_label_count:
            raise LabelVocabularyError(f"path counts use {counts.num_labels} labels, the model {vocabulary.node_label_count}")

    buckets = list(range(n + 1)) if params.match_unreachable else list(range(n))
    _add_path_counts(model, buckets)
    if node_labeled:
        _add_node_counts(model)

    labels = vocabulary.node_label_count
    edge_scale = 2.0 / (n * (n - 1)) if n > 1 else 0.0
    model.expressions["kg_xx"] = _sp_self_expression(model, buckets)
    klin_xx = model.expressions["kg_xx"] * params.alpha
    if node_labeled:
        model.expressions["kn_xx"] = quicksum(
            c * c / (n * n * labels) * model.var("Nc", label, c) for label in range(labels) for c in range(1, n + 1)
        )
        klin_xx.add_scaled(model.expressions["kn_xx"], params.beta)
    if edge_labeled:
        model.expressions["ke_xx"] = quicksum(edge_scale * model.var("A", u, v) for u in range(n) for v in range(u + 1, n))
        klin_xx.add_scaled(model.expressions["ke_xx"], params.gamma)
    model.expressions["klin_xx"] = klin_xx

    for i, (g, counts) in enumerate(data):
        kg = _sp_expression(model, counts, buckets, params.match_unreachable)
        model.expressions[f"kg_{i}"] = kg
        klin = kg * params.alpha
        if node_labeled:
            kn = LinExpr()
            if counts.num_nodes:
                for label, amount in enumerate(counts.node_counts):
                    if amount:
                        kn.add_term(model.var("N", label).name, float(amount) / (n * counts.num_nodes * labels))
            model.expressions[f"kn_{i}"] = kn
            klin.add_scaled(kn, params.beta)
        if edge_labeled:
            ke = _edge_expression(model, g)
            model.expressions[f"ke_{i}"] = ke
            klin.add_scaled(ke, params.gamma)
        model.expressions[f"klin_{i}"] = klin

    upper = linear_kernel_range(params, vocabulary)
    encoding = KernelEncoding(params=params, vocabulary=vocabulary, buckets=tuple(buckets), data=tuple(c for _, c in data))
    if params.form == "exponential":
        grid = pwl_breakpoints(upper, breakpoints)
        bound = params.variance * math.exp(float(grid[-1]))
        model.add_variable("kxx", domain="continuous", lower=0.0, upper=bound)
        _add_pwl(model, (), model.expressions["klin_xx"], "kxx", grid, params.variance)
        for i in range(len(data)):
            model.add_variable("kxX", i, domain="continuous", lower=0.0, upper=bound)
            _add_pwl(model, (i,), model.expressions[f"klin_{i}"], "kxX", grid, params.variance)
        absolute, relative = pwl_error(grid)
        encoding.breakpoints = grid
        encoding.pwl_error = absolute * params.variance
        encoding.pwl_relative_error = relative
        log.info("Exponential kernel on %d breakpoints over [0, %.4g]: max error %.3g (relative %.3g)", breakpoints, upper, encoding.pwl_error, relative)
    else:
        model.add_variable("kxx", domain="continuous", lower=0.0, upper=upper)
        model.add_constraint(model.var("kxx"), "=", model.expressions["klin_xx"], "kernel", "kernel_kxx")
        for i in range(len(data)):
            model.add_variable("kxX", i, domain="continuous", lower=0.0, upper=upper)
            model.add_constraint(model.var("kxX", i), "=", model.expressions[f"klin_{i}"], "kernel", f"kernel_kxX_{i}")

    model.kernel = encoding
    model.metadata.kernel_form = params.form
    model.metadata.num_data = len(data)
    log.info("Added kernel terms for %d training graphs: %d variables, %d constraints", len(data), model.num_variables, model.num_constraints)
    return model
