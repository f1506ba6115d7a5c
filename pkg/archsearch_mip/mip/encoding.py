"""Graph-space constraints and domain restrictions.

Variables for ``n`` node slots:

- ``A_u_v`` binary: edge ``u -> v``; the diagonal ``A_v_v`` says node ``v`` exists.
- ``r_u_v`` binary: ``v`` is reachable from ``u``.
- ``d_u_v`` integer in ``[0, n]``: shortest distance, ``n`` meaning unreachable.
- ``delta_u_v_w`` binary: ``w`` lies on some shortest path from ``u`` to ``v``.

Constraint tags ``C1`` to ``C8`` name the condition families; restrictions add their own
tags (``undirected``, ``strong``, ``dag``, ``eq2a``..``eq2e``, ``eq3a``..``eq3c``).
"""

import logging
from functools import partial
from itertools import permutations
from typing import Dict, List, Tuple

from archsearch_mip.exceptions import ConflictingRestrictionError, ModelBuildError
from archsearch_mip.graphs.space import (
    Dag,
    EdgeLabeled,
    GraphSpaceSpec,
    LabelVocabulary,
    NodeLabeled,
    Restriction,
    StronglyConnected,
    Undirected,
)
from archsearch_mip.mip.model import LinExpr, MipModel, ModelMetadata, quicksum

log = logging.getLogger(__name__)

GRAPH_FAMILIES = ("C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8")


def expected_census(n: int) -> Dict[str, int]:
    """Closed-form constraint count per graph-space family."""
    return {
        "C1": n,
        "C2": 4 * n * (n - 1),
        "C3": 3 * n + n * (n - 1),
        "C4": 3 * n * (n - 1),
        "C5": 2 * n * (n - 1),
        "C6": 2 * n * (n - 1) * (n - 2),
        "C7": 4 * n * (n - 1),
        "C8": 2 * n * (n - 1) * (n - 2),
    }


def build_graph_space(spec: GraphSpaceSpec) -> MipModel:
    """Variables and conditions C1..C8 for graphs with ``n0..n`` existing nodes.

    Restrictions of ``spec`` are not applied; use :func:`build_space_model` for that.
    """
    n, n0 = spec.n, spec.n0
    if not 1 <= n0 <= n:
        raise ModelBuildError(f"need 1 <= n0 <= n, got n0={n0} n={n}")
    model = MipModel(metadata=ModelMetadata(name=spec.label, n0=n0, n=n, spec=spec))
    nodes = range(n)
    for u in nodes:
        for v in nodes:
            model.add_variable("A", u, v)
    for u in nodes:
        for v in nodes:
            model.add_variable("r", u, v)
    for u in nodes:
        for v in nodes:
            model.add_variable("d", u, v, domain="integer", lower=0, upper=n)
    for u in nodes:
        for v in nodes:
            for w in nodes:
                model.add_variable("delta", u, v, w)

    A = partial(model.var, "A")
    r = partial(model.var, "r")
    d = partial(model.var, "d")
    delta = partial(model.var, "delta")
    add = model.add_constraint

    # C1: at least n0 nodes, existing nodes take the lowest indexes
    add(quicksum(A(v, v) for v in nodes), ">=", n0, "C1", "C1_count")
    for v in range(n - 1):
        add(A(v, v), ">=", A(v + 1, v + 1), "C1", f"C1_order_{v}")

    pairs = list(permutations(nodes, 2))
    for u, v in pairs:
        # C2: nonexistent nodes have no edges, reach nothing and sit at distance n
        add(2 * A(u, v), "<=", A(u, u) + A(v, v), "C2", f"C2_edge_{u}_{v}")
        add(2 * r(u, v), "<=", A(u, u) + A(v, v), "C2", f"C2_reach_{u}_{v}")
        add(d(u, v), ">=", n * (1 - A(u, u)), "C2", f"C2_distu_{u}_{v}")
        add(d(u, v), ">=", n * (1 - A(v, v)), "C2", f"C2_distv_{u}_{v}")

    for v in nodes:
        # C3
        add(r(v, v), "=", 1, "C3", f"C3_reach_{v}")
        add(d(v, v), "=", 0, "C3", f"C3_dist_{v}")
        add(delta(v, v, v), "=", 1, "C3", f"C3_self_{v}")
        for w in nodes:
            if w != v:
                add(delta(v, v, w), "=", 0, "C3", f"C3_other_{v}_{w}")

    for u, v in pairs:
        # C4: an edge means distance 1, no edge means distance at least 2
        add(r(u, v), ">=", A(u, v), "C4", f"C4_reach_{u}_{v}")
        add(d(u, v), ">=", 2 - A(u, v), "C4", f"C4_distlb_{u}_{v}")
        add(d(u, v), "<=", 1 + (n - 1) * (1 - A(u, v)), "C4", f"C4_distub_{u}_{v}")
    for u, v in pairs:
        # C5
        add(d(u, v), "<=", n - r(u, v), "C5", f"C5_ub_{u}_{v}")
        add(d(u, v), ">=", n - (n - 1) * r(u, v), "C5", f"C5_lb_{u}_{v}")

    triples = list(permutations(nodes, 3))
    for u, v, w in triples:
        # C6: an inner path node is reachable both ways, reachability is transitive
        add(r(u, w) + r(w, v), ">=", 2 * delta(u, v, w), "C6", f"C6_path_{u}_{v}_{w}")
        add(r(u, v), ">=", r(u, w) + r(w, v) - 1, "C6", f"C6_trans_{u}_{v}_{w}")

    for u, v in pairs:
        # C7: endpoints are on the path; a reachable non-adjacent pair has an inner node
        on_path = quicksum(delta(u, v, w) for w in nodes)
        add(delta(u, v, u), "=", 1, "C7", f"C7_src_{u}_{v}")
        add(delta(u, v, v), "=", 1, "C7", f"C7_dst_{u}_{v}")
        add(on_path, ">=", 2 + r(u, v) - A(u, v), "C7", f"C7_lb_{u}_{v}")
        add(on_path, "<=", 2 + (n - 2) * (r(u, v) - A(u, v)), "C7", f"C7_ub_{u}_{v}")

    for u, v, w in triples:
        # C8: nodes on a shortest path split it exactly, others make it strictly longer
        through = d(u, w) + d(w, v)
        add(
            d(u, v),
            "<=",
            through - (1 - delta(u, v, w)) + (n + 1) * (2 - r(u, w) - r(w, v)),
            "C8",
            f"C8_ub_{u}_{v}_{w}",
        )
        add(d(u, v), ">=", through - 2 * n * (1 - delta(u, v, w)), "C8", f"C8_lb_{u}_{v}_{w}")

    log.info("Built graph space n0=%d n=%d: %d variables, %d constraints", n0, n, model.num_variables, model.num_constraints)
    return model


def _forbid_backward(model: MipModel, tag: str) -> None:
    """Every edge, path and shortest-path node goes from a lower to a higher index."""
    n = model.n
    for u in range(n):
        for v in range(u):
            model.add_constraint(model.var("A", u, v), "=", 0, tag, f"{tag}_A_{u}_{v}")
            model.add_constraint(model.var("r", u, v), "=", 0, tag, f"{tag}_r_{u}_{v}")
            model.add_constraint(model.var("d", u, v), "=", n, tag, f"{tag}_d_{u}_{v}")
            for w in range(n):
                if w not in (u, v):
                    model.add_constraint(model.var("delta", u, v, w), "=", 0, tag, f"{tag}_delta_{u}_{v}_{w}")


def _pin_source_sink_reach(model: MipModel, tag: str) -> None:
    n = model.n
    for v in range(1, n):
        model.add_constraint(model.var("r", 0, v), "=", 1, tag, f"{tag}_src_{v}")
    for v in range(n - 1):
        model.add_constraint(model.var("r", v, n - 1), "=", 1, tag, f"{tag}_sink_{v}")


def _add_undirected(model: MipModel) -> None:
    n = model.n
    for u in range(n):
        for v in range(u + 1, n):
            for kind in ("A", "r", "d"):
                model.add_constraint(model.var(kind, u, v), "=", model.var(kind, v, u), "undirected", f"undirected_{kind}_{u}_{v}")
            for w in range(n):
                model.add_constraint(
                    model.var("delta", u, v, w), "=", model.var("delta", v, u, w), "undirected", f"undirected_delta_{u}_{v}_{w}"
                )


def _add_strong(model: MipModel) -> None:
    for u, v in permutations(range(model.n), 2):
        model.add_constraint(
            model.var("r", u, v), ">=", model.var("A", u, u) + model.var("A", v, v) - 1, "strong", f"strong_{u}_{v}"
        )


def _add_dag(model: MipModel) -> None:
    n = model.n
    for u in range(n):
        for v in range(u + 1, n):
            model.add_constraint(model.var("r", u, v) + model.var("r", v, u), "<=", 1, "dag", f"dag_{u}_{v}")


def _add_node_labeled(model: MipModel, restriction: NodeLabeled) -> None:
    n, num_labels = model.n, restriction.num_labels
    for v in range(n):
        for label in range(num_labels):
            model.add_variable("F", v, label)
    F = partial(model.var, "F")
    add = model.add_constraint
    _forbid_backward(model, "eq2a")
    # source: label 0, reaches everything; label 0 is used by no other node
    for v in range(1, n):
        add(model.var("r", 0, v), "=", 1, "eq2b", f"eq2b_reach_{v}")
        add(F(v, 0), "=", 0, "eq2b", f"eq2b_label_{v}")
    add(F(0, 0), "=", 1, "eq2b", "eq2b_source")
    last = num_labels - 1
    for v in range(n - 1):
        add(model.var("r", v, n - 1), "=", 1, "eq2c", f"eq2c_reach_{v}")
        add(F(v, last), "=", 0, "eq2c", f"eq2c_label_{v}")
    add(F(n - 1, last), "=", 1, "eq2c", "eq2c_sink")
    for v in range(n):
        add(quicksum(F(v, label) for label in range(num_labels)), "=", 1, "eq2d", f"eq2d_onehot_{v}")
    edges = quicksum(model.var("A", u, v) for u in range(n) for v in range(u + 1, n))
    add(edges, "<=", restriction.max_edges, "eq2e", "eq2e_budget")


def _add_edge_labeled(model: MipModel, restriction: EdgeLabeled) -> None:
    n = model.n
    labels = restriction.edge_label_range
    for u in range(n):
        for v in range(u + 1, n):
            for label in labels:
                model.add_variable("F", u, v, label)
    _forbid_backward(model, "eq3a")
    if not restriction.zero_op:
        _pin_source_sink_reach(model, "eq3b")
    for u in range(n):
        for v in range(u + 1, n):
            model.add_constraint(
                quicksum(model.var("F", u, v, label) for label in labels), "=", model.var("A", u, v), "eq3c", f"eq3c_{u}_{v}"
            )


_CONFLICTS: List[Tuple[str, str]] = [("undirected", "dag"), ("node_labeled", "edge_labeled")]


def add_restriction(model: MipModel, restriction: Restriction) -> MipModel:
    applied = model.metadata.restrictions
    if restriction.kind in applied:
        raise ConflictingRestrictionError(f"restriction {restriction.kind} is already applied")
    for pair in _CONFLICTS:
        if restriction.kind in pair and any(kind in applied for kind in pair):
            raise ConflictingRestrictionError(f"{pair[0]} and {pair[1]} restrictions conflict")
    if isinstance(restriction, (NodeLabeled, EdgeLabeled)):
        if model.metadata.n0 != model.n or model.n < 2:
            raise ModelBuildError(f"{restriction.kind} needs n0 == n >= 2")
    if isinstance(restriction, Undirected):
        _add_undirected(model)
    elif isinstance(restriction, StronglyConnected):
        _add_strong(model)
    elif isinstance(restriction, Dag):
        _add_dag(model)
    elif isinstance(restriction, NodeLabeled):
        _add_node_labeled(model, restriction)
        model.metadata.vocabulary = LabelVocabulary(node_labels=restriction.num_labels)
    else:
        _add_edge_labeled(model, restriction)
        model.metadata.vocabulary = LabelVocabulary(edge_labels=restriction.num_labels, zero_op=restriction.zero_op)
    applied.append(restriction.kind)
    log.debug("Applied %s restriction: %d constraints in the model", restriction.kind, model.num_constraints)
    return model


def build_space_model(spec: GraphSpaceSpec) -> MipModel:
    model = build_graph_space(spec)
    for restriction in spec.restrictions:
        add_restriction(model, restriction)
    return model


def node_label_indicator(model: MipModel, v: int, label: int) -> LinExpr:
    """``F_v_label`` for node-labeled models; unlabeled nodes carry label 0 when they exist."""
    if model.has_var("F", v, label):
        return LinExpr.of(model.var("F", v, label))
    if label == 0 and model.metadata.vocabulary.node_labels is None:
        return LinExpr.of(model.var("A", v, v))
    return LinExpr()
