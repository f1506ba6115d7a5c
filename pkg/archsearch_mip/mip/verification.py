"""Certificates that the graph-space encoding is a bijection onto graphs.

Small sizes are certified by exhaustive completion search. Larger sizes check the
forward direction on every graph (its metrics are feasible) together with single-variable
perturbations of ``r``, ``d`` and ``delta`` (each one must be infeasible).
"""

import logging
import time
from typing import Iterator, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from archsearch_mip.graphs.graph import LabeledGraph, compute_metrics_batch, key_hex
from archsearch_mip.graphs.space import digraphs, enumerate_space
from archsearch_mip.mip.assignment import graph_variables
from archsearch_mip.mip.checker import CompiledModel, compile_model
from archsearch_mip.mip.encoding import build_graph_space, expected_census
from archsearch_mip.mip.search import enumerate_completions

log = logging.getLogger(__name__)

EXHAUSTIVE_MAX_N = 3
_MAX_DETAILS = 10


class SizeReport(BaseModel):
    n: int
    n0: int
    mode: Literal["exhaustive", "forward+perturbation"]
    graphs: int = Field(default=0, description="Graphs checked")
    feasible: int = Field(default=0, description="Feasible assignments found by the free search, or graphs passing the forward check")
    mismatches: int = Field(default=0, description="Graphs without exactly one completion equal to their metrics")
    perturbations: int = 0
    perturbation_failures: int = Field(default=0, description="Perturbed assignments that stayed feasible")
    census_ok: bool = True
    seconds: float = 0.0
    details: List[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.census_ok and self.mismatches == 0 and self.perturbation_failures == 0


class VerificationReport(BaseModel):
    sizes: List[SizeReport] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(size.ok for size in self.sizes)


def _exhaustive(n: int, n0: int) -> SizeReport:
    started = time.perf_counter()
    spec = digraphs(n, n0=n0)
    model = build_graph_space(spec)
    report = SizeReport(n=n, n0=n0, mode="exhaustive", census_ok=model.census() == expected_census(n))
    graphs = list(enumerate_space(spec))
    report.graphs = len(graphs)
    for g in graphs:
        truth = graph_variables(g)
        fixed = {name: value for name, value in truth.items() if name.startswith("A_")}
        completions = list(enumerate_completions(model, fixed, limit=2))
        if len(completions) != 1 or any(completions[0][name] != value for name, value in truth.items()):
            report.mismatches += 1
            if len(report.details) < _MAX_DETAILS:
                report.details.append(f"graph {key_hex(g)}: {len(completions)} completion(s)")
    report.feasible = sum(1 for _ in enumerate_completions(model))
    if report.feasible != report.graphs:
        report.mismatches += abs(report.feasible - report.graphs)
        report.details.append(f"free search found {report.feasible} assignments for {report.graphs} graphs")
    report.seconds = time.perf_counter() - started
    return report


def _adjacency_batches(n: int, k: int, batch_size: int, sample: Optional[int], seed: int) -> Iterator[np.ndarray]:
    """All (or a seeded sample of) adjacency matrices whose first ``k`` nodes exist."""
    off_diagonal = np.zeros((n, n), dtype=bool)
    off_diagonal[:k, :k] = ~np.eye(k, dtype=bool)
    m = k * (k - 1)
    total = 2**m
    if sample is not None and sample < total:
        masks = np.sort(np.random.default_rng([seed, k]).choice(total, size=sample, replace=False))
    else:
        masks = np.arange(total, dtype=np.int64)
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
    for start in range(0, len(masks), batch_size):
        chunk = masks[start : start + batch_size]
        bits = ((chunk[:, None] >> shifts[None, :]) & 1).astype(np.int8)
        adjacency = np.zeros((len(chunk), n, n), dtype=np.int8)
        adjacency[:, off_diagonal] = bits
        adjacency[:, np.arange(k), np.arange(k)] = 1
        yield adjacency


def _assignments(adjacency: np.ndarray) -> np.ndarray:
    """Rows of (A, r, d, delta) in declaration order."""
    reach, dist, on_path = compute_metrics_batch(adjacency)
    batch = adjacency.shape[0]
    return np.concatenate(
        [adjacency.reshape(batch, -1), reach.reshape(batch, -1), dist.reshape(batch, -1), on_path.reshape(batch, -1)], axis=1
    ).astype(np.float64)


def _perturb(compiled: CompiledModel, x: np.ndarray, activity: np.ndarray, n: int, report: SizeReport) -> None:
    columns = compiled.matrix.tocsc()
    for j, name in enumerate(compiled.names):
        kind = name.split("_", 1)[0]
        if kind == "A":
            continue
        start, stop = columns.indptr[j], columns.indptr[j + 1]
        rows = columns.indices[start:stop]
        coefs = columns.data[start:stop]
        old = x[:, j]
        alternatives = [None] if kind in ("r", "delta") else list(range(n + 1))
        for value in alternatives:
            if value is None:
                change = 1.0 - 2.0 * old
                active = np.ones(len(old), dtype=bool)
            else:
                change = value - old
                active = change != 0
            if not active.any():
                continue
            moved = activity[np.ix_(active, rows)] + change[active, None] * coefs[None, :]
            caught = compiled.row_violated(moved, rows).any(axis=1)
            report.perturbations += int(active.sum())
            missed = int((~caught).sum())
            if missed:
                report.perturbation_failures += missed
                if len(report.details) < _MAX_DETAILS:
                    report.details.append(f"{missed} graph(s) stay feasible after setting {name} to {'its flip' if value is None else value}")


def _forward_and_perturbation(n: int, n0: int, batch_size: int, sample: Optional[int], seed: int) -> SizeReport:
    started = time.perf_counter()
    model = build_graph_space(digraphs(n, n0=n0))
    report = SizeReport(n=n, n0=n0, mode="forward+perturbation", census_ok=model.census() == expected_census(n))
    compiled = compile_model(model)
    batches = (adjacency for k in range(n, n0 - 1, -1) for adjacency in _adjacency_batches(n, k, batch_size, sample, seed))
    for adjacency in batches:
        x = _assignments(adjacency)
        activity = compiled.activity(x)
        infeasible = compiled.row_violated(activity).any(axis=1)
        report.graphs += len(x)
        report.feasible += int((~infeasible).sum())
        for b in np.flatnonzero(infeasible)[: _MAX_DETAILS - len(report.details)]:
            report.details.append(f"metrics of graph {key_hex(LabeledGraph.from_adjacency(adjacency[b]))} violate the model")
        report.mismatches += int(infeasible.sum())
        _perturb(compiled, x[~infeasible], activity[~infeasible], n, report)
        log.debug("n=%d: %d graphs checked", n, report.graphs)
    report.seconds = time.perf_counter() - started
    return report


def verify_encoding(
    n_max: int = EXHAUSTIVE_MAX_N,
    n5_sample: Optional[int] = None,
    seed: int = 0,
    batch_size: int = 8192,
    exhaustive_max: int = EXHAUSTIVE_MAX_N,
) -> VerificationReport:
    """Exhaustive certificates up to ``exhaustive_max`` (for every ``n0 <= n``), forward and perturbation checks above.

    Above the exhaustive range each size gets two reports: ``n0 = n`` (every node present) and
    ``n0 = 1``, which adds the graphs with missing trailing nodes. ``n5_sample`` caps each
    existing-node count of the n = 5 sweeps at a seeded subset.
    """
    report = VerificationReport()
    for n in range(1, n_max + 1):
        if n <= exhaustive_max:
            for n0 in range(n, 0, -1):
                size = _exhaustive(n, n0)
                report.sizes.append(size)
                log.info("n=%d n0=%d: %d graphs, %d feasible assignments, ok=%s (%.1fs)", n, n0, size.graphs, size.feasible, size.ok, size.seconds)
        else:
            sample = n5_sample if n >= 5 else None
            for n0 in sorted({n, 1}, reverse=True):
                size = _forward_and_perturbation(n, n0, batch_size, sample, seed)
                report.sizes.append(size)
                log.info(
                    "n=%d n0=%d: %d graphs, %d perturbations, %d failures, ok=%s (%.1fs)",
                    n,
                    n0,
                    size.graphs,
                    size.perturbations,
                    size.perturbation_failures + size.mismatches,
                    size.ok,
                    size.seconds,
                )
    return report
