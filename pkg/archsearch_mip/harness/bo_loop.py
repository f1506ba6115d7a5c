"""Batch Bayesian optimisation over a tabular benchmark, and the random-search baseline."""

import json
import logging
import time
from pathlib import Path
from types import TracebackType
from typing import IO, Dict, List, Literal, Optional, Sequence, Set, Type, Union

import numpy as np
from filelock import FileLock
from pydantic import BaseModel, Field

from archsearch_mip.exceptions import SpaceExhaustedError, SpaceTooLargeError
from archsearch_mip.gp.gaussian_process import FitConfig, GpState, condition, fit
from archsearch_mip.graphs.graph import LabeledGraph
from archsearch_mip.graphs.space import DEFAULT_ENUMERATION_CAP
from archsearch_mip.harness.benchmark import BenchmarkTable, Evaluation
from archsearch_mip.kernels.graph_kernels import KernelForm, KernelParams
from archsearch_mip.optimize.enumerative import EnumeratedSpace, optimize_enumerative
from archsearch_mip.optimize.external import SolverConfig, optimize_two_size
from archsearch_mip.optimize.pool import Candidate, CandidatePool

log = logging.getLogger(__name__)


class RunConfig(BaseModel):
    iters: int = Field(default=30, ge=0, description="BO iterations after the initial design")
    init: int = Field(default=10, ge=1, description="Initial design size")
    batch: int = Field(default=5, ge=1, description="Architectures proposed per iteration")
    beta_sqrt: float = Field(default=3.0, ge=0.0, description="Square root of the LCB exploration weight")
    kernel: KernelForm = "linear"
    optimizer: Literal["enum", "external"] = "enum"
    cap: int = Field(default=DEFAULT_ENUMERATION_CAP, ge=1, description="Largest space the enumerative optimizer will enumerate")
    fit: FitConfig = Field(default_factory=FitConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)


class ProposedPoint(BaseModel):
    key: str
    graph: LabeledGraph
    acquisition: Optional[float] = Field(default=None, description="LCB at proposal time, None for initial and random points")
    mean: Optional[float] = None
    std: Optional[float] = None
    val_error: float
    test_error: float
    seed_index: Optional[int] = None


class BoRunRecord(BaseModel):
    method: Literal["bo", "random"] = "bo"
    seed: int
    iteration: int = Field(description="0 is the initial design")
    proposed: List[ProposedPoint] = Field(default_factory=list)
    num_observations: int
    incumbent_key: str
    incumbent_val_error: float
    incumbent_test_error: float
    params: Optional[KernelParams] = None
    noise: Optional[float] = None
    certificate: Optional[str] = None
    exhausted: bool = False
    timings: Dict[str, float] = Field(default_factory=dict, description="Wall-clock seconds per phase")


class RunLog:
    """Line-delimited JSON run log, held under an exclusive file lock while open."""

    def __init__(self, path: Union[str, Path], include_timings: bool = True):
        self.path = Path(path)
        self.include_timings = include_timings
        self._lock = FileLock(str(self.path) + ".lock")
        self._handle: Optional[IO[str]] = None

    def __enter__(self) -> "RunLog":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock.acquire()
        self._handle = self.path.open("w", encoding="utf-8")
        return self

    def __exit__(self, exc_type: Optional[Type[BaseException]], exc: Optional[BaseException], tb: Optional[TracebackType]) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None
        self._lock.release()

    def write(self, record: BoRunRecord) -> None:
        if self._handle is None:
            raise RuntimeError("RunLog must be used as a context manager")
        exclude = None if self.include_timings else {"timings"}
        self._handle.write(record.model_dump_json(exclude=exclude) + "\n")
        self._handle.flush()


def read_run_log(path: Union[str, Path]) -> List[BoRunRecord]:
    with Path(path).open("r", encoding="utf-8") as handle:
        return [BoRunRecord.model_validate(json.loads(line)) for line in handle if line.strip()]


class _Observations:
    """Evaluated architectures and the running incumbent."""

    def __init__(self, bench: BenchmarkTable, rng: np.random.Generator):
        self.bench = bench
        self.rng = rng
        self.graphs: List[LabeledGraph] = []
        self.val: List[float] = []
        self.keys: Set[str] = set()
        self.best: Optional[Evaluation] = None

    def add(self, g: LabeledGraph, candidate: Optional[Candidate] = None) -> ProposedPoint:
        evaluation = self.bench.evaluate(g, self.rng)
        self.graphs.append(g)
        self.val.append(evaluation.val_error)
        self.keys.add(evaluation.key)
        if self.best is None or evaluation.val_error < self.best.val_error:
            self.best = evaluation
        return ProposedPoint(
            key=evaluation.key,
            graph=g,
            acquisition=candidate.acquisition if candidate else None,
            mean=candidate.mean if candidate else None,
            std=candidate.std if candidate else None,
            val_error=evaluation.val_error,
            test_error=evaluation.test_error,
            seed_index=evaluation.seed_index,
        )

    def record(
        self,
        method: Literal["bo", "random"],
        seed: int,
        iteration: int,
        proposed: List[ProposedPoint],
        timings: Dict[str, float],
        gp: Optional[GpState] = None,
        pool: Optional[CandidatePool] = None,
    ) -> BoRunRecord:
        assert self.best is not None
        return BoRunRecord(
            method=method,
            seed=seed,
            iteration=iteration,
            proposed=proposed,
            num_observations=len(self.graphs),
            incumbent_key=self.best.key,
            incumbent_val_error=self.best.val_error,
            incumbent_test_error=self.best.test_error,
            params=gp.params if gp else None,
            noise=gp.noise if gp else None,
            certificate=pool.certificate if pool else None,
            timings=timings,
        )


def _candidates(bench: BenchmarkTable, config: RunConfig) -> List[EnumeratedSpace]:
    try:
        return [EnumeratedSpace.build(spec, config.cap) for spec in bench.spaces]
    except SpaceTooLargeError:
        if config.optimizer == "enum":
            raise
        log.info("Space too large to enumerate; the initial design samples benchmark records")
        return []


def _design_pool(bench: BenchmarkTable, spaces: Sequence[EnumeratedSpace]) -> List[LabeledGraph]:
    if spaces:
        return [g for space in spaces for g in space.graphs]
    return [bench.records[key].graph for key in sorted(bench.records)]


def fit_config_for(bench: BenchmarkTable, config: RunConfig) -> FitConfig:
    """Fit settings for a benchmark: noisy objectives train the noise within its bounds."""
    noise = "trainable" if bench.mode == "noisy" else config.fit.noise
    return config.fit.model_copy(update={"form": config.kernel, "noise": noise})


def _fit(observations: _Observations, bench: BenchmarkTable, config: RunConfig, seed: int, iteration: int) -> GpState:
    vocabulary = bench.spaces[0].vocabulary()
    width = max(spec.n for spec in bench.spaces)
    if len(observations.graphs) < 2:
        params = KernelParams(form=config.kernel, match_unreachable=config.fit.match_unreachable)
        return condition(observations.graphs, observations.val, params, config.fit.fixed_noise, vocabulary, width)
    fit_config = fit_config_for(bench, config).model_copy(update={"seed": seed * 1000 + iteration})
    return fit(observations.graphs, observations.val, fit_config, vocabulary, width)


def _propose(gp: GpState, bench: BenchmarkTable, spaces: Sequence[EnumeratedSpace], config: RunConfig, exclude: Set[str]) -> CandidatePool:
    if config.optimizer == "enum" and len(spaces) == 1:
        return optimize_enumerative(spaces[0], gp, config.beta_sqrt, config.batch, exclude)
    return optimize_two_size(
        bench.spaces,
        gp,
        config.beta_sqrt,
        config.batch,
        exclude,
        optimizer=config.optimizer,
        config=config.solver,
        spaces=spaces or None,
        cap=config.cap,
    )


def _write_log(run_log: Optional[RunLog], records: Sequence[BoRunRecord]) -> None:
    if run_log is not None:
        for record in records:
            run_log.write(record)


def run_bo(bench: BenchmarkTable, seed: int = 0, config: Optional[RunConfig] = None, run_log: Optional[RunLog] = None) -> List[BoRunRecord]:
    """Initial uniform design, then ``iters`` rounds of fit, LCB proposal and benchmark evaluation."""
    config = config or RunConfig()
    rng = np.random.default_rng(seed)
    observations = _Observations(bench, np.random.default_rng([seed, 1]))
    spaces = _candidates(bench, config)
    design = _design_pool(bench, spaces)
    log.info(
        "BO on %s (seed %d): beta_sqrt=%g init=%d batch=%d iters=%d kernel=%s optimizer=%s",
        bench.name,
        seed,
        config.beta_sqrt,
        config.init,
        config.batch,
        config.iters,
        config.kernel,
        config.optimizer,
    )

    started = time.perf_counter()
    chosen = rng.choice(len(design), size=min(config.init, len(design)), replace=False)
    proposed = [observations.add(design[i]) for i in sorted(chosen)]
    records = [observations.record("bo", seed, 0, proposed, {"evaluate": time.perf_counter() - started})]

    for iteration in range(1, config.iters + 1):
        if len(observations.keys) >= len(design):
            log.warning("Every architecture has been evaluated after %d iterations", iteration - 1)
            records[-1].exhausted = True
            break
        timings: Dict[str, float] = {}
        started = time.perf_counter()
        gp = _fit(observations, bench, config, seed, iteration)
        timings["fit"] = time.perf_counter() - started

        started = time.perf_counter()
        try:
            pool = _propose(gp, bench, spaces, config, observations.keys)
        except SpaceExhaustedError:
            log.warning("Space exhausted at iteration %d", iteration)
            records[-1].exhausted = True
            break
        timings["optimize"] = time.perf_counter() - started

        started = time.perf_counter()
        proposed = [observations.add(c.graph, c) for c in pool.candidates]
        timings["evaluate"] = time.perf_counter() - started
        record = observations.record("bo", seed, iteration, proposed, timings, gp, pool)
        records.append(record)
        log.info(
            "Iteration %d: best LCB %.4f, incumbent val error %.4f (%d observations)",
            iteration,
            pool.candidates[0].acquisition,
            record.incumbent_val_error,
            record.num_observations,
        )
        if len(pool) < config.batch:
            record.exhausted = True
            break
    _write_log(run_log, records)
    return records


def random_search(
    bench: BenchmarkTable,
    seed: int = 0,
    iters: int = 30,
    init: int = 10,
    batch: int = 5,
    cap: int = DEFAULT_ENUMERATION_CAP,
    run_log: Optional[RunLog] = None,
) -> List[BoRunRecord]:
    """Uniform sampling without replacement under the same evaluation budget as ``run_bo``."""
    rng = np.random.default_rng(seed)
    observations = _Observations(bench, np.random.default_rng([seed, 1]))
    try:
        design = _design_pool(bench, [EnumeratedSpace.build(spec, cap) for spec in bench.spaces])
    except SpaceTooLargeError:
        design = _design_pool(bench, [])
    order = rng.permutation(len(design))
    records: List[BoRunRecord] = []
    position = 0
    for iteration, size in enumerate([init] + [batch] * iters):
        if position >= len(order):
            records[-1].exhausted = True
            break
        started = time.perf_counter()
        picked = order[position : position + size]
        position += len(picked)
        proposed = [observations.add(design[i]) for i in picked]
        records.append(observations.record("random", seed, iteration, proposed, {"evaluate": time.perf_counter() - started}))
    _write_log(run_log, records)
    return records


class ComparisonSummary(BaseModel):
    benchmark: str
    seeds: List[int]
    iterations: int
    optimum_val_error: float
    bo_final: List[float] = Field(description="Final incumbent validation error per seed")
    random_final: List[float]
    bo_median: float
    random_median: float
    bo_hit_rate: float = Field(description="Fraction of seeds whose incumbent reaches the benchmark optimum")
    random_hit_rate: float

    @property
    def bo_dominates(self) -> bool:
        return self.bo_median < self.random_median


def compare_with_random(
    bench: BenchmarkTable,
    seeds: Sequence[int],
    config: Optional[RunConfig] = None,
    tolerance: float = 1e-12,
) -> ComparisonSummary:
    """Paired BO and random-search runs on the same seeds."""
    config = config or RunConfig()
    _, optimum = bench.best()
    bo_final: List[float] = []
    random_final: List[float] = []
    for seed in seeds:
        bo_final.append(run_bo(bench, seed, config)[-1].incumbent_val_error)
        random_final.append(random_search(bench, seed, config.iters, config.init, config.batch, config.cap)[-1].incumbent_val_error)
        log.info("Seed %d: BO %.4f, random %.4f", seed, bo_final[-1], random_final[-1])
    return ComparisonSummary(
        benchmark=bench.name,
        seeds=list(seeds),
        iterations=config.iters,
        optimum_val_error=optimum,
        bo_final=bo_final,
        random_final=random_final,
        bo_median=float(np.median(bo_final)),
        random_median=float(np.median(random_final)),
        bo_hit_rate=float(np.mean([v <= optimum + tolerance for v in bo_final])),
        random_hit_rate=float(np.mean([v <= optimum + tolerance for v in random_final])),
    )
