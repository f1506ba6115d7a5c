"""Tabular benchmarks: per-seed accuracies keyed by canonical graph key.

On disk a benchmark is line-delimited JSON: a header line followed by one record per line,
so NAS-101-scale tables stream in without loading a monolithic document.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterator, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from filelock import FileLock
from pydantic import BaseModel, Field, ValidationError, field_validator

from archsearch_mip.exceptions import ArchSearchError, BenchmarkLookupError, BenchmarkSchemaError
from archsearch_mip.graphs.graph import LabeledGraph, compute_metrics, key_hex
from archsearch_mip.graphs.space import DEFAULT_ENUMERATION_CAP, GraphSpaceSpec, enumerate_space, resolve_space

log = logging.getLogger(__name__)

BENCHMARK_FORMAT = "archsearch-benchmark/1"
DEFAULT_SEEDS = 20

ObjectiveMode = Literal["deterministic", "noisy"]


class BenchmarkRecord(BaseModel):
    graph: LabeledGraph
    val_acc: List[float] = Field(min_length=1, description="Validation accuracy per training seed")
    test_acc: List[float] = Field(min_length=1, description="Test accuracy per training seed")

    @field_validator("val_acc", "test_acc")
    @classmethod
    def _check_accuracies(cls, values: List[float]) -> List[float]:
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise ValueError("accuracies must lie in [0, 1]")
        return values

    @property
    def mean_val_error(self) -> float:
        return 1.0 - float(np.mean(self.val_acc))

    @property
    def mean_test_error(self) -> float:
        return 1.0 - float(np.mean(self.test_acc))


class Evaluation(BaseModel):
    key: str
    val_error: float
    test_error: float
    seed_index: Optional[int] = Field(default=None, description="Seed drawn in noisy mode")


class BenchmarkHeader(BaseModel):
    format: Literal["archsearch-benchmark/1"] = BENCHMARK_FORMAT
    name: str
    spaces: List[GraphSpaceSpec] = Field(min_length=1)
    mode: ObjectiveMode = "deterministic"
    metadata: Dict[str, Any] = Field(default_factory=dict)


class BenchmarkTable(BaseModel):
    name: str
    spaces: List[GraphSpaceSpec] = Field(min_length=1, description="One space, or one per graph size for two-size runs")
    mode: ObjectiveMode = "deterministic"
    records: Dict[str, BenchmarkRecord] = Field(default_factory=dict)
    metadata: Dict[str, Any] = Field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def with_mode(self, mode: ObjectiveMode) -> "BenchmarkTable":
        return self.model_copy(update={"mode": mode})

    def lookup(self, g: LabeledGraph) -> BenchmarkRecord:
        key = key_hex(g)
        record = self.records.get(key)
        if record is None:
            raise BenchmarkLookupError(key)
        return record

    def evaluate(self, g: LabeledGraph, rng: Optional[np.random.Generator] = None) -> Evaluation:
        """Validation and test error of ``g``; noisy mode draws one seed for both."""
        record = self.lookup(g)
        key = key_hex(g)
        if self.mode == "deterministic":
            return Evaluation(key=key, val_error=record.mean_val_error, test_error=record.mean_test_error)
        rng = rng if rng is not None else np.random.default_rng()
        seed_index = int(rng.integers(min(len(record.val_acc), len(record.test_acc))))
        return Evaluation(
            key=key,
            val_error=1.0 - record.val_acc[seed_index],
            test_error=1.0 - record.test_acc[seed_index],
            seed_index=seed_index,
        )

    def best(self) -> Tuple[str, float]:
        """Key and seed-mean validation error of the best architecture."""
        key = min(self.records, key=lambda k: (self.records[k].mean_val_error, k))
        return key, self.records[key].mean_val_error

    def header(self) -> BenchmarkHeader:
        return BenchmarkHeader(name=self.name, spaces=self.spaces, mode=self.mode, metadata=self.metadata)


def _slot_count(spec: GraphSpaceSpec) -> int:
    if spec.edge_labeled is not None:
        return spec.n * (spec.n - 1) // 2
    if spec.node_labeled is not None:
        return max(spec.n - 2, 0)
    return 0


def _label_one_count(g: LabeledGraph) -> int:
    if g.edge_labels is not None:
        return sum(1 for _, _, label in g.edge_labels if label == 1)
    if g.node_labels is not None:
        return sum(1 for label in g.node_labels if label == 1)
    return 0


def synthetic_features(g: LabeledGraph, spec: GraphSpaceSpec) -> Tuple[float, float, float]:
    """Source-to-sink distance, share of label-1 slots and edge density, each in [0, 1]."""
    n = spec.n
    distance = float(compute_metrics(g).dist[0, n - 1]) / n
    slots = _slot_count(spec)
    labels = _label_one_count(g) / slots if slots else 0.0
    max_edges = spec.max_edges()
    density = g.num_edges / max_edges if max_edges else 0.0
    return distance, labels, density


def synthetic_accuracy(features: Tuple[float, float, float], weights: Tuple[float, float, float]) -> float:
    return float(np.clip(sum(w * f for w, f in zip(weights, features)), 0.0, 1.0))


VAL_WEIGHTS = (0.5, 0.3, 0.2)
TEST_WEIGHTS = (0.2, 0.5, 0.3)


def synth_benchmark(
    spaces: Union[GraphSpaceSpec, Sequence[GraphSpaceSpec]],
    seed: int = 0,
    noise_sd: float = 0.0,
    seeds: int = DEFAULT_SEEDS,
    cap: int = DEFAULT_ENUMERATION_CAP,
    name: Optional[str] = None,
) -> BenchmarkTable:
    """Closed-form accuracy table over every graph of the space(s), with seeded per-seed noise."""
    specs = [spaces] if isinstance(spaces, GraphSpaceSpec) else list(spaces)
    if not specs:
        raise ValueError("synth_benchmark needs at least one space")
    if noise_sd < 0:
        raise ValueError("noise_sd must be nonnegative")
    rng = np.random.default_rng(seed)
    records: Dict[str, BenchmarkRecord] = {}
    best_key, best_val = "", -1.0
    for spec in specs:
        for g in enumerate_space(spec, cap):
            features = synthetic_features(g, spec)
            val = synthetic_accuracy(features, VAL_WEIGHTS)
            test = synthetic_accuracy(features, TEST_WEIGHTS)
            val_draws = np.clip(val + rng.normal(0.0, noise_sd, seeds), 0.0, 1.0) if noise_sd else np.full(seeds, val)
            test_draws = np.clip(test + rng.normal(0.0, noise_sd, seeds), 0.0, 1.0) if noise_sd else np.full(seeds, test)
            key = key_hex(g)
            records[key] = BenchmarkRecord(graph=g, val_acc=[float(v) for v in val_draws], test_acc=[float(v) for v in test_draws])
            if val > best_val or (val == best_val and key < best_key):
                best_key, best_val = key, val
    label = name or "synth-" + "+".join(spec.label for spec in specs)
    metadata = {
        "generator": "synthetic",
        "seed": seed,
        "noise_sd": noise_sd,
        "seeds": seeds,
        "optimum_key": best_key,
        "optimum_val_acc": best_val,
    }
    log.info("Synthesised %s: %d records, best noiseless val accuracy %.4f", label, len(records), best_val)
    return BenchmarkTable(name=label, spaces=specs, records=records, metadata=metadata)


def write_benchmark(table: BenchmarkTable, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with FileLock(str(path) + ".lock"):
        with path.open("w", encoding="utf-8") as handle:
            handle.write(table.header().model_dump_json() + "\n")
            for key in sorted(table.records):
                record = table.records[key]
                line = {"graph": record.graph.to_json(), "val_acc": record.val_acc, "test_acc": record.test_acc}
                handle.write(json.dumps(line, separators=(",", ":")) + "\n")
    log.info("Wrote %d records to %s", len(table), path)
    return path


def _record_lines(path: Path) -> Iterator[str]:
    with path.open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                yield line


def ingest_benchmark(path: Union[str, Path], mode: Optional[ObjectiveMode] = None) -> BenchmarkTable:
    """Stream a benchmark file, validating every record against the declared spaces."""
    path = Path(path)
    lines = _record_lines(path)
    try:
        first = next(lines)
    except StopIteration:
        raise BenchmarkSchemaError(-1, "empty benchmark file") from None
    try:
        header = BenchmarkHeader.model_validate_json(first)
    except ValidationError as exc:
        raise BenchmarkSchemaError(-1, f"invalid header: {exc}") from exc
    spaces = {spec.n: spec for spec in header.spaces}
    records: Dict[str, BenchmarkRecord] = {}
    for index, line in enumerate(lines):
        try:
            record = BenchmarkRecord.model_validate_json(line)
        except ValidationError as exc:
            raise BenchmarkSchemaError(index, str(exc.errors()[0]["msg"])) from exc
        spec = spaces.get(record.graph.n)
        if spec is None:
            raise BenchmarkSchemaError(index, f"no space with {record.graph.n} node slots")
        problems = spec.violations(record.graph)
        if problems:
            raise BenchmarkSchemaError(index, f"graph outside {spec.label}: {problems[0]}")
        key = key_hex(record.graph)
        if key in records:
            raise BenchmarkSchemaError(index, f"duplicate architecture {key}")
        records[key] = record
    log.info("Ingested %s: %d records", header.name, len(records))
    return BenchmarkTable(name=header.name, spaces=header.spaces, mode=mode or header.mode, records=records, metadata=header.metadata)


def load_benchmark(source: str, mode: Optional[ObjectiveMode] = None, seed: int = 0, noise_sd: float = 0.0) -> BenchmarkTable:
    """A benchmark file path, or ``synth:<space>[,<space>...]`` for a synthetic table."""
    if source.startswith("synth:"):
        table = synth_benchmark([resolve_space(name) for name in source[6:].split(",")], seed=seed, noise_sd=noise_sd)
        return table.with_mode(mode) if mode else table
    if not Path(source).exists():
        raise ArchSearchError(f"benchmark file {source} does not exist")
    return ingest_benchmark(source, mode)
