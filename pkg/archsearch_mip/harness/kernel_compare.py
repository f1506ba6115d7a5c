"""Surrogate quality of the linear and exponential shortest-path kernels on a benchmark."""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from archsearch_mip.gp.gaussian_process import FitConfig, fit
from archsearch_mip.gp.metrics import PredictiveMetrics, metrics
from archsearch_mip.harness.benchmark import BenchmarkTable
from archsearch_mip.harness.reporting import format_mean_sd
from archsearch_mip.kernels.graph_kernels import KernelForm

log = logging.getLogger(__name__)

METRICS = ("rmse", "mnll", "spearman")


class KernelCompareRow(BaseModel):
    kernel: KernelForm
    replications: int
    rmse_mean: float
    rmse_sd: float
    mnll_mean: float
    mnll_sd: float
    spearman_mean: float
    spearman_sd: float
    spearman_undefined: int = Field(default=0, description="Replications where Spearman was undefined and reported as 0")


class KernelCompareReport(BaseModel):
    benchmark: str
    train_n: int
    test_n: int
    reps: int
    seed: int
    rows: List[KernelCompareRow]
    per_replication: Dict[str, List[PredictiveMetrics]] = Field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.model_dump() for row in self.rows])

    def formatted(self, digits: int = 3) -> pd.DataFrame:
        """One row per kernel with ``mean(sd)`` cells."""
        return pd.DataFrame(
            [
                {
                    "kernel": row.kernel,
                    **{name: format_mean_sd(getattr(row, f"{name}_mean"), getattr(row, f"{name}_sd"), digits) for name in METRICS},
                }
                for row in self.rows
            ]
        )

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.model_dump(mode="json"), indent=2))
        return path


def kernel_compare(
    bench: BenchmarkTable,
    train_n: int = 50,
    test_n: int = 400,
    reps: int = 20,
    seed: int = 0,
    forms: Sequence[KernelForm] = ("linear", "exponential"),
    fit_config: Optional[FitConfig] = None,
) -> KernelCompareReport:
    """Fit one GP per kernel form on disjoint random train/test splits and score the test predictions."""
    if train_n < 2 or test_n < 1:
        raise ValueError("kernel_compare needs at least 2 training and 1 test architecture")
    keys = sorted(bench.records)
    if train_n + test_n > len(keys):
        raise ValueError(f"{bench.name} has {len(keys)} records, fewer than {train_n} + {test_n}")
    fit_config = fit_config or FitConfig()
    vocabulary = bench.spaces[0].vocabulary()
    width = max(spec.n for spec in bench.spaces)
    rng = np.random.default_rng(seed)
    results: Dict[str, List[PredictiveMetrics]] = {form: [] for form in forms}

    for rep in range(reps):
        order = rng.permutation(len(keys))
        train = [bench.records[keys[i]] for i in order[:train_n]]
        test = [bench.records[keys[i]] for i in order[train_n : train_n + test_n]]
        x_train, y_train = [r.graph for r in train], [r.mean_val_error for r in train]
        x_test, y_test = [r.graph for r in test], [r.mean_val_error for r in test]
        for form in forms:
            gp = fit(x_train, y_train, fit_config.model_copy(update={"form": form, "seed": seed + rep}), vocabulary, width)
            results[form].append(metrics(gp, x_test, y_test))
        log.info("Replication %d/%d done", rep + 1, reps)

    rows = []
    for form, scores in results.items():
        table = pd.DataFrame([s.model_dump() for s in scores])
        rows.append(
            KernelCompareRow(
                kernel=form,
                replications=len(scores),
                rmse_mean=float(table["rmse"].mean()),
                rmse_sd=float(table["rmse"].std(ddof=0)),
                mnll_mean=float(table["mnll"].mean()),
                mnll_sd=float(table["mnll"].std(ddof=0)),
                spearman_mean=float(table["spearman"].mean()),
                spearman_sd=float(table["spearman"].std(ddof=0)),
                spearman_undefined=int((~table["spearman_defined"]).sum()),
            )
        )
    return KernelCompareReport(
        benchmark=bench.name, train_n=train_n, test_n=test_n, reps=reps, seed=seed, rows=rows, per_replication=results
    )
