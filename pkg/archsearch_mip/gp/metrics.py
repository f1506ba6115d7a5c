import logging
import math
from typing import Any, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy import stats

from archsearch_mip.graphs.graph import LabeledGraph
from archsearch_mip.gp.gaussian_process import GpState

log = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-12


class PredictiveMetrics(BaseModel):
    rmse: float = Field(description="Root mean squared error of the posterior mean")
    mnll: float = Field(description="Mean negative log likelihood under the per-point predictive Gaussian")
    spearman: float = Field(description="Rank correlation, 0 when undefined")
    spearman_defined: bool = Field(default=True, description="False when either ranking is constant")


def rmse(mean: Any, target: Any) -> float:
    mean, target = np.asarray(mean, dtype=np.float64), np.asarray(target, dtype=np.float64)
    return float(np.sqrt(np.mean((mean - target) ** 2)))


def mnll(mean: Any, variance: Any, target: Any) -> float:
    variance = np.maximum(np.asarray(variance, dtype=np.float64), VARIANCE_FLOOR)
    return float(-np.mean(stats.norm.logpdf(np.asarray(target, dtype=np.float64), loc=mean, scale=np.sqrt(variance))))


def spearman(mean: Any, target: Any) -> float:
    """Spearman correlation with average ranks for ties; NaN when a ranking is constant."""
    mean, target = np.asarray(mean, dtype=np.float64), np.asarray(target, dtype=np.float64)
    if mean.size < 2 or np.ptp(mean) == 0 or np.ptp(target) == 0:
        return math.nan
    coefficient, _ = stats.spearmanr(mean, target)
    return float(coefficient)


def predictive_metrics(mean: Any, variance: Any, target: Any) -> PredictiveMetrics:
    if np.asarray(target).size == 0:
        raise ValueError("metrics need a nonempty test set")
    rank = spearman(mean, target)
    defined = not math.isnan(rank)
    if not defined:
        log.warning("Spearman correlation is undefined for a constant ranking; reporting 0")
    return PredictiveMetrics(
        rmse=rmse(mean, target),
        mnll=mnll(mean, variance, target),
        spearman=rank if defined else 0.0,
        spearman_defined=defined,
    )


def metrics(gp: GpState, x_test: Sequence[LabeledGraph], y_test: Any) -> PredictiveMetrics:
    mean, variance = gp.posterior_batch(x_test)
    return predictive_metrics(mean, gp.predictive_variance(variance), y_test)
