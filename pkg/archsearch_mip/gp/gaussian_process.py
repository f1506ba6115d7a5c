"""Graph Gaussian-process surrogate.

Targets are standardised internally; every value crossing the public boundary
(posterior means and variances, saved targets) is in the caller's units.
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular
from scipy.optimize import Bounds, minimize

from archsearch_mip.exceptions import GpNotFittedError, NotPositiveDefiniteError
from archsearch_mip.graphs.graph import LabeledGraph
from archsearch_mip.graphs.space import LabelVocabulary
from archsearch_mip.kernels.features import FeatureBlock, GramComponents, featurize, gram_components, self_components
from archsearch_mip.kernels.graph_kernels import KernelForm, KernelParams, infer_vocabulary

log = logging.getLogger(__name__)

_FAILED_FIT = 1e10
_STD_FLOOR = 1e-12


class FitConfig(BaseModel):
    lower: float = Field(default=0.01, gt=0.0, description="Lower bound of every kernel parameter")
    upper: float = Field(default=100.0, gt=0.0, description="Upper bound of every kernel parameter")
    initial: float = Field(default=1.0, gt=0.0, description="Starting value of every kernel parameter")
    form: KernelForm = "linear"
    match_unreachable: bool = True
    n_starts: int = Field(default=3, ge=1)
    max_evaluations: int = Field(default=200, ge=1, description="Likelihood evaluations shared by all starts")
    noise: Literal["fixed", "trainable"] = "fixed"
    fixed_noise: float = Field(default=1e-6, ge=0.0)
    noise_lower: float = Field(default=1e-6, gt=0.0)
    noise_upper: float = Field(default=1.0, gt=0.0)
    jitter: float = Field(default=1e-8, gt=0.0)
    max_jitter: float = Field(default=1e-2, gt=0.0)
    seed: int = 0

    @model_validator(mode="after")
    def _check_bounds(self) -> "FitConfig":
        if not self.lower < self.upper:
            raise ValueError("parameter bounds need lower < upper")
        if not self.lower <= self.initial <= self.upper:
            raise ValueError("initial parameter value lies outside the bounds")
        if not self.noise_lower < self.noise_upper:
            raise ValueError("noise bounds need lower < upper")
        if self.jitter > self.max_jitter:
            raise ValueError("starting jitter exceeds the maximum jitter")
        return self


def factorize(matrix: np.ndarray, noise: float, jitter: float, max_jitter: float) -> Tuple[np.ndarray, float]:
    """Cholesky of ``matrix + (noise + jitter) I`` doubling the jitter until it succeeds."""
    eye = np.eye(matrix.shape[0])
    current = jitter
    while current <= max_jitter:
        try:
            factor = cholesky(matrix + (noise + current) * eye, lower=True)
        except LinAlgError:
            current *= 2.0
            continue
        if current > jitter:
            log.warning("Gram matrix needed jitter %.3g to factorize", current)
        return factor, current
    raise NotPositiveDefiniteError(current / 2.0)


@dataclass(frozen=True)
class GpState:
    graphs: Tuple[LabeledGraph, ...]
    y: np.ndarray
    y_mean: float
    y_std: float
    params: KernelParams
    noise: float
    vocabulary: LabelVocabulary
    width: int
    features: FeatureBlock
    gram: np.ndarray
    factor: np.ndarray
    alpha_vec: np.ndarray
    jitter: float
    max_jitter: float
    log_marginal_likelihood: float
    evaluations: int = 0

    @property
    def num_points(self) -> int:
        return len(self.graphs)

    def precision(self) -> np.ndarray:
        """Inverse of the noisy Gram matrix, in standardised units."""
        return cho_solve((self.factor, True), np.eye(self.num_points))

    def featurize(self, graphs: Sequence[LabeledGraph]) -> FeatureBlock:
        return featurize(graphs, self.vocabulary, self.width, self.params.match_unreachable)

    def posterior_features(self, block: FeatureBlock) -> Tuple[np.ndarray, np.ndarray]:
        cross = gram_components(block, self.features).combine(self.params)
        prior = self_components(block).combine(self.params)
        mean = cross @ self.alpha_vec
        v = solve_triangular(self.factor, cross.T, lower=True)
        variance = prior - np.einsum("ij,ij->j", v, v)
        if np.any(variance < -1e-10):
            log.debug("Clamping negative posterior variance %.3g", float(variance.min()))
        variance = np.maximum(variance, 0.0)
        return self.y_mean + self.y_std * mean, self.y_std**2 * variance

    def posterior_batch(self, graphs: Sequence[LabeledGraph]) -> Tuple[np.ndarray, np.ndarray]:
        return self.posterior_features(self.featurize(graphs))

    def posterior(self, x: LabeledGraph) -> Tuple[float, float]:
        mean, variance = self.posterior_batch([x])
        return float(mean[0]), float(variance[0])

    def predictive_variance(self, variance: np.ndarray) -> np.ndarray:
        return variance + self.noise * self.y_std**2

    def save(self, path: Union[str, Path]) -> None:
        snapshot = GpSnapshot(
            graphs=[g.to_json() for g in self.graphs],
            y=[float(v) for v in self.y],
            params=self.params,
            noise=self.noise,
            vocabulary=self.vocabulary,
            width=self.width,
            jitter=self.jitter,
            max_jitter=self.max_jitter,
        )
        Path(path).write_text(snapshot.model_dump_json(indent=2))


class GpSnapshot(BaseModel):
    graphs: List[Dict[str, Any]]
    y: List[float]
    params: KernelParams
    noise: float
    vocabulary: LabelVocabulary
    width: int
    jitter: float = 1e-8
    max_jitter: float = 1e-2


def load_gp_state(path: Union[str, Path]) -> GpState:
    snapshot = GpSnapshot.model_validate(json.loads(Path(path).read_text()))
    graphs = [LabeledGraph.from_json(g) for g in snapshot.graphs]
    return condition(
        graphs,
        snapshot.y,
        snapshot.params,
        noise=snapshot.noise,
        vocabulary=snapshot.vocabulary,
        width=snapshot.width,
        jitter=snapshot.jitter,
        max_jitter=snapshot.max_jitter,
    )


def _standardize(y: np.ndarray) -> Tuple[np.ndarray, float, float]:
    mean = float(np.mean(y))
    std = float(np.std(y))
    if std < _STD_FLOOR:
        std = 1.0
    return (y - mean) / std, mean, std


def _check_targets(graphs: Sequence[LabeledGraph], y: Any) -> np.ndarray:
    targets = np.asarray(y, dtype=np.float64).reshape(-1)
    if len(graphs) != targets.shape[0]:
        raise ValueError(f"{len(graphs)} graphs but {targets.shape[0]} targets")
    if len(graphs) == 0:
        raise GpNotFittedError("cannot condition a GP on an empty training set")
    if not np.all(np.isfinite(targets)):
        raise ValueError("targets must be finite")
    return targets


def _state_from(
    graphs: Sequence[LabeledGraph],
    y: np.ndarray,
    features: FeatureBlock,
    components: GramComponents,
    params: KernelParams,
    noise: float,
    jitter: float,
    max_jitter: float,
    evaluations: int = 0,
) -> GpState:
    z, y_mean, y_std = _standardize(y)
    matrix = components.combine(params)
    factor, used = factorize(matrix, noise, jitter, max_jitter)
    alpha_vec = cho_solve((factor, True), z)
    lml = -0.5 * float(z @ alpha_vec) - float(np.sum(np.log(np.diag(factor)))) - 0.5 * len(z) * math.log(2 * math.pi)
    eye = np.eye(len(z))
    return GpState(
        graphs=tuple(graphs),
        y=y,
        y_mean=y_mean,
        y_std=y_std,
        params=params,
        noise=noise,
        vocabulary=features.vocabulary,
        width=features.width,
        features=features,
        gram=matrix + (noise + used) * eye,
        factor=factor,
        alpha_vec=alpha_vec,
        jitter=used,
        max_jitter=max_jitter,
        log_marginal_likelihood=lml,
        evaluations=evaluations,
    )


def condition(
    graphs: Sequence[LabeledGraph],
    y: Any,
    params: KernelParams,
    noise: float = 1e-6,
    vocabulary: Optional[LabelVocabulary] = None,
    width: Optional[int] = None,
    jitter: float = 1e-8,
    max_jitter: float = 1e-2,
) -> GpState:
    """Condition a GP on data with fixed kernel parameters."""
    targets = _check_targets(graphs, y)
    vocabulary = vocabulary or infer_vocabulary(graphs)
    features = featurize(graphs, vocabulary, width, params.match_unreachable)
    return _state_from(graphs, targets, features, gram_components(features, features), params, noise, jitter, max_jitter)


def fit(
    graphs: Sequence[LabeledGraph],
    y: Any,
    config: Optional[FitConfig] = None,
    vocabulary: Optional[LabelVocabulary] = None,
    width: Optional[int] = None,
) -> GpState:
    """Maximise the log marginal likelihood over the parameter box with restarted Powell searches."""
    config = config or FitConfig()
    targets = _check_targets(graphs, y)
    if len(graphs) < 2:
        raise GpNotFittedError("fitting needs at least two observations")
    vocabulary = vocabulary or infer_vocabulary(graphs)
    features = featurize(graphs, vocabulary, width, config.match_unreachable)
    components = gram_components(features, features)
    z, _, _ = _standardize(targets)

    names = ["alpha"]
    if vocabulary.node_labels is not None:
        names.append("beta")
    if vocabulary.edge_labels is not None:
        names.append("gamma")
    if config.form == "exponential":
        names.append("variance")
    trainable_noise = config.noise == "trainable"
    lower = [math.log(config.lower)] * len(names)
    upper = [math.log(config.upper)] * len(names)
    start = [math.log(config.initial)] * len(names)
    if trainable_noise:
        lower.append(math.log(config.noise_lower))
        upper.append(math.log(config.noise_upper))
        start.append(math.log(min(max(1e-3, config.noise_lower), config.noise_upper)))

    def unpack(theta: np.ndarray) -> Tuple[KernelParams, float]:
        values = {name: float(math.exp(t)) for name, t in zip(names, theta)}
        params = KernelParams(form=config.form, match_unreachable=config.match_unreachable, **values)
        noise = float(math.exp(theta[-1])) if trainable_noise else config.fixed_noise
        return params, noise

    evaluations = 0
    best_value = math.inf
    best_theta = np.asarray(start)

    def objective(theta: np.ndarray) -> float:
        nonlocal evaluations, best_value, best_theta
        evaluations += 1
        theta = np.clip(theta, lower, upper)
        params, noise = unpack(theta)
        try:
            factor, _ = factorize(components.combine(params), noise, config.jitter, config.max_jitter)
        except NotPositiveDefiniteError:
            return _FAILED_FIT
        alpha_vec = cho_solve((factor, True), z)
        value = 0.5 * float(z @ alpha_vec) + float(np.sum(np.log(np.diag(factor))))
        if value < best_value:
            best_value, best_theta = value, theta.copy()
        return value

    rng = np.random.default_rng(config.seed)
    starts = [np.asarray(start)] + [rng.uniform(lower, upper) for _ in range(config.n_starts - 1)]
    bounds = Bounds(lower, upper)
    for i, x0 in enumerate(starts):
        remaining = config.max_evaluations - evaluations
        budget = remaining // (len(starts) - i)
        if budget < 1:
            break
        if i == 0:
            objective(x0)
            budget -= 1
            if budget < 1:
                continue
        minimize(objective, x0, method="Powell", bounds=bounds, options={"maxfev": budget, "xtol": 1e-3, "ftol": 1e-8})

    params, noise = unpack(best_theta)
    state = _state_from(graphs, targets, features, components, params, noise, config.jitter, config.max_jitter, evaluations)
    log.info(
        "GP fit on %d points: alpha=%.4g beta=%.4g gamma=%.4g variance=%.4g noise=%.3g lml=%.4f (%d evaluations)",
        len(graphs),
        params.alpha,
        params.beta,
        params.gamma,
        params.variance,
        noise,
        state.log_marginal_likelihood,
        evaluations,
    )
    return state
