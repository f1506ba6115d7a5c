"""Exhaustive acquisition optimisation over an enumerated space."""

import logging
import math
from dataclasses import dataclass, field
from typing import AbstractSet, Dict, List, Optional, Tuple

import numpy as np

from archsearch_mip.exceptions import SpaceExhaustedError
from archsearch_mip.gp.gaussian_process import GpState
from archsearch_mip.graphs.graph import LabeledGraph, key_hex
from archsearch_mip.graphs.space import DEFAULT_ENUMERATION_CAP, GraphSpaceSpec, LabelVocabulary, enumerate_space
from archsearch_mip.kernels.features import FeatureBlock, featurize
from archsearch_mip.optimize.pool import Candidate, CandidatePool

log = logging.getLogger(__name__)

_SCORE_CHUNK = 4096
MEMBER_TOLERANCE = 1e-6


@dataclass
class EnumeratedSpace:
    """Every graph of a space with its key, plus feature blocks cached per GP layout."""

    spec: GraphSpaceSpec
    graphs: List[LabeledGraph]
    keys: List[str]
    _features: Dict[Tuple[str, int, bool], FeatureBlock] = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, spec: GraphSpaceSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> "EnumeratedSpace":
        graphs = list(enumerate_space(spec, cap))
        log.info("Enumerated %s: %d graphs", spec.label, len(graphs))
        return cls(spec=spec, graphs=graphs, keys=[key_hex(g) for g in graphs])

    def __len__(self) -> int:
        return len(self.graphs)

    def features(self, vocabulary: LabelVocabulary, width: int, match_unreachable: bool) -> FeatureBlock:
        cache_key = (vocabulary.model_dump_json(), width, match_unreachable)
        block = self._features.get(cache_key)
        if block is None:
            block = featurize(self.graphs, vocabulary, width, match_unreachable)
            self._features[cache_key] = block
        return block

    def lcb(self, gp: GpState, beta_sqrt: float, rows: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Posterior mean, standard deviation and LCB of the chosen rows (all by default)."""
        block = self.features(gp.vocabulary, gp.width, gp.params.match_unreachable)
        rows = np.arange(len(self)) if rows is None else rows
        means, stds = [], []
        for start in range(0, len(rows), _SCORE_CHUNK):
            mean, variance = gp.posterior_features(block.take(rows[start : start + _SCORE_CHUNK]))
            means.append(mean)
            stds.append(np.sqrt(variance))
        mean = np.concatenate(means) if means else np.zeros(0)
        std = np.concatenate(stds) if stds else np.zeros(0)
        return mean, std, mean - beta_sqrt * std


def optimize_enumerative(
    space: EnumeratedSpace,
    gp: GpState,
    beta_sqrt: float = 3.0,
    k: int = 5,
    exclude: AbstractSet[str] = frozenset(),
) -> CandidatePool:
    """Score every non-excluded graph and keep the ``k`` lowest LCB values."""
    rows = np.array([i for i, key in enumerate(space.keys) if key not in exclude], dtype=np.int64)
    if rows.size == 0:
        raise SpaceExhaustedError(f"every graph of {space.spec.label} is excluded")
    mean, std, lcb = space.lcb(gp, beta_sqrt, rows)
    # argsort on (lcb, key) keeps ties in key order
    keys = np.array([space.keys[i] for i in rows])
    order = np.lexsort((keys, lcb))[:k]
    scored = [
        Candidate(graph=space.graphs[rows[i]], key=space.keys[rows[i]], acquisition=float(lcb[i]), mean=float(mean[i]), std=float(std[i]))
        for i in order
    ]
    pool = CandidatePool.from_scored(scored, k, "exhaustive")
    log.info("Enumerative optimum over %d graphs: LCB %.5f", rows.size, pool.candidates[0].acquisition)
    return pool


def certify_pool(
    space: EnumeratedSpace,
    gp: GpState,
    beta_sqrt: float,
    pool: CandidatePool,
    exclude: AbstractSet[str] = frozenset(),
) -> Tuple[float, bool]:
    """Re-scan with scalar posteriors: the best LCB outside ``exclude`` and whether the pool is a true top set.

    The pool certifies when every member is a non-excluded graph of the space whose stored acquisition
    matches its re-scored LCB, and no other non-excluded graph scores strictly below the worst member.
    """
    members = {c.key: c.acquisition for c in pool.candidates}
    best = math.inf
    outside = math.inf
    ok = bool(members)
    found = 0
    for g, key in zip(space.graphs, space.keys):
        if key in exclude:
            continue
        mean, variance = gp.posterior(g)
        lcb = mean - beta_sqrt * math.sqrt(variance)
        best = min(best, lcb)
        if key in members:
            found += 1
            ok = ok and abs(members[key] - lcb) <= MEMBER_TOLERANCE * max(1.0, abs(lcb))
        else:
            outside = min(outside, lcb)
    if not ok or found != len(members):
        return best, False
    return best, outside >= pool.candidates[-1].acquisition - 1e-9
