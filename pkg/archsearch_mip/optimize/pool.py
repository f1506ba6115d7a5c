from typing import Iterable, List, Literal, Sequence

from pydantic import BaseModel, ConfigDict, Field

from archsearch_mip.graphs.graph import LabeledGraph

Certificate = Literal["exhaustive", "external-solver-claimed", "heuristic"]
CERTIFICATE_STRENGTH = {"exhaustive": 2, "external-solver-claimed": 1, "heuristic": 0}


class Candidate(BaseModel):
    model_config = ConfigDict(frozen=True)

    graph: LabeledGraph
    key: str = Field(description="Hex canonical key")
    acquisition: float = Field(description="LCB value mu - beta_sqrt * sigma")
    mean: float
    std: float


class CandidatePool(BaseModel):
    """Candidates ranked by acquisition value, ties broken by canonical key."""

    candidates: List[Candidate] = Field(default_factory=list)
    certificate: Certificate = "heuristic"
    pool_size: int = Field(default=5, ge=1)

    @classmethod
    def from_scored(cls, scored: Iterable[Candidate], pool_size: int, certificate: Certificate) -> "CandidatePool":
        ranked: List[Candidate] = []
        seen = set()
        for candidate in sorted(scored, key=lambda c: (c.acquisition, c.key)):
            if candidate.key in seen:
                continue
            seen.add(candidate.key)
            ranked.append(candidate)
            if len(ranked) == pool_size:
                break
        return cls(candidates=ranked, certificate=certificate, pool_size=pool_size)

    @property
    def graphs(self) -> List[LabeledGraph]:
        return [c.graph for c in self.candidates]

    @property
    def keys(self) -> List[str]:
        return [c.key for c in self.candidates]

    def __len__(self) -> int:
        return len(self.candidates)


def merge_pools(pools: Sequence[CandidatePool], pool_size: int) -> CandidatePool:
    """Global top-``pool_size`` of the union; the weakest certificate among the inputs survives."""
    if not pools:
        return CandidatePool(pool_size=pool_size)
    certificate = min((p.certificate for p in pools), key=CERTIFICATE_STRENGTH.__getitem__)
    return CandidatePool.from_scored((c for p in pools for c in p.candidates), pool_size, certificate)
