from archsearch_mip.optimize.enumerative import EnumeratedSpace, certify_pool, optimize_enumerative
from archsearch_mip.optimize.external import SOLVER_CMD_ENV, SolverConfig, build_acquisition_model, optimize_external, optimize_two_size, run_solver
from archsearch_mip.optimize.pool import Candidate, CandidatePool, merge_pools

__all__ = [
    "SOLVER_CMD_ENV",
    "Candidate",
    "CandidatePool",
    "EnumeratedSpace",
    "SolverConfig",
    "build_acquisition_model",
    "certify_pool",
    "merge_pools",
    "optimize_enumerative",
    "optimize_external",
    "optimize_two_size",
    "run_solver",
]
