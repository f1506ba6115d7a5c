"""
archsearch-mip - graph Bayesian optimisation with a mixed-integer encoding of the acquisition
"""

from archsearch_mip.exceptions import ArchSearchError
from archsearch_mip.gp import FitConfig, GpState, fit
from archsearch_mip.graphs import GraphSpaceSpec, LabeledGraph, compute_metrics, enumerate_space, resolve_space
from archsearch_mip.harness import BenchmarkTable, RunConfig, run_bo, synth_benchmark
from archsearch_mip.kernels import KernelParams, combined_kernel
from archsearch_mip.mip import build_space_model, emit
from archsearch_mip.optimize import CandidatePool, optimize_enumerative, optimize_external

__all__ = [
    "ArchSearchError",
    "BenchmarkTable",
    "CandidatePool",
    "FitConfig",
    "GpState",
    "GraphSpaceSpec",
    "KernelParams",
    "LabeledGraph",
    "RunConfig",
    "build_space_model",
    "combined_kernel",
    "compute_metrics",
    "emit",
    "enumerate_space",
    "fit",
    "optimize_enumerative",
    "optimize_external",
    "resolve_space",
    "run_bo",
    "synth_benchmark",
]
