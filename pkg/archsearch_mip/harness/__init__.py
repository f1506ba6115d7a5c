from archsearch_mip.harness.benchmark import (
    BenchmarkRecord,
    BenchmarkTable,
    Evaluation,
    ingest_benchmark,
    load_benchmark,
    synth_benchmark,
    write_benchmark,
)
from archsearch_mip.harness.bo_loop import (
    BoRunRecord,
    ComparisonSummary,
    ProposedPoint,
    RunConfig,
    RunLog,
    compare_with_random,
    fit_config_for,
    random_search,
    read_run_log,
    run_bo,
)
from archsearch_mip.harness.kernel_compare import KernelCompareReport, KernelCompareRow, kernel_compare
from archsearch_mip.harness.reporting import format_mean_sd, regret_curve, write_regret_csv

__all__ = [
    "BenchmarkRecord",
    "BenchmarkTable",
    "BoRunRecord",
    "ComparisonSummary",
    "Evaluation",
    "KernelCompareReport",
    "KernelCompareRow",
    "ProposedPoint",
    "RunConfig",
    "RunLog",
    "compare_with_random",
    "fit_config_for",
    "format_mean_sd",
    "ingest_benchmark",
    "kernel_compare",
    "load_benchmark",
    "random_search",
    "read_run_log",
    "regret_curve",
    "run_bo",
    "synth_benchmark",
    "write_benchmark",
]
