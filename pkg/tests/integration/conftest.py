import os

import pytest
from rich import print

from archsearch_mip.harness.benchmark import BenchmarkTable, synth_benchmark
from archsearch_mip.graphs.space import nas_bench_201
from archsearch_mip.log import configure_logging
from archsearch_mip.optimize.external import SOLVER_CMD_ENV


@pytest.fixture(scope="module", autouse=True)
def integration_logging_fixture():
    # Code to run before each module
    print("\n[magenta]archsearch-mip integration setup[/magenta]")
    configure_logging("INFO")
    yield
    # Code to run after each module
    print("\n[magenta]archsearch-mip integration teardown[/magenta]")
    configure_logging("WARNING")


@pytest.fixture(scope="session")
def nb201_bench() -> BenchmarkTable:
    """Noiseless synthetic table over the 15,625 zero-op cells."""
    return synth_benchmark(nas_bench_201(), seed=0)


@pytest.fixture
def solver_command() -> str:
    command = os.getenv(SOLVER_CMD_ENV)
    if not command:
        pytest.skip(f"{SOLVER_CMD_ENV} is not set; external solver checks skipped")
    return command
