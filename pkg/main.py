#!/usr/bin/env python3
"""
Main entry point for archsearch-mip

This module provides both programmatic and CLI interfaces for a BO run on a synthetic
benchmark.
"""

import sys
from typing import List, Optional

from archsearch_mip.graphs.space import resolve_space
from archsearch_mip.harness.benchmark import synth_benchmark
from archsearch_mip.harness.bo_loop import BoRunRecord, RunConfig, run_bo
from archsearch_mip.log import configure_logging


def search_architectures(
    space: str = "nb201",
    seed: int = 0,
    iters: int = 30,
    config: Optional[RunConfig] = None,
) -> List[BoRunRecord]:
    """
    Run BO on the synthetic benchmark of a space.

    Args:
        space: Space preset name or a JSON/TOML space file
        seed: Seed of the initial design and the GP restarts
        iters: Number of BO iterations after the initial design
        config: Protocol settings; the defaults follow the standard 10 + 30 x 5 budget

    Returns:
        List[BoRunRecord]: One record per iteration, iteration 0 being the initial design

    Example:
        >>> records = search_architectures("digraph-3", iters=3)
        >>> records[-1].incumbent_val_error
    """
    config = (config or RunConfig()).model_copy(update={"iters": iters})
    bench = synth_benchmark(resolve_space(space))
    return run_bo(bench, seed, config)


def main():
    """CLI entry point for a single BO run."""
    if len(sys.argv) < 2:
        print("Usage: python main.py <space> [--seed N] [--iters N]")
        print("\nExamples:")
        print("  python main.py nb201")
        print("  python main.py digraph-3 --iters 5")
        print("  python main.py dag-4 --seed 7")
        sys.exit(1)

    space = sys.argv[1]
    seed = 0
    iters = 30

    for flag in ("--seed", "--iters"):
        if flag in sys.argv:
            try:
                value = int(sys.argv[sys.argv.index(flag) + 1])
            except (ValueError, IndexError):
                print(f"Error: {flag} requires a number")
                sys.exit(1)
            if flag == "--seed":
                seed = value
            else:
                iters = value

    configure_logging("INFO")
    print(f"🔍 Searching space: '{space}'")
    print(f"   Seed: {seed}")
    print(f"   Iterations: {iters}")
    print("-" * 60)

    try:
        records = search_architectures(space, seed, iters)
    except Exception as e:
        print(f"❌ Error: {e}")
        sys.exit(1)

    print("✅ Search completed!")
    print(f"Observations: {records[-1].num_observations}")
    print(f"Incumbent validation error: {records[-1].incumbent_val_error:.5f}")
    print(f"Incumbent test error: {records[-1].incumbent_test_error:.5f}")
    print(f"Incumbent key: {records[-1].incumbent_key}")


if __name__ == "__main__":
    main()
