#!/usr/bin/env python3
"""
Stand-in for an external MIP solver, used by the tests.

Reads an emitted LP file, walks the graph space recorded in its metadata and writes the
graph variables of up to ``--pool`` members that pass every no-good cut. Other variables
are left out of the pool and read as 0.

Usage: fake_solver.py MODEL SOLUTION [--pool N] [--mode ok|empty|garbage|malformed|nofile|fail]
"""

import argparse
import sys
from pathlib import Path

from archsearch_mip.graphs.space import enumerate_space
from archsearch_mip.mip.acquisition import pattern_variables
from archsearch_mip.mip.writers import format_assignment, read_lp


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("model")
    parser.add_argument("solution")
    parser.add_argument("--pool", type=int, default=1000)
    parser.add_argument("--mode", default="ok", choices=["ok", "empty", "garbage", "malformed", "nofile", "fail"])
    args = parser.parse_args()

    model = read_lp(Path(args.model).read_text())
    print(f"read {model.num_variables} variables and {model.num_constraints} constraints")
    if args.mode == "fail":
        print("license error", file=sys.stderr)
        return 3
    if args.mode == "nofile":
        return 0
    if args.mode == "empty":
        Path(args.solution).write_text("# no solution found\n")
        return 0
    if args.mode == "malformed":
        Path(args.solution).write_text("A_0_0\n")
        return 0
    if args.mode == "garbage":
        # no node exists, which breaks the node-count condition
        names = [name for name, variable in model.variables.items() if variable.kind == "A"]
        Path(args.solution).write_text(format_assignment({name: 0.0 for name in names}, one_per_line=False))
        return 0

    spec = model.metadata.spec
    if spec is None:
        print("model carries no space", file=sys.stderr)
        return 2
    cuts = [c for c in model.constraints if c.tag == "nogood"]
    lines = []
    for g in enumerate_space(spec):
        values = dict(pattern_variables(model, g))
        if all(c.activity(values) >= c.rhs for c in cuts):
            lines.append(format_assignment(values, one_per_line=False))
        if len(lines) == args.pool:
            break
    Path(args.solution).write_text("".join(lines))
    print(f"wrote {len(lines)} solutions")
    return 0


if __name__ == "__main__":
    sys.exit(main())
