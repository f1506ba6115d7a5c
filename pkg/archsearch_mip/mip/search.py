"""Exhaustive completion search over every integer assignment of a linear model.

Depth-first branching in declaration order with interval-bound propagation on the
integral rows. Propagation only removes values that no solution can take, so the search
visits every feasible assignment exactly once.
"""

import logging
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

from archsearch_mip.exceptions import ModelBuildError
from archsearch_mip.mip.model import MipModel

log = logging.getLogger(__name__)

Row = Tuple[List[int], List[int], Optional[int], Optional[int]]


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class _Propagator:
    def __init__(self, model: MipModel):
        if model.quadratic_constraints:
            raise ModelBuildError("completion search handles linear models only")
        self.names = list(model.variables)
        column = {name: j for j, name in enumerate(self.names)}
        for name in self.names:
            variable = model.variables[name]
            if not variable.is_integer:
                raise ModelBuildError(f"completion search needs integer variables, {name} is continuous")
        self.lower = [int(model.variables[name].lower) for name in self.names]
        self.upper = [int(model.variables[name].upper) for name in self.names]
        self.rows: List[Row] = []
        self.watch: List[List[int]] = [[] for _ in self.names]
        for constraint in model.constraints:
            if not float(constraint.rhs).is_integer() or not all(float(c).is_integer() for _, c in constraint.terms):
                raise ModelBuildError(f"constraint {constraint.name} has fractional coefficients")
            cols = [column[name] for name, _ in constraint.terms]
            coefs = [int(c) for _, c in constraint.terms]
            rhs = int(constraint.rhs)
            lo = rhs if constraint.sense in (">=", "=") else None
            hi = rhs if constraint.sense in ("<=", "=") else None
            index = len(self.rows)
            self.rows.append((cols, coefs, lo, hi))
            for j in cols:
                self.watch[j].append(index)

    def propagate(self, lower: List[int], upper: List[int], queue: List[int]) -> bool:
        """Tighten bounds in place until a fixpoint; False when a row cannot be met."""
        pending = set(queue)
        while queue:
            index = queue.pop()
            pending.discard(index)
            cols, coefs, lo, hi = self.rows[index]
            min_act = max_act = 0
            for j, c in zip(cols, coefs):
                if c > 0:
                    min_act += c * lower[j]
                    max_act += c * upper[j]
                else:
                    min_act += c * upper[j]
                    max_act += c * lower[j]
            if (hi is not None and min_act > hi) or (lo is not None and max_act < lo):
                return False
            for j, c in zip(cols, coefs):
                new_lo, new_hi = lower[j], upper[j]
                if c > 0:
                    if hi is not None:
                        new_hi = min(new_hi, (hi - min_act + c * lower[j]) // c)
                    if lo is not None:
                        new_lo = max(new_lo, _ceil_div(lo - max_act + c * upper[j], c))
                else:
                    if hi is not None:
                        new_lo = max(new_lo, _ceil_div(hi - min_act + c * upper[j], c))
                    if lo is not None:
                        new_hi = min(new_hi, (lo - max_act + c * lower[j]) // c)
                if new_lo > new_hi:
                    return False
                if new_lo != lower[j] or new_hi != upper[j]:
                    lower[j], upper[j] = new_lo, new_hi
                    for other in self.watch[j]:
                        if other not in pending:
                            pending.add(other)
                            queue.append(other)
        return True

    def search(self, lower: List[int], upper: List[int], start: int) -> Iterator[List[int]]:
        j = start
        while j < len(lower) and lower[j] == upper[j]:
            j += 1
        if j == len(lower):
            yield list(lower)
            return
        for value in range(lower[j], upper[j] + 1):
            branch_lo, branch_hi = list(lower), list(upper)
            branch_lo[j] = branch_hi[j] = value
            if self.propagate(branch_lo, branch_hi, list(self.watch[j])):
                yield from self.search(branch_lo, branch_hi, j + 1)


def enumerate_completions(
    model: MipModel,
    fixed: Optional[Mapping[str, float]] = None,
    limit: Optional[int] = None,
) -> Iterator[Dict[str, int]]:
    """Yield every feasible integer assignment agreeing with ``fixed``, in lexicographic order."""
    propagator = _Propagator(model)
    lower, upper = list(propagator.lower), list(propagator.upper)
    for name, value in (fixed or {}).items():
        if name not in model.variables:
            raise ModelBuildError(f"cannot fix undeclared variable {name}")
        j = propagator.names.index(name)
        if not float(value).is_integer() or not lower[j] <= value <= upper[j]:
            return
        lower[j] = upper[j] = int(value)
    if not propagator.propagate(lower, upper, list(range(len(propagator.rows)))):
        return
    found = 0
    for solution in propagator.search(lower, upper, 0):
        yield dict(zip(propagator.names, solution))
        found += 1
        if limit is not None and found >= limit:
            return
