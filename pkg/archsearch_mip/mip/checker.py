"""Feasibility oracle for assignments of a :class:`MipModel`.

Linear rows are compiled once into a sparse matrix with row bounds, which also serves the
batched sweeps in :mod:`archsearch_mip.mip.verification`.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Literal, Mapping, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy import sparse

from archsearch_mip.mip.model import MipModel

INTEGER_TOLERANCE = 1e-9
CONTINUOUS_TOLERANCE = 1e-6


class Violation(BaseModel):
    constraint_tag: str = Field(description="Condition family of the violated constraint, or 'domain' / 'missing'")
    constraint: str = Field(description="Constraint or variable name")
    lhs: float
    sense: Literal["<=", ">=", "="]
    rhs: float
    slack: float = Field(description="Signed margin; negative when violated")


@dataclass(frozen=True)
class CompiledModel:
    """Linear rows as ``lower <= matrix @ x <= upper`` over the declared variables."""

    names: Tuple[str, ...]
    column: Dict[str, int]
    matrix: sparse.csr_matrix
    lower: np.ndarray
    upper: np.ndarray
    tolerance: np.ndarray
    row_names: Tuple[str, ...]
    row_tags: Tuple[str, ...]
    senses: Tuple[str, ...]
    rhs: np.ndarray
    var_lower: np.ndarray
    var_upper: np.ndarray
    integer: np.ndarray

    @property
    def num_rows(self) -> int:
        return int(self.matrix.shape[0])

    def vector(self, assignment: Mapping[str, float]) -> Tuple[np.ndarray, List[str]]:
        """Dense value vector in declaration order; missing variables read as 0."""
        x = np.zeros(len(self.names))
        missing = []
        for j, name in enumerate(self.names):
            value = assignment.get(name)
            if value is None:
                missing.append(name)
            else:
                x[j] = value
        return x, missing

    def activity(self, x: np.ndarray) -> np.ndarray:
        """Row activities; ``x`` is one vector or a (batch, variables) stack."""
        if x.ndim == 1:
            return self.matrix @ x
        return (self.matrix @ x.T).T

    def row_violated(self, activity: np.ndarray, rows: "np.ndarray | slice" = slice(None)) -> np.ndarray:
        """Rows outside their bounds by more than the row tolerance."""
        tolerance = self.tolerance[rows]
        return (activity < self.lower[rows] - tolerance) | (activity > self.upper[rows] + tolerance)


def compile_model(model: MipModel) -> CompiledModel:
    cached = model._compiled
    if cached is not None and cached[0] == model.version:
        return cached[1]
    names = tuple(model.variables)
    column = {name: j for j, name in enumerate(names)}
    rows: List[int] = []
    cols: List[int] = []
    data: List[float] = []
    count = len(model.constraints)
    lower = np.full(count, -np.inf)
    upper = np.full(count, np.inf)
    tolerance = np.full(count, CONTINUOUS_TOLERANCE)
    rhs = np.zeros(count)
    integer = np.array([model.variables[name].is_integer for name in names], dtype=bool)
    for i, constraint in enumerate(model.constraints):
        integral = float(constraint.rhs).is_integer()
        for name, coef in constraint.terms:
            j = column[name]
            rows.append(i)
            cols.append(j)
            data.append(coef)
            integral = integral and integer[j] and float(coef).is_integer()
        rhs[i] = constraint.rhs
        if constraint.sense in ("<=", "="):
            upper[i] = constraint.rhs
        if constraint.sense in (">=", "="):
            lower[i] = constraint.rhs
        if integral:
            tolerance[i] = INTEGER_TOLERANCE
    matrix = sparse.csr_matrix((data, (rows, cols)), shape=(count, len(names)))
    compiled = CompiledModel(
        names=names,
        column=column,
        matrix=matrix,
        lower=lower,
        upper=upper,
        tolerance=tolerance,
        row_names=tuple(c.name for c in model.constraints),
        row_tags=tuple(c.tag for c in model.constraints),
        senses=tuple(c.sense for c in model.constraints),
        rhs=rhs,
        var_lower=np.array([model.variables[name].lower for name in names]),
        var_upper=np.array([model.variables[name].upper for name in names]),
        integer=integer,
    )
    model._compiled = (model.version, compiled)
    return compiled


def _slack(lhs: float, sense: str, rhs: float) -> float:
    if sense == "<=":
        return rhs - lhs
    if sense == ">=":
        return lhs - rhs
    return -abs(lhs - rhs)


def _domain_violations(compiled: CompiledModel, x: np.ndarray) -> List[Violation]:
    found = []
    tolerance = np.where(compiled.integer, INTEGER_TOLERANCE, CONTINUOUS_TOLERANCE)
    for j in np.flatnonzero((x < compiled.var_lower - tolerance) | (x > compiled.var_upper + tolerance)):
        below = x[j] < compiled.var_lower[j]
        bound = compiled.var_lower[j] if below else compiled.var_upper[j]
        sense = ">=" if below else "<="
        found.append(Violation(constraint_tag="domain", constraint=compiled.names[j], lhs=x[j], sense=sense, rhs=bound, slack=_slack(x[j], sense, bound)))
    fractional = compiled.integer & (np.abs(x - np.round(x)) > INTEGER_TOLERANCE)
    for j in np.flatnonzero(fractional):
        nearest = float(np.round(x[j]))
        found.append(Violation(constraint_tag="domain", constraint=compiled.names[j], lhs=x[j], sense="=", rhs=nearest, slack=_slack(x[j], "=", nearest)))
    return found


def check_assignment(model: MipModel, assignment: Mapping[str, float]) -> List[Violation]:
    """Every violated constraint, domain bound and missing variable; empty iff feasible."""
    compiled = compile_model(model)
    x, missing = compiled.vector(assignment)
    found = [Violation(constraint_tag="missing", constraint=name, lhs=0.0, sense="=", rhs=0.0, slack=0.0) for name in missing]
    found += _domain_violations(compiled, x)
    activity = compiled.activity(x)
    for i in np.flatnonzero(compiled.row_violated(activity)):
        found.append(
            Violation(
                constraint_tag=compiled.row_tags[i],
                constraint=compiled.row_names[i],
                lhs=float(activity[i]),
                sense=compiled.senses[i],  # type: ignore[arg-type]
                rhs=float(compiled.rhs[i]),
                slack=_slack(float(activity[i]), compiled.senses[i], float(compiled.rhs[i])),
            )
        )
    values = {name: float(x[compiled.column[name]]) for name in compiled.names}
    for constraint in model.quadratic_constraints:
        lhs = constraint.activity(values)
        slack = _slack(lhs, constraint.sense, constraint.rhs)
        # relative to the size of the terms, which cancel against each other
        size = sum(abs(coef * values.get(name, 0.0)) for name, coef in constraint.linear)
        size += sum(abs(coef * values.get(a, 0.0) * values.get(b, 0.0)) for a, b, coef in constraint.quadratic)
        if slack < -CONTINUOUS_TOLERANCE * max(1.0, size) or math.isnan(slack):
            found.append(Violation(constraint_tag=constraint.tag, constraint=constraint.name, lhs=lhs, sense=constraint.sense, rhs=constraint.rhs, slack=slack))
    return found


def is_feasible(model: MipModel, assignment: Mapping[str, float]) -> bool:
    return not check_assignment(model, assignment)
