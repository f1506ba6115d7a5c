"""A small solver-independent mixed-integer model.

Variables carry structured names (kind plus integer indices joined by underscores,
e.g. ``delta_0_1_2``); every constraint carries a provenance tag naming the condition
family it belongs to.
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Literal, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from archsearch_mip.exceptions import ModelBuildError
from archsearch_mip.graphs.space import GraphSpaceSpec, LabelVocabulary
from archsearch_mip.kernels.graph_kernels import KernelParams, PathCounts

Domain = Literal["binary", "integer", "continuous"]
Sense = Literal["<=", ">=", "="]
SENSES: Tuple[str, ...] = ("<=", ">=", "=")


def var_name(kind: str, *index: int) -> str:
    return "_".join([kind, *(str(i) for i in index)])


@dataclass(frozen=True)
class MipVariable:
    name: str
    kind: str
    index: Tuple[int, ...]
    domain: Domain
    lower: float
    upper: float

    @property
    def is_integer(self) -> bool:
        return self.domain != "continuous"

    def __add__(self, other: "ExprLike") -> "LinExpr":
        return LinExpr.of(self) + other

    def __radd__(self, other: "ExprLike") -> "LinExpr":
        return LinExpr.of(self) + other

    def __sub__(self, other: "ExprLike") -> "LinExpr":
        return LinExpr.of(self) - other

    def __rsub__(self, other: "ExprLike") -> "LinExpr":
        return LinExpr.of(other) - self

    def __mul__(self, scalar: float) -> "LinExpr":
        return LinExpr.of(self) * scalar

    def __rmul__(self, scalar: float) -> "LinExpr":
        return LinExpr.of(self) * scalar

    def __neg__(self) -> "LinExpr":
        return LinExpr.of(self) * -1.0


class LinExpr:
    """Affine expression ``sum(coef * var) + constant`` keyed by variable name."""

    __slots__ = ("terms", "constant")

    def __init__(self, terms: Optional[Mapping[str, float]] = None, constant: float = 0.0):
        self.terms: Dict[str, float] = dict(terms) if terms else {}
        self.constant = float(constant)

    @classmethod
    def of(cls, value: "ExprLike") -> "LinExpr":
        if isinstance(value, LinExpr):
            return value.copy()
        if isinstance(value, MipVariable):
            return cls({value.name: 1.0})
        return cls(constant=float(value))

    def copy(self) -> "LinExpr":
        return LinExpr(self.terms, self.constant)

    def add_term(self, name: str, coef: float) -> "LinExpr":
        self.terms[name] = self.terms.get(name, 0.0) + coef
        return self

    def add_scaled(self, other: "ExprLike", scale: float = 1.0) -> "LinExpr":
        """In-place ``self += scale * other``."""
        if isinstance(other, MipVariable):
            self.terms[other.name] = self.terms.get(other.name, 0.0) + scale
        elif isinstance(other, LinExpr):
            for name, coef in other.terms.items():
                self.terms[name] = self.terms.get(name, 0.0) + scale * coef
            self.constant += scale * other.constant
        else:
            self.constant += scale * float(other)
        return self

    def __add__(self, other: "ExprLike") -> "LinExpr":
        return self.copy().add_scaled(other)

    def __radd__(self, other: "ExprLike") -> "LinExpr":
        return self.copy().add_scaled(other)

    def __sub__(self, other: "ExprLike") -> "LinExpr":
        return self.copy().add_scaled(other, -1.0)

    def __rsub__(self, other: "ExprLike") -> "LinExpr":
        return LinExpr.of(other).add_scaled(self, -1.0)

    def __mul__(self, scalar: float) -> "LinExpr":
        return LinExpr({name: coef * scalar for name, coef in self.terms.items()}, self.constant * scalar)

    def __rmul__(self, scalar: float) -> "LinExpr":
        return self * scalar

    def __neg__(self) -> "LinExpr":
        return self * -1.0

    def evaluate(self, assignment: Mapping[str, float]) -> float:
        return self.constant + sum(coef * assignment.get(name, 0.0) for name, coef in self.terms.items())

    def __repr__(self) -> str:
        body = " ".join(f"{coef:+g} {name}" for name, coef in self.terms.items())
        return f"LinExpr({body} {self.constant:+g})"


ExprLike = Union[LinExpr, MipVariable, float, int]


def quicksum(items: Iterable[ExprLike]) -> LinExpr:
    total = LinExpr()
    for item in items:
        total.add_scaled(item)
    return total


@dataclass(frozen=True)
class LinearConstraint:
    name: str
    terms: Tuple[Tuple[str, float], ...]
    sense: Sense
    rhs: float
    tag: str

    def activity(self, assignment: Mapping[str, float]) -> float:
        return sum(coef * assignment.get(name, 0.0) for name, coef in self.terms)


@dataclass(frozen=True)
class QuadraticConstraint:
    name: str
    linear: Tuple[Tuple[str, float], ...]
    quadratic: Tuple[Tuple[str, str, float], ...]
    sense: Sense
    rhs: float
    tag: str

    def activity(self, assignment: Mapping[str, float]) -> float:
        value = sum(coef * assignment.get(name, 0.0) for name, coef in self.linear)
        value += sum(coef * assignment.get(a, 0.0) * assignment.get(b, 0.0) for a, b, coef in self.quadratic)
        return value


class ModelMetadata(BaseModel):
    name: str = "archsearch"
    n0: int = 1
    n: int = 1
    spec: Optional[GraphSpaceSpec] = None
    restrictions: List[str] = Field(default_factory=list)
    vocabulary: LabelVocabulary = Field(default_factory=LabelVocabulary)
    kernel_form: Optional[str] = None
    num_data: int = 0
    beta_sqrt: Optional[float] = None


@dataclass
class KernelEncoding:
    params: KernelParams
    vocabulary: LabelVocabulary
    buckets: Tuple[int, ...]
    data: Tuple[PathCounts, ...]
    breakpoints: Optional[np.ndarray] = None
    pwl_error: float = 0.0
    pwl_relative_error: float = 0.0

    @property
    def num_data(self) -> int:
        return len(self.data)


@dataclass
class AcquisitionEncoding:
    beta_sqrt: float
    y_mean: float
    y_std: float
    weights: np.ndarray
    precision: np.ndarray


@dataclass
class MipModel:
    metadata: ModelMetadata
    variables: Dict[str, MipVariable] = field(default_factory=dict)
    constraints: List[LinearConstraint] = field(default_factory=list)
    quadratic_constraints: List[QuadraticConstraint] = field(default_factory=list)
    objective: LinExpr = field(default_factory=LinExpr)
    objective_sense: Literal["minimize", "maximize"] = "minimize"
    expressions: Dict[str, LinExpr] = field(default_factory=dict)
    kernel: Optional[KernelEncoding] = None
    acquisition: Optional[AcquisitionEncoding] = None
    version: int = 0
    _names: set = field(default_factory=set, repr=False)
    _compiled: Any = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.metadata.n

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints) + len(self.quadratic_constraints)

    def add_variable(self, kind: str, *index: int, domain: Domain = "binary", lower: float = 0.0, upper: float = 1.0) -> MipVariable:
        name = var_name(kind, *index)
        if name in self.variables:
            raise ModelBuildError(f"variable {name} declared twice")
        if domain == "binary":
            lower, upper = 0.0, 1.0
        variable = MipVariable(name=name, kind=kind, index=tuple(index), domain=domain, lower=float(lower), upper=float(upper))
        self.variables[name] = variable
        self.version += 1
        return variable

    def var(self, kind: str, *index: int) -> MipVariable:
        name = var_name(kind, *index)
        try:
            return self.variables[name]
        except KeyError:
            raise ModelBuildError(f"variable {name} is not declared") from None

    def has_var(self, kind: str, *index: int) -> bool:
        return var_name(kind, *index) in self.variables

    def _claim_name(self, name: str) -> None:
        if name in self._names:
            raise ModelBuildError(f"constraint {name} declared twice")
        self._names.add(name)

    def _check_terms(self, names: Iterable[str], constraint: str) -> None:
        for name in names:
            if name not in self.variables:
                raise ModelBuildError(f"constraint {constraint} references undeclared variable {name}")

    def add_constraint(self, lhs: ExprLike, sense: Sense, rhs: ExprLike, tag: str, name: str) -> LinearConstraint:
        if sense not in SENSES:
            raise ModelBuildError(f"unknown sense {sense!r}")
        expr = LinExpr.of(lhs).add_scaled(rhs, -1.0)
        terms = tuple((var, coef) for var, coef in expr.terms.items() if coef != 0.0)
        if not all(math.isfinite(coef) for _, coef in terms) or not math.isfinite(expr.constant):
            raise ModelBuildError(f"constraint {name} has a non-finite coefficient")
        self._check_terms((var for var, _ in terms), name)
        self._claim_name(name)
        constraint = LinearConstraint(name=name, terms=terms, sense=sense, rhs=-expr.constant, tag=tag)
        self.constraints.append(constraint)
        self.version += 1
        return constraint

    def add_quadratic_constraint(
        self,
        linear: ExprLike,
        quadratic: Sequence[Tuple[str, str, float]],
        sense: Sense,
        rhs: float,
        tag: str,
        name: str,
    ) -> QuadraticConstraint:
        expr = LinExpr.of(linear)
        quad = tuple((a, b, float(coef)) for a, b, coef in quadratic if coef != 0.0)
        if not all(math.isfinite(coef) for _, _, coef in quad):
            raise ModelBuildError(f"constraint {name} has a non-finite coefficient")
        self._check_terms(list(expr.terms) + [a for a, _, _ in quad] + [b for _, b, _ in quad], name)
        self._claim_name(name)
        constraint = QuadraticConstraint(
            name=name,
            linear=tuple((var, coef) for var, coef in expr.terms.items() if coef != 0.0),
            quadratic=quad,
            sense=sense,
            rhs=float(rhs) - expr.constant,
            tag=tag,
        )
        self.quadratic_constraints.append(constraint)
        self.version += 1
        return constraint

    def set_objective(self, expr: ExprLike, sense: Literal["minimize", "maximize"] = "minimize") -> None:
        objective = LinExpr.of(expr)
        self._check_terms(objective.terms, "objective")
        self.objective = objective
        self.objective_sense = sense
        self.version += 1

    def constraints_by_tag(self, tag: str) -> List[LinearConstraint]:
        return [c for c in self.constraints if c.tag == tag]

    def census(self) -> Dict[str, int]:
        """Number of constraints per provenance tag."""
        counts = Counter(c.tag for c in self.constraints)
        counts.update(c.tag for c in self.quadratic_constraints)
        return dict(counts)
