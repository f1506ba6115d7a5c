import logging
import math
from typing import List, Tuple

import numpy as np

from archsearch_mip.exceptions import GpNotFittedError, ModelBuildError
from archsearch_mip.gp.gaussian_process import GpState
from archsearch_mip.graphs.graph import LabeledGraph
from archsearch_mip.mip.assignment import graph_variables
from archsearch_mip.mip.model import AcquisitionEncoding, LinExpr, MipModel, quicksum, var_name

log = logging.getLogger(__name__)

DEFAULT_BETA_SQRT = 3.0


def add_acquisition(model: MipModel, gp: GpState, beta_sqrt: float = DEFAULT_BETA_SQRT) -> MipModel:
    """Posterior mean and standard deviation of the decision graph, and the LCB objective.

    ``mu = y_mean + y_std * sum_i w_i kxX_i`` and
    ``sigma**2 <= y_std**2 * (kxx - sum_ij Q_ij kxX_i kxX_j)`` with ``w`` and ``Q`` taken from
    the conditioned GP in standardised units.
    """
    if gp is None:
        raise GpNotFittedError("the acquisition needs a conditioned GP")
    kernel = model.kernel
    if kernel is None:
        raise ModelBuildError("add kernel terms before the acquisition")
    if model.acquisition is not None:
        raise ModelBuildError("the acquisition is already present")
    if kernel.num_data != gp.num_points:
        raise ModelBuildError(f"kernel terms cover {kernel.num_data} training graphs, the GP {gp.num_points}")
    if kernel.params != gp.params:
        raise ModelBuildError("kernel terms were built with parameters other than the GP's")
    if beta_sqrt < 0:
        raise ModelBuildError("beta_sqrt must be nonnegative")

    k_names = [var_name("kxX", i) for i in range(gp.num_points)]
    precision = gp.precision()
    weights = np.asarray(gp.alpha_vec, dtype=np.float64)
    scale = gp.y_std**2

    mu = model.add_variable("mu", domain="continuous", lower=-math.inf, upper=math.inf)
    kxx_upper = model.var("kxx").upper
    sigma = model.add_variable("sigma", domain="continuous", lower=0.0, upper=gp.y_std * math.sqrt(kxx_upper))

    mean = quicksum(gp.y_std * float(w) * model.var("kxX", i) for i, w in enumerate(weights))
    model.add_constraint(mu, "=", mean + gp.y_mean, "posterior", "posterior_mean")

    quadratic: List[Tuple[str, str, float]] = [(sigma.name, sigma.name, 1.0)]
    for i in range(gp.num_points):
        quadratic.append((k_names[i], k_names[i], scale * float(precision[i, i])))
        for j in range(i + 1, gp.num_points):
            quadratic.append((k_names[i], k_names[j], 2.0 * scale * float(precision[i, j])))
    linear = LinExpr({"kxx": -scale})
    model.add_quadratic_constraint(linear, quadratic, "<=", 0.0, "posterior", "posterior_variance")

    model.set_objective(mu - beta_sqrt * sigma)
    model.acquisition = AcquisitionEncoding(
        beta_sqrt=beta_sqrt, y_mean=gp.y_mean, y_std=gp.y_std, weights=weights, precision=precision
    )
    model.metadata.beta_sqrt = beta_sqrt
    log.info("Added LCB acquisition with beta_sqrt=%g over %d training graphs", beta_sqrt, gp.num_points)
    return model


def pattern_variables(model: MipModel, g: LabeledGraph) -> List[Tuple[str, int]]:
    """The binary ``A`` and ``F`` values identifying ``g`` in ``model``."""
    values = graph_variables(g)
    pattern = [(name, int(values[name])) for name in model.variables if model.variables[name].kind == "A"]
    vocabulary = model.metadata.vocabulary
    if vocabulary.node_labels is not None:
        labels = g.node_labels or ()
        pattern += [(var_name("F", v, label), int(labels[v] == label)) for v in range(model.n) for label in range(vocabulary.node_labels)]
    if vocabulary.edge_labels is not None:
        edge_labels = g.edge_label_map()
        for name, variable in model.variables.items():
            if variable.kind == "F":
                u, v, label = variable.index
                pattern.append((name, int(edge_labels.get((u, v)) == label)))
    return pattern


def add_no_good_cut(model: MipModel, g: LabeledGraph) -> MipModel:
    """Exclude exactly the (A, F) bit pattern of ``g``."""
    if g.n != model.n:
        raise ModelBuildError(f"graph has {g.n} slots, model has {model.n}")
    pattern = pattern_variables(model, g)
    ones = sum(bit for _, bit in pattern)
    cut = LinExpr()
    for name, bit in pattern:
        cut.add_term(name, -1.0 if bit else 1.0)
    index = sum(1 for c in model.constraints if c.tag == "nogood")
    model.add_constraint(cut, ">=", 1 - ones, "nogood", f"nogood_{index}")
    return model
