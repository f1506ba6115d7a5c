from archsearch_mip.mip.acquisition import DEFAULT_BETA_SQRT, add_acquisition, add_no_good_cut, pattern_variables
from archsearch_mip.mip.assignment import complete_assignment, decode_graph, evaluate, graph_variables
from archsearch_mip.mip.checker import CompiledModel, Violation, check_assignment, compile_model, is_feasible
from archsearch_mip.mip.encoding import add_restriction, build_graph_space, build_space_model, expected_census
from archsearch_mip.mip.kernel_terms import DEFAULT_BREAKPOINTS, add_kernel_terms, kernel_data, pwl_breakpoints, pwl_error
from archsearch_mip.mip.model import LinearConstraint, LinExpr, MipModel, MipVariable, ModelMetadata, QuadraticConstraint, quicksum, var_name
from archsearch_mip.mip.search import enumerate_completions
from archsearch_mip.mip.verification import SizeReport, VerificationReport, verify_encoding
from archsearch_mip.mip.writers import emit, format_assignment, read_assignment, read_lp, read_solution_pool

__all__ = [
    "DEFAULT_BETA_SQRT",
    "DEFAULT_BREAKPOINTS",
    "CompiledModel",
    "LinExpr",
    "LinearConstraint",
    "MipModel",
    "MipVariable",
    "ModelMetadata",
    "QuadraticConstraint",
    "SizeReport",
    "VerificationReport",
    "Violation",
    "add_acquisition",
    "add_kernel_terms",
    "add_no_good_cut",
    "add_restriction",
    "build_graph_space",
    "build_space_model",
    "check_assignment",
    "compile_model",
    "complete_assignment",
    "decode_graph",
    "emit",
    "enumerate_completions",
    "evaluate",
    "expected_census",
    "format_assignment",
    "graph_variables",
    "is_feasible",
    "kernel_data",
    "pattern_variables",
    "pwl_breakpoints",
    "pwl_error",
    "quicksum",
    "read_assignment",
    "read_lp",
    "read_solution_pool",
    "var_name",
    "verify_encoding",
]
