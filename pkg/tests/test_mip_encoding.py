"""
Tests for the graph-space encoding, restrictions, kernel terms and the acquisition.
"""

import math

import numpy as np
import pytest

from archsearch_mip.exceptions import ConflictingRestrictionError, LabelVocabularyError, ModelBuildError
from archsearch_mip.gp.gaussian_process import condition
from archsearch_mip.graphs.graph import LabeledGraph
from archsearch_mip.graphs.space import (
    Dag,
    GraphSpaceSpec,
    LabelVocabulary,
    NodeLabeled,
    StronglyConnected,
    Undirected,
    digraphs,
    enumerate_space,
    nas_bench_101,
    nas_bench_201,
)
from archsearch_mip.kernels.graph_kernels import KernelParams, combined_kernel, linear_kernel
from archsearch_mip.mip import (
    LinExpr,
    MipModel,
    ModelMetadata,
    add_acquisition,
    add_kernel_terms,
    add_no_good_cut,
    add_restriction,
    build_graph_space,
    build_space_model,
    check_assignment,
    complete_assignment,
    decode_graph,
    enumerate_completions,
    expected_census,
    is_feasible,
    kernel_data,
    verify_encoding,
)


def _kernel_model(spec, train, params, breakpoints=32):
    model = build_space_model(spec)
    vocabulary = model.metadata.vocabulary
    add_kernel_terms(model, kernel_data(train, vocabulary), params, breakpoints=breakpoints)
    return model, vocabulary


class TestGraphSpaceModel:
    """Conditions C1 to C8 on unrestricted digraphs."""

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_census(self, n):
        """Constraint counts per family follow the closed forms."""
        model = build_graph_space(digraphs(n))
        census = model.census()
        assert census == expected_census(n)
        assert model.num_variables == 3 * n * n + n**3

    def test_every_graph_is_feasible(self):
        """Metrics of every graph with 1 to 3 nodes satisfy the model."""
        spec = digraphs(3, n0=1)
        model = build_graph_space(spec)
        for g in enumerate_space(spec):
            assert check_assignment(model, complete_assignment(model, g)) == []

    def test_small_sizes_are_a_bijection(self):
        """Exhaustive completion search certifies n <= 2 for every n0."""
        report = verify_encoding(n_max=2)
        assert report.ok
        assert [size.graphs for size in report.sizes] == [1, 4, 5]

    def test_free_search_counts_graphs(self):
        """The n = 2 model has exactly as many solutions as graphs."""
        model = build_graph_space(digraphs(2, n0=1))
        assert sum(1 for _ in enumerate_completions(model)) == 5

    def test_wrong_distance_is_caught(self):
        """A shortened distance violates a tagged condition."""
        g = LabeledGraph.from_adjacency([[1, 1, 0], [0, 1, 1], [0, 0, 1]])
        model = build_graph_space(digraphs(3))
        assignment = complete_assignment(model, g)
        assignment["d_0_2"] = 1.0
        violations = check_assignment(model, assignment)
        assert violations
        assert {v.constraint_tag for v in violations} <= {"C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8"}
        assert all(v.slack < 0 for v in violations)

    def test_missing_variables_are_reported(self):
        """Unset variables read as 0 and are listed."""
        model = build_graph_space(digraphs(2))
        violations = check_assignment(model, {"A_0_0": 1.0})
        assert any(v.constraint_tag == "missing" for v in violations)

    def test_fractional_values_are_reported(self):
        """Integer variables must take integer values."""
        g = LabeledGraph.from_adjacency(np.eye(2, dtype=int))
        model = build_graph_space(digraphs(2))
        assignment = complete_assignment(model, g)
        assignment["A_0_1"] = 0.5
        assert any(v.constraint_tag == "domain" for v in check_assignment(model, assignment))

    def test_decode_round_trip(self, random_digraph):
        """decode_graph reads back the graph behind a completed assignment."""
        model = build_graph_space(digraphs(4, n0=1))
        for k in range(1, 5):
            g = random_digraph(4, k=k)
            assert decode_graph(model, complete_assignment(model, g)) == g

    @pytest.mark.slow
    def test_size_three_bijection(self):
        """Exhaustive certificate for n = 3 and every n0."""
        assert verify_encoding(n_max=3).ok

    @pytest.mark.slow
    def test_size_four_forward_and_perturbation(self):
        """Every 4-node graph is feasible and every single-variable perturbation is caught."""
        report = verify_encoding(n_max=4)
        by_n0 = {size.n0: size for size in report.sizes if size.n == 4}
        assert by_n0[4].graphs == 2**12
        assert by_n0[1].graphs == 2**12 + 2**6 + 2**2 + 1
        assert report.ok

    def test_forward_sweep_covers_missing_nodes(self):
        """Below the exhaustive range the sweep also checks graphs whose trailing nodes are absent."""
        report = verify_encoding(n_max=3, exhaustive_max=2)
        sweeps = [size for size in report.sizes if size.mode == "forward+perturbation"]
        assert [(size.n, size.n0) for size in sweeps] == [(3, 3), (3, 1)]
        assert sweeps[0].graphs == 2**6
        assert sweeps[1].graphs == 2**6 + 2**2 + 1
        assert all(size.feasible == size.graphs for size in sweeps)
        assert sweeps[1].perturbations > sweeps[0].perturbations
        assert report.ok


class TestRestrictions:
    """Feasible assignments match space membership exactly."""

    @pytest.mark.parametrize("restriction", [Undirected(), StronglyConnected(), Dag()])
    def test_structural_restrictions(self, restriction):
        """On 3-node digraphs the restricted model accepts exactly the members."""
        spec = digraphs(3, restrictions=(restriction,))
        model = build_space_model(spec)
        for g in enumerate_space(digraphs(3)):
            assert is_feasible(model, complete_assignment(model, g)) == spec.contains(g), g.edges

    def test_node_labeled_members(self):
        """Every cell of the 4-node labeled space is feasible."""
        spec = nas_bench_101(4)
        model = build_space_model(spec)
        for g in enumerate_space(spec):
            assert is_feasible(model, complete_assignment(model, g))

    def test_node_labeled_soundness(self, random_cell):
        """Random labeled cells are feasible iff they belong."""
        spec = nas_bench_101(4)
        model = build_space_model(spec)
        for _ in range(60):
            g = random_cell(4, node_labels=5)
            assert is_feasible(model, complete_assignment(model, g)) == spec.contains(g)

    def test_node_labeled_edge_budget(self):
        """The edge budget removes dense cells."""
        spec = GraphSpaceSpec(n0=5, n=5, restrictions=(Dag(), NodeLabeled(num_labels=5, max_edges=5)))
        model = build_space_model(spec)
        dense = LabeledGraph.from_adjacency(np.triu(np.ones((5, 5), dtype=int)), node_labels=[0, 1, 2, 3, 4])
        violations = check_assignment(model, complete_assignment(model, dense))
        assert {v.constraint_tag for v in violations} == {"eq2e"}

    @pytest.mark.parametrize("zero_op", [True, False])
    def test_edge_labeled_soundness(self, random_cell, zero_op):
        """Random edge-labeled cells are feasible iff they belong."""
        spec = nas_bench_201(zero_op=zero_op)
        model = build_space_model(spec)
        for _ in range(60):
            g = random_cell(4, edge_labels=5 if zero_op else 4)
            assert is_feasible(model, complete_assignment(model, g)) == spec.contains(g)

    def test_conflicting_restrictions(self):
        """Undirected DAGs and repeated restrictions are refused."""
        model = build_space_model(digraphs(3, restrictions=(Dag(),)))
        with pytest.raises(ConflictingRestrictionError):
            add_restriction(model, Undirected())
        with pytest.raises(ConflictingRestrictionError):
            add_restriction(model, Dag())

    def test_labels_need_fixed_size(self):
        """Labeled restrictions need every node present."""
        model = build_graph_space(digraphs(4, n0=2))
        with pytest.raises(ModelBuildError):
            add_restriction(model, nas_bench_201().edge_labeled)  # type: ignore[arg-type]


class TestKernelTerms:
    """Kernel expressions evaluated at completed assignments."""

    @pytest.mark.parametrize(
        "spec, sample",
        [(digraphs(3, restrictions=(Dag(),)), 1), (nas_bench_101(4), 1), (nas_bench_201(), 700)],
    )
    def test_linear_kernel_values(self, spec, sample):
        """kxX_i and kxx equal the scalar linear kernel."""
        graphs = list(enumerate_space(spec))
        train = graphs[1::7][:4]
        params = KernelParams(alpha=0.8, beta=1.7, gamma=0.6)
        model, vocabulary = _kernel_model(spec, train, params)
        for g in graphs[::sample]:
            assignment = complete_assignment(model, g)
            assert is_feasible(model, assignment)
            for i, h in enumerate(train):
                assert assignment[f"kxX_{i}"] == pytest.approx(linear_kernel(g, h, params, vocabulary), abs=1e-9)
            assert assignment["kxx"] == pytest.approx(linear_kernel(g, g, params, vocabulary), abs=1e-9)

    def test_exponential_kernel_within_pwl_error(self):
        """The piecewise-linear exp stays within its reported error."""
        spec = nas_bench_101(4)
        graphs = list(enumerate_space(spec))
        train = graphs[::30]
        params = KernelParams(alpha=2.0, beta=3.0, variance=0.5, form="exponential")
        model, vocabulary = _kernel_model(spec, train, params, breakpoints=16)
        assert model.kernel is not None
        bound = model.kernel.pwl_error + 1e-9
        for g in graphs[::9]:
            assignment = complete_assignment(model, g)
            assert is_feasible(model, assignment)
            for i, h in enumerate(train):
                exact = combined_kernel(g, h, params, vocabulary)
                assert assignment[f"kxX_{i}"] >= exact - 1e-9
                assert assignment[f"kxX_{i}"] - exact <= bound

    def test_more_breakpoints_shrink_the_error(self):
        """Refining the grid tightens the chord error."""
        spec = digraphs(3, restrictions=(Dag(),))
        train = list(enumerate_space(spec))[:2]
        params = KernelParams(alpha=5.0, form="exponential")
        coarse, _ = _kernel_model(spec, train, params, breakpoints=8)
        fine, _ = _kernel_model(spec, train, params, breakpoints=64)
        assert coarse.kernel is not None and fine.kernel is not None
        assert fine.kernel.pwl_error < coarse.kernel.pwl_error

    def test_vocabulary_mismatch(self):
        """A vocabulary other than the model's is refused."""
        spec = nas_bench_201()
        model = build_space_model(spec)
        train = list(enumerate_space(spec))[:2]
        with pytest.raises(LabelVocabularyError):
            add_kernel_terms(model, kernel_data(train, spec.vocabulary()), KernelParams(), vocabulary=LabelVocabulary(edge_labels=3))

    def test_variable_size_space_refused(self):
        """Kernel terms need n0 = n."""
        model = build_graph_space(digraphs(3, n0=2))
        g = LabeledGraph.from_adjacency(np.eye(3, dtype=int))
        with pytest.raises(ModelBuildError):
            add_kernel_terms(model, kernel_data([g], LabelVocabulary()), KernelParams())


class TestAcquisition:
    """LCB objective and no-good cuts."""

    def test_objective_equals_lcb_on_two_nodes(self):
        """On the full 2-node space the objective equals mu - 3 sigma of the GP."""
        spec = digraphs(2)
        graphs = list(enumerate_space(spec))
        gp = condition(graphs[:2], [0.3, 0.8], KernelParams(alpha=1.2))
        model = build_space_model(spec)
        add_kernel_terms(model, kernel_data(list(gp.graphs), model.metadata.vocabulary), gp.params)
        add_acquisition(model, gp, beta_sqrt=3.0)
        for g in graphs:
            assignment = complete_assignment(model, g)
            assert check_assignment(model, assignment) == []
            mean, variance = gp.posterior(g)
            assert model.objective.evaluate(assignment) == pytest.approx(mean - 3.0 * math.sqrt(variance), abs=1e-6)

    def test_single_training_point(self):
        """At the only training graph mu is its target and sigma nearly vanishes."""
        spec = digraphs(3, restrictions=(Dag(),))
        g = list(enumerate_space(spec))[5]
        gp = condition([g], [0.42], KernelParams(), noise=1e-8)
        model = build_space_model(spec)
        add_kernel_terms(model, kernel_data([g], model.metadata.vocabulary), gp.params)
        add_acquisition(model, gp)
        assignment = complete_assignment(model, g)
        assert assignment["mu"] == pytest.approx(0.42, abs=1e-6)
        assert assignment["sigma"] <= 1e-3
        assert is_feasible(model, assignment)

    def test_acquisition_needs_kernel_terms(self):
        """The posterior is expressed through kxX and kxx."""
        spec = digraphs(2)
        gp = condition(list(enumerate_space(spec))[:2], [0.1, 0.2], KernelParams())
        with pytest.raises(ModelBuildError):
            add_acquisition(build_space_model(spec), gp)

    def test_parameters_must_match(self):
        """Kernel terms and GP share their parameters."""
        spec = digraphs(2)
        gp = condition(list(enumerate_space(spec))[:2], [0.1, 0.2], KernelParams(alpha=2.0))
        model = build_space_model(spec)
        add_kernel_terms(model, kernel_data(list(gp.graphs), model.metadata.vocabulary), KernelParams())
        with pytest.raises(ModelBuildError):
            add_acquisition(model, gp)

    def test_no_good_cut(self):
        """A cut removes exactly one graph."""
        spec = digraphs(3, restrictions=(Dag(),))
        graphs = list(enumerate_space(spec))
        model = build_space_model(spec)
        add_no_good_cut(model, graphs[4])
        for i, g in enumerate(graphs):
            violations = check_assignment(model, complete_assignment(model, g))
            if i == 4:
                assert [v.constraint_tag for v in violations] == ["nogood"]
            else:
                assert violations == []

    def test_no_good_cut_on_labels(self):
        """Edge-labeled cuts separate cells that differ only in a label."""
        spec = nas_bench_201()
        model = build_space_model(spec)
        adjacency = np.eye(4, dtype=int)
        adjacency[0, 3] = 1
        first = LabeledGraph.from_adjacency(adjacency, edge_labels={(0, 3): 1})
        second = LabeledGraph.from_adjacency(adjacency, edge_labels={(0, 3): 2})
        add_no_good_cut(model, first)
        assert not is_feasible(model, complete_assignment(model, first))
        assert is_feasible(model, complete_assignment(model, second))


class TestCheckerTolerances:
    """Continuous rows use an absolute 1e-6 tolerance, whatever the size of their terms."""

    @staticmethod
    def _balance_model() -> MipModel:
        model = MipModel(metadata=ModelMetadata())
        x = model.add_variable("x", domain="continuous", lower=0.0, upper=1e4)
        y = model.add_variable("y", domain="continuous", lower=0.0, upper=1e4)
        model.add_constraint(LinExpr({x.name: 1.0, y.name: -1.0}), "<=", 0.0, tag="balance", name="balance_0")
        return model

    def test_small_violation_at_large_magnitude(self):
        """A 2e-6 excess on terms of size 1e3 is still reported."""
        violations = check_assignment(self._balance_model(), {"x": 1000.000002, "y": 1000.0})
        assert [v.constraint for v in violations] == ["balance_0"]
        assert violations[0].slack < -1e-6

    def test_within_tolerance(self):
        """Excess below 1e-6 is feasible."""
        assert check_assignment(self._balance_model(), {"x": 1000.0000005, "y": 1000.0}) == []
