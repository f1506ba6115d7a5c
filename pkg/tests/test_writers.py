"""
Tests for LP/MPS emission, the LP reader and the solution-pool format.
"""

import pytest

from archsearch_mip.exceptions import LpParseError, ModelBuildError, SolutionParseError
from archsearch_mip.gp.gaussian_process import condition
from archsearch_mip.graphs.space import Dag, LabelVocabulary, digraphs, enumerate_space
from archsearch_mip.kernels.graph_kernels import KernelParams
from archsearch_mip.mip import (
    MipModel,
    ModelMetadata,
    build_graph_space,
    check_assignment,
    complete_assignment,
    emit,
    format_assignment,
    read_assignment,
    read_lp,
    read_solution_pool,
)
from archsearch_mip.optimize import build_acquisition_model


@pytest.fixture(scope="module")
def acquisition_model():
    spec = digraphs(3, restrictions=(Dag(),))
    graphs = list(enumerate_space(spec))
    train = graphs[::6]
    gp = condition(train, [0.1 * g.num_edges for g in train], KernelParams(alpha=0.8), noise=1e-4, vocabulary=LabelVocabulary(), width=3)
    return build_acquisition_model(spec, gp, 2.0), graphs


class TestEmit:
    """Deterministic LP and MPS text."""

    def test_same_model_same_bytes(self):
        """Two builds of one space emit identical files."""
        first = build_graph_space(digraphs(3))
        second = build_graph_space(digraphs(3))
        assert emit(first) == emit(second)
        assert emit(first, "mps") == emit(second, "mps")

    def test_lp_sections(self, acquisition_model):
        """Header, metadata and every LP section in order."""
        model, _ = acquisition_model
        lines = emit(model).decode("ascii").splitlines()
        assert lines[0] == "\\ archsearch-mip model"
        assert lines[1].startswith("\\ metadata ")
        order = [lines.index(section) for section in ("Minimize", "Subject To", "Bounds", "Binaries", "Generals", "End")]
        assert order == sorted(order)
        assert any("^ 2" in line for line in lines)

    def test_mps_sections(self, acquisition_model):
        """Free-format MPS with a quadratic block for the variance row."""
        model, _ = acquisition_model
        text = emit(model, "mps").decode("ascii")
        sections = [line for line in text.splitlines() if line and not line.startswith(" ")]
        assert sections[:3] == ["NAME " + model.metadata.name.replace(" ", "_"), "OBJSENSE", "ROWS"]
        for section in ("COLUMNS", "RHS", "BOUNDS", "ENDATA"):
            assert section in sections
        assert any(line.startswith("QCMATRIX") for line in sections)
        assert "'INTORG'" in text

    def test_unknown_format(self):
        """Only lp and mps are written."""
        with pytest.raises(ModelBuildError):
            emit(build_graph_space(digraphs(2)), "gms")

    def test_empty_model(self):
        """A model without variables has nothing to write."""
        with pytest.raises(ModelBuildError):
            emit(MipModel(metadata=ModelMetadata()))


class TestReadLp:
    """Reading emitted LP files back."""

    def test_round_trip(self, acquisition_model):
        """Variables, rows, objective and census survive a write and read."""
        model, _ = acquisition_model
        parsed = read_lp(emit(model).decode("ascii"))
        assert list(parsed.variables) == list(model.variables)
        for name, variable in model.variables.items():
            other = parsed.variables[name]
            assert (other.kind, other.index, other.domain) == (variable.kind, variable.index, variable.domain)
            assert (other.lower, other.upper) == (variable.lower, variable.upper)
        assert parsed.census() == model.census()
        assert [c.name for c in parsed.constraints] == [c.name for c in model.constraints]
        assert parsed.quadratic_constraints[0].quadratic == model.quadratic_constraints[0].quadratic
        assert parsed.objective.terms == pytest.approx(model.objective.terms)
        assert parsed.metadata == model.metadata

    def test_parsed_model_accepts_completions(self, acquisition_model):
        """Completions of the original model are feasible for the parsed one."""
        model, graphs = acquisition_model
        parsed = read_lp(emit(model).decode("ascii"))
        for g in graphs[::5]:
            assert check_assignment(parsed, complete_assignment(model, g)) == []

    def test_missing_header(self):
        """Files from other writers are refused."""
        with pytest.raises(LpParseError) as excinfo:
            read_lp("Minimize\n obj: + 1 x\nEnd\n")
        assert excinfo.value.line_number == 1

    def test_missing_end(self):
        """A truncated file is an error."""
        text = emit(build_graph_space(digraphs(2))).decode("ascii")
        with pytest.raises(LpParseError):
            read_lp(text.replace("End\n", ""))

    def test_undeclared_variable(self):
        """Rows may only use bounded variables."""
        text = emit(build_graph_space(digraphs(2))).decode("ascii")
        with pytest.raises(LpParseError):
            read_lp(text.replace("Subject To\n", "Subject To\n extra_0: + 1 ghost_0 <= 1\n"))


class TestSolutionFormat:
    """name=value solution pools and assignments."""

    def test_pool_with_comments(self):
        """One solution per line, comments and blank lines skipped."""
        text = "# pool\nA_0_0=1 A_0_1=0\n\nA_0_0=1 A_0_1=1  # second\n"
        assert read_solution_pool(text) == [{"A_0_0": 1.0, "A_0_1": 0.0}, {"A_0_0": 1.0, "A_0_1": 1.0}]

    def test_malformed_pair(self):
        """A token without = is a parse error naming the line."""
        with pytest.raises(SolutionParseError, match="line 2"):
            read_solution_pool("A_0_0=1\nA_0_1\n")

    def test_non_numeric_value(self):
        """Values must be finite numbers."""
        with pytest.raises(SolutionParseError):
            read_solution_pool("A_0_0=yes\n")
        with pytest.raises(SolutionParseError):
            read_solution_pool("mu=nan\n")

    def test_assignment_over_several_lines(self):
        """read_assignment merges every line into one solution."""
        assert read_assignment("A_0_0=1\nmu=-0.25\n# done\n") == {"A_0_0": 1.0, "mu": -0.25}

    def test_format_assignment(self):
        """Integral values print without a decimal point."""
        values = {"A_0_0": 1.0, "mu": 0.125}
        assert format_assignment(values) == "A_0_0=1\nmu=0.125\n"
        assert format_assignment(values, one_per_line=False) == "A_0_0=1 mu=0.125\n"
        assert read_solution_pool(format_assignment(values, one_per_line=False)) == [values]
