"""
Tests for the CLI interface.
"""

import json

import pytest
from typer.testing import CliRunner

from archsearch_mip.cli import app
from archsearch_mip.graphs.graph import LabeledGraph
from archsearch_mip.graphs.space import digraphs
from archsearch_mip.mip import build_space_model, complete_assignment, format_assignment


@pytest.fixture
def runner(tmp_path, monkeypatch):
    """CLI runner in an empty directory, so no archsearch.toml is picked up."""
    monkeypatch.chdir(tmp_path)
    return CliRunner()


class TestCLI:
    """Command parsing and help."""

    def test_cli_help(self, runner):
        """Every command is listed."""
        result = runner.invoke(app, ["--help"])
        assert result.exit_code == 0
        for command in ("verify-encoding", "kernel-compare", "run-bo", "random-search", "emit-mip", "check-solution", "synth-bench"):
            assert command in result.output

    def test_run_bo_needs_a_benchmark(self, runner):
        """--bench is required."""
        result = runner.invoke(app, ["run-bo"])
        assert result.exit_code != 0

    def test_option_ranges(self, runner):
        """Out-of-range options are refused by the parser."""
        assert runner.invoke(app, ["verify-encoding", "--n-max", "6"]).exit_code != 0
        assert runner.invoke(app, ["run-bo", "--bench", "synth:digraph-2", "--batch", "0"]).exit_code != 0

    def test_missing_config_file(self, runner):
        """An explicit config path must exist."""
        result = runner.invoke(app, ["--config", "nope.toml", "validate"])
        assert result.exit_code == 1
        assert "does not exist" in result.output

    def test_config_file_is_applied(self, runner, tmp_path):
        """[run] settings from the config file shape the run."""
        (tmp_path / "archsearch.toml").write_text("[run]\niters = 1\ninit = 3\nbatch = 2\n")
        log_path = tmp_path / "run.jsonl"
        result = runner.invoke(app, ["run-bo", "--bench", "synth:dag-3", "--log", str(log_path)])
        assert result.exit_code == 0, result.output
        records = [json.loads(line) for line in log_path.read_text().splitlines()]
        assert [r["num_observations"] for r in records] == [3, 5]


class TestCommands:
    """End-to-end command runs on small spaces."""

    def test_verify_encoding(self, runner):
        """Sizes 1 and 2 certify."""
        result = runner.invoke(app, ["verify-encoding", "--n-max", "2"])
        assert result.exit_code == 0, result.output
        assert "Every size verified" in result.output

    def test_synth_bench(self, runner, tmp_path):
        """A synthetic benchmark file is written with a header and one line per graph."""
        out = tmp_path / "bench.jsonl"
        result = runner.invoke(app, ["synth-bench", "--space", "dag-3", "--out", str(out), "--noise-sd", "0.02", "--seeds", "3"])
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert len(lines) == 26
        assert json.loads(lines[0])["name"] == "synth-dag-3"

    def test_unknown_space(self, runner, tmp_path):
        """Unknown presets exit with an error."""
        result = runner.invoke(app, ["synth-bench", "--space", "hexagon", "--out", str(tmp_path / "b.jsonl")])
        assert result.exit_code == 1
        assert "Unknown space" in result.output

    def test_run_bo_with_outputs(self, runner, tmp_path):
        """A run writes its log, regret curve and fitted GP."""
        log_path, curve, gp_path = tmp_path / "run.jsonl", tmp_path / "curve.csv", tmp_path / "gp.json"
        result = runner.invoke(
            app,
            [
                "run-bo", "--bench", "synth:digraph-3", "--seed", "2", "--iters", "2", "--init", "4", "--batch", "2",
                "--log", str(log_path), "--curve", str(curve), "--save-gp", str(gp_path),
            ],
        )  # fmt: skip
        assert result.exit_code == 0, result.output
        assert len(log_path.read_text().splitlines()) == 3
        assert curve.read_text().startswith("iteration,median,sd,test_median,test_sd")
        assert gp_path.exists()

    def test_run_bo_from_file(self, runner, tmp_path):
        """Benchmarks written by synth-bench are read back by run-bo in noisy mode."""
        out = tmp_path / "bench.jsonl"
        assert runner.invoke(app, ["synth-bench", "--space", "dag-3", "--out", str(out), "--noise-sd", "0.05"]).exit_code == 0
        result = runner.invoke(app, ["run-bo", "--bench", str(out), "--mode", "noisy", "--iters", "1", "--init", "3", "--batch", "2"])
        assert result.exit_code == 0, result.output

    def test_missing_benchmark_file(self, runner, tmp_path):
        """A benchmark path that does not exist is an error."""
        result = runner.invoke(app, ["run-bo", "--bench", str(tmp_path / "missing.jsonl")])
        assert result.exit_code == 1

    def test_random_search(self, runner, tmp_path):
        """The baseline logs one record per iteration."""
        log_path = tmp_path / "random.jsonl"
        result = runner.invoke(app, ["random-search", "--bench", "synth:dag-3", "--iters", "2", "--init", "3", "--batch", "2", "--log", str(log_path)])
        assert result.exit_code == 0, result.output
        records = [json.loads(line) for line in log_path.read_text().splitlines()]
        assert [r["method"] for r in records] == ["random"] * 3

    def test_kernel_compare(self, runner, tmp_path):
        """A small comparison prints both kernels and saves the report."""
        out = tmp_path / "report.json"
        result = runner.invoke(app, ["kernel-compare", "--bench", "synth:dag-3", "--reps", "2", "--train", "6", "--test", "8", "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert [row["kernel"] for row in json.loads(out.read_text())["rows"]] == ["linear", "exponential"]

    def test_kernel_compare_too_few_records(self, runner):
        """Asking for more architectures than the table holds is an error."""
        result = runner.invoke(app, ["kernel-compare", "--bench", "synth:digraph-2", "--train", "3", "--test", "3"])
        assert result.exit_code == 1


class TestModelCommands:
    """emit-mip and check-solution."""

    def test_emit_and_check_a_feasible_assignment(self, runner, tmp_path):
        """The completion of a member graph passes check-solution."""
        model_path, assignment_path = tmp_path / "space.lp", tmp_path / "assignment.txt"
        result = runner.invoke(app, ["emit-mip", "--space", "digraph-2", "--out", str(model_path)])
        assert result.exit_code == 0, result.output
        g = LabeledGraph.from_adjacency([[1, 1], [0, 1]])
        assignment_path.write_text(format_assignment(complete_assignment(build_space_model(digraphs(2)), g)))
        result = runner.invoke(app, ["check-solution", "--model", str(model_path), "--assignment", str(assignment_path)])
        assert result.exit_code == 0, result.output
        assert "feasible" in result.output

    def test_check_reports_violations(self, runner, tmp_path):
        """Breaking the reachability variables is reported with exit code 1."""
        model_path, assignment_path = tmp_path / "space.lp", tmp_path / "assignment.txt"
        runner.invoke(app, ["emit-mip", "--space", "digraph-2", "--out", str(model_path)])
        g = LabeledGraph.from_adjacency([[1, 1], [0, 1]])
        values = complete_assignment(build_space_model(digraphs(2)), g)
        values["d_0_1"] = 2.0
        assignment_path.write_text(format_assignment(values))
        result = runner.invoke(app, ["check-solution", "--model", str(model_path), "--assignment", str(assignment_path)])
        assert result.exit_code == 1
        assert "violated" in result.output

    def test_check_solution_on_a_foreign_file(self, runner, tmp_path):
        """Files not written by emit-mip are refused."""
        model_path, assignment_path = tmp_path / "foreign.lp", tmp_path / "assignment.txt"
        model_path.write_text("Minimize\n obj: x\nEnd\n")
        assignment_path.write_text("x=1\n")
        result = runner.invoke(app, ["check-solution", "--model", str(model_path), "--assignment", str(assignment_path)])
        assert result.exit_code == 1

    def test_emit_mps(self, runner, tmp_path):
        """The MPS format is available."""
        out = tmp_path / "space.mps"
        result = runner.invoke(app, ["emit-mip", "--space", "dag-3", "--out", str(out), "--format", "mps"])
        assert result.exit_code == 0, result.output
        assert out.read_text().startswith("NAME ")

    def test_emit_acquisition_from_saved_gp(self, runner, tmp_path):
        """A GP saved by run-bo turns emit-mip into the acquisition model."""
        gp_path, model_path = tmp_path / "gp.json", tmp_path / "acquisition.lp"
        result = runner.invoke(app, ["run-bo", "--bench", "synth:dag-3", "--iters", "1", "--init", "4", "--batch", "2", "--save-gp", str(gp_path)])
        assert result.exit_code == 0, result.output
        result = runner.invoke(app, ["emit-mip", "--space", "dag-3", "--gp-state", str(gp_path), "--out", str(model_path)])
        assert result.exit_code == 0, result.output
        text = model_path.read_text()
        assert "posterior_variance" in text
        assert "nogood" in text


class TestValidate:
    """The built-in self check."""

    def test_validate_command(self, runner):
        """Encoding certificate and a BO smoke run."""
        result = runner.invoke(app, ["validate"])
        assert result.exit_code == 0, result.output
        assert "Basic validation successful" in result.output
