#!/usr/bin/env python3
"""
Command Line Interface for archsearch-mip
"""

from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

import typer
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from archsearch_mip.config import ArchSearchConfig, load_config
from archsearch_mip.exceptions import ArchSearchError
from archsearch_mip.gp.gaussian_process import fit, load_gp_state
from archsearch_mip.graphs.graph import key_hex
from archsearch_mip.graphs.space import PRESETS, resolve_space
from archsearch_mip.harness.benchmark import load_benchmark, synth_benchmark, write_benchmark
from archsearch_mip.harness.bo_loop import BoRunRecord, RunLog, fit_config_for, random_search, run_bo
from archsearch_mip.harness.kernel_compare import kernel_compare
from archsearch_mip.harness.reporting import regret_curve, write_regret_csv
from archsearch_mip.log import configure_logging
from archsearch_mip.mip.checker import check_assignment
from archsearch_mip.mip.encoding import build_space_model
from archsearch_mip.mip.verification import verify_encoding
from archsearch_mip.mip.writers import emit, read_assignment, read_lp
from archsearch_mip.optimize.external import build_acquisition_model

app = typer.Typer(
    name="archsearch-mip",
    help="Graph Bayesian optimisation with a MIP-encoded acquisition over labeled DAG spaces",
    add_completion=False,
)
console = Console()


class KernelChoice(str, Enum):
    linear = "linear"
    exp = "exp"


class OptimizerChoice(str, Enum):
    enum = "enum"
    external = "external"


class ModeChoice(str, Enum):
    deterministic = "deterministic"
    noisy = "noisy"


class FormatChoice(str, Enum):
    lp = "lp"
    mps = "mps"


_state: Dict[str, ArchSearchConfig] = {}


def _config() -> ArchSearchConfig:
    return _state.get("config") or ArchSearchConfig()


def _fail(e: Exception) -> typer.Exit:
    console.print(f"[bold red]❌ Error:[/bold red] {e}")
    return typer.Exit(1)


def _summary(records: List[BoRunRecord], title: str) -> None:
    table = Table(title=title)
    table.add_column("iteration", justify="right")
    table.add_column("observations", justify="right")
    table.add_column("incumbent val error", justify="right")
    table.add_column("incumbent test error", justify="right")
    table.add_column("best LCB", justify="right")
    for record in records:
        lcb = min((p.acquisition for p in record.proposed if p.acquisition is not None), default=None)
        table.add_row(
            str(record.iteration),
            str(record.num_observations),
            f"{record.incumbent_val_error:.5f}",
            f"{record.incumbent_test_error:.5f}",
            "-" if lcb is None else f"{lcb:.5f}",
        )
    console.print(table)
    if records and records[-1].exhausted:
        console.print("[yellow]⚠️  The space was exhausted before the iteration budget.[/yellow]")


@app.command("verify-encoding")
def verify_encoding_command(
    n_max: Optional[int] = typer.Option(None, "--n-max", help="Largest graph size to certify (exhaustive up to 3)", min=1, max=5),
    n5_sample: Optional[int] = typer.Option(None, "--n5-sample", help="Check a seeded random subset of the n=5 graphs"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed of the n=5 subset"),
):
    """Certify that the graph-space encoding is a bijection onto graphs."""
    settings = _config().verify
    n_max = n_max or settings.n_max
    console.print(f"[bold blue]🔧 Verifying the encoding up to n={n_max}...[/bold blue]")
    try:
        report = verify_encoding(
            n_max=n_max,
            n5_sample=n5_sample if n5_sample is not None else settings.n5_sample,
            seed=seed if seed is not None else settings.seed,
        )
    except ArchSearchError as e:
        raise _fail(e)

    table = Table(title="Encoding certificates")
    for column in ("n", "n0", "mode", "graphs", "feasible", "mismatches", "perturbations", "failures", "census", "seconds"):
        table.add_column(column, justify="right")
    for size in report.sizes:
        table.add_row(
            str(size.n),
            str(size.n0),
            size.mode,
            str(size.graphs),
            str(size.feasible),
            str(size.mismatches),
            str(size.perturbations),
            str(size.perturbation_failures),
            "✅" if size.census_ok else "❌",
            f"{size.seconds:.1f}",
        )
    console.print(table)
    for size in report.sizes:
        for detail in size.details:
            console.print(f"[dim]n={size.n}: {detail}[/dim]")
    if not report.ok:
        console.print("[bold red]❌ The encoding failed verification[/bold red]")
        raise typer.Exit(1)
    console.print("[bold green]✅ Every size verified[/bold green]")


@app.command("kernel-compare")
def kernel_compare_command(
    bench: str = typer.Option(..., "--bench", help="Benchmark file, or synth:<space>[,<space>] for a synthetic table"),
    reps: Optional[int] = typer.Option(None, "--reps", help="Replications", min=1),
    train: Optional[int] = typer.Option(None, "--train", help="Training architectures per replication", min=2),
    test: Optional[int] = typer.Option(None, "--test", help="Test architectures per replication", min=1),
    seed: Optional[int] = typer.Option(None, "--seed", help="Sampling seed"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the JSON report here"),
):
    """Compare the linear and exponential kernels by RMSE, MNLL and Spearman correlation."""
    settings = _config().kernel_compare
    try:
        table = load_benchmark(bench)
        report = kernel_compare(
            table,
            train_n=train or settings.train_n,
            test_n=test or settings.test_n,
            reps=reps or settings.reps,
            seed=seed if seed is not None else settings.seed,
            fit_config=_config().run.fit,
        )
    except (ArchSearchError, ValueError) as e:
        raise _fail(e)

    formatted = report.formatted()
    rich_table = Table(title=f"Kernel comparison on {report.benchmark} ({report.reps} replications)")
    for column in formatted.columns:
        rich_table.add_column(str(column))
    for row in formatted.itertuples(index=False):
        rich_table.add_row(*[str(value) for value in row])
    console.print(rich_table)
    undefined = sum(row.spearman_undefined for row in report.rows)
    if undefined:
        console.print(f"[yellow]⚠️  Spearman was undefined in {undefined} fit(s) and reported as 0.[/yellow]")
    if out is not None:
        console.print(f"[dim]Report written to {report.save(out)}[/dim]")


@app.command("run-bo")
def run_bo_command(
    bench: str = typer.Option(..., "--bench", help="Benchmark file, or synth:<space>[,<space>] for a synthetic table"),
    seed: int = typer.Option(0, "--seed", help="Run seed"),
    iters: Optional[int] = typer.Option(None, "--iters", help="BO iterations", min=0),
    init: Optional[int] = typer.Option(None, "--init", help="Initial design size", min=1),
    batch: Optional[int] = typer.Option(None, "--batch", help="Architectures per iteration", min=1),
    beta_sqrt: Optional[float] = typer.Option(None, "--beta-sqrt", help="LCB exploration weight (square root)", min=0.0),
    kernel: Optional[KernelChoice] = typer.Option(None, "--kernel", help="Kernel form"),
    optimizer: Optional[OptimizerChoice] = typer.Option(None, "--optimizer", help="Acquisition optimizer"),
    mode: Optional[ModeChoice] = typer.Option(None, "--mode", help="Objective mode (default: the benchmark's)"),
    log_path: Optional[Path] = typer.Option(None, "--log", help="Line-delimited JSON run log"),
    curve: Optional[Path] = typer.Option(None, "--curve", help="Regret-curve CSV"),
    save_gp: Optional[Path] = typer.Option(None, "--save-gp", help="Save a GP fitted on every observation (input of emit-mip)"),
):
    """
    Run batch BO on a tabular benchmark.

    Examples:
        archsearch-mip run-bo --bench synth:nb201 --seed 3
        archsearch-mip run-bo --bench nb101.jsonl --optimizer external --kernel exp
    """
    updates = {
        "iters": iters,
        "init": init,
        "batch": batch,
        "beta_sqrt": beta_sqrt,
        "kernel": None if kernel is None else ("exponential" if kernel is KernelChoice.exp else "linear"),
        "optimizer": None if optimizer is None else optimizer.value,
    }
    config = _config().run.model_copy(update={k: v for k, v in updates.items() if v is not None})
    console.print(f"\n[bold blue]🔍 BO on:[/bold blue] {bench}")
    console.print(
        f"[dim]seed {seed} | beta_sqrt {config.beta_sqrt} | init {config.init} | batch {config.batch} | "
        f"iterations {config.iters} | kernel {config.kernel} | optimizer {config.optimizer}[/dim]\n"
    )
    try:
        table = load_benchmark(bench, mode=mode.value if mode else None)
        if log_path is not None:
            with RunLog(log_path) as run_log:
                records = run_bo(table, seed, config, run_log)
        else:
            records = run_bo(table, seed, config)
        if save_gp is not None:
            points = [p for record in records for p in record.proposed]
            vocabulary = table.spaces[0].vocabulary()
            width = max(spec.n for spec in table.spaces)
            gp = fit([p.graph for p in points], [p.val_error for p in points], fit_config_for(table, config), vocabulary, width)
            gp.save(save_gp)
    except ArchSearchError as e:
        raise _fail(e)

    _summary(records, f"BO on {table.name}")
    if curve is not None:
        write_regret_csv(regret_curve([records]), curve)
        console.print(f"[dim]Regret curve written to {curve}[/dim]")
    if log_path is not None:
        console.print(f"[dim]Run log written to {log_path}[/dim]")


@app.command("random-search")
def random_search_command(
    bench: str = typer.Option(..., "--bench", help="Benchmark file, or synth:<space>[,<space>] for a synthetic table"),
    seed: int = typer.Option(0, "--seed", help="Run seed"),
    iters: Optional[int] = typer.Option(None, "--iters", help="Iterations", min=0),
    init: Optional[int] = typer.Option(None, "--init", help="Initial sample size", min=1),
    batch: Optional[int] = typer.Option(None, "--batch", help="Architectures per iteration", min=1),
    log_path: Optional[Path] = typer.Option(None, "--log", help="Line-delimited JSON run log"),
):
    """Random-search baseline with the BO evaluation budget."""
    config = _config().run
    try:
        table = load_benchmark(bench)
        arguments = dict(iters=iters if iters is not None else config.iters, init=init or config.init, batch=batch or config.batch, cap=config.cap)
        if log_path is not None:
            with RunLog(log_path) as run_log:
                records = random_search(table, seed, run_log=run_log, **arguments)
        else:
            records = random_search(table, seed, **arguments)
    except ArchSearchError as e:
        raise _fail(e)
    _summary(records, f"Random search on {table.name}")


@app.command("emit-mip")
def emit_mip_command(
    space: str = typer.Option(..., "--space", help=f"Preset ({', '.join(PRESETS)}) or a JSON/TOML space file"),
    out: Path = typer.Option(..., "--out", help="Model file to write"),
    gp_state: Optional[Path] = typer.Option(None, "--gp-state", help="Saved GP; adds kernel terms and the LCB objective"),
    beta_sqrt: Optional[float] = typer.Option(None, "--beta-sqrt", help="LCB exploration weight (square root)", min=0.0),
    fmt: FormatChoice = typer.Option(FormatChoice.lp, "--format", help="Model file format"),
):
    """Write the MIP of a space, optionally with the acquisition of a saved GP."""
    config = _config().run
    try:
        spec = resolve_space(space)
        if gp_state is None:
            model = build_space_model(spec)
        else:
            gp = load_gp_state(gp_state)
            exclude = {key_hex(g) for g in gp.graphs}
            model = build_acquisition_model(spec, gp, beta_sqrt if beta_sqrt is not None else config.beta_sqrt, exclude, config.solver.breakpoints)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(emit(model, fmt.value))
    except ArchSearchError as e:
        raise _fail(e)
    census = ", ".join(f"{tag}={count}" for tag, count in model.census().items())
    console.print(f"[green]✅ Wrote {out}[/green] [dim]({model.num_variables} variables, {model.num_constraints} constraints)[/dim]")
    console.print(f"[dim]{census}[/dim]")
    if model.kernel is not None and model.kernel.pwl_error:
        console.print(f"[dim]PWL error bound: {model.kernel.pwl_error:.3g} (relative {model.kernel.pwl_relative_error:.3g})[/dim]")


@app.command("check-solution")
def check_solution_command(
    model_path: Path = typer.Option(..., "--model", help="LP file written by emit-mip"),
    assignment_path: Path = typer.Option(..., "--assignment", help="name=value assignment file"),
):
    """Check an assignment against every constraint of an emitted model."""
    try:
        model = read_lp(model_path.read_text())
        violations = check_assignment(model, read_assignment(assignment_path.read_text()))
    except (ArchSearchError, OSError) as e:
        raise _fail(e)
    if not violations:
        console.print("[bold green]✅ Assignment is feasible[/bold green]")
        return
    table = Table(title=f"{len(violations)} violated constraint(s)")
    for column in ("tag", "constraint", "lhs", "sense", "rhs", "slack"):
        table.add_column(column)
    for v in violations[:50]:
        table.add_row(v.constraint_tag, v.constraint, f"{v.lhs:.6g}", v.sense, f"{v.rhs:.6g}", f"{v.slack:.3g}")
    console.print(table)
    raise typer.Exit(1)


@app.command("synth-bench")
def synth_bench_command(
    space: str = typer.Option(..., "--space", help="Space preset or file; comma-separate several for a two-size table"),
    out: Path = typer.Option(..., "--out", help="Benchmark file to write"),
    seed: int = typer.Option(0, "--seed", help="Noise seed"),
    noise_sd: float = typer.Option(0.0, "--noise-sd", help="Per-seed Gaussian noise on accuracies", min=0.0),
    seeds: int = typer.Option(20, "--seeds", help="Training seeds per architecture", min=1),
):
    """Write a synthetic tabular benchmark over every graph of a space."""
    try:
        table = synth_benchmark([resolve_space(name) for name in space.split(",")], seed=seed, noise_sd=noise_sd, seeds=seeds)
        write_benchmark(table, out)
    except ArchSearchError as e:
        raise _fail(e)
    console.print(
        Panel(
            f"{len(table)} architectures\nbest validation accuracy {table.metadata['optimum_val_acc']:.4f}\n"
            f"optimum key {table.metadata['optimum_key']}",
            title=f"📊 {table.name}",
            border_style="green",
            padding=(1, 2),
        )
    )


@app.command()
def validate():
    """Quick self-check of the encoding, the kernels and the GP."""
    console.print("[bold blue]🔧 Validating setup...[/bold blue]")
    try:
        report = verify_encoding(n_max=2)
        if not report.ok:
            raise ArchSearchError("graph-space encoding failed its n <= 2 certificate")
        console.print("[green]✅ Graph-space encoding certified for n <= 2[/green]")

        table = synth_benchmark(resolve_space("digraph-3"))
        records = run_bo(table, seed=0, config=_config().run.model_copy(update={"iters": 2, "init": 4, "batch": 2}))
        console.print(f"[green]✅ BO smoke run finished with incumbent error {records[-1].incumbent_val_error:.4f}[/green]")
        console.print("[bold green]✅ Basic validation successful![/bold green]")
    except Exception as e:
        console.print(f"[bold red]❌ Validation failed:[/bold red] {e}")
        raise typer.Exit(1)


@app.callback()
def callback(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING or ERROR"),
    config: Optional[Path] = typer.Option(None, "--config", help="TOML or JSON configuration (default: ./archsearch.toml)"),
):
    """archsearch-mip - graph BO with a certifiably optimal acquisition."""
    configure_logging(log_level)
    try:
        _state["config"] = load_config(config)
    except ArchSearchError as e:
        raise _fail(e)


if __name__ == "__main__":
    app()
