"""Acquisition optimisation through an external MIP solver.

The solver is any command line that reads the emitted LP file and writes a solution pool
(one ``name=value`` line per solution). The command template comes from
``ARCHSEARCH_SOLVER_CMD`` or the ``[run.solver]`` config section, e.g.::

    my_solver --time {timelimit} --pool 5 {model} > {solution}
"""

import logging
import os
import shlex
import subprocess
import tempfile
from pathlib import Path
from typing import AbstractSet, List, Literal, Optional, Sequence

from filelock import FileLock
from pydantic import BaseModel, Field

from archsearch_mip.exceptions import (
    ArchSearchError,
    InfeasibleClaimError,
    SolutionParseError,
    SolverError,
    SpaceExhaustedError,
)
from archsearch_mip.gp.gaussian_process import GpState
from archsearch_mip.graphs.graph import graph_from_key, key_hex
from archsearch_mip.graphs.space import DEFAULT_ENUMERATION_CAP, GraphSpaceSpec
from archsearch_mip.mip.acquisition import add_acquisition, add_no_good_cut
from archsearch_mip.mip.assignment import complete_assignment, decode_graph
from archsearch_mip.mip.checker import check_assignment
from archsearch_mip.mip.encoding import build_space_model
from archsearch_mip.mip.kernel_terms import DEFAULT_BREAKPOINTS, add_kernel_terms, kernel_data
from archsearch_mip.mip.model import MipModel
from archsearch_mip.mip.writers import emit, read_solution_pool
from archsearch_mip.optimize.enumerative import EnumeratedSpace, optimize_enumerative
from archsearch_mip.optimize.pool import Candidate, CandidatePool, merge_pools

log = logging.getLogger(__name__)

SOLVER_CMD_ENV = "ARCHSEARCH_SOLVER_CMD"
DEFAULT_TIME_LIMIT = 1800.0
_TIMEOUT_GRACE = 60.0
_OUTPUT_TAIL = 4000


class SolverConfig(BaseModel):
    command: Optional[str] = Field(default=None, description="Command template with {model}, {solution} and {timelimit}")
    time_limit: float = Field(default=DEFAULT_TIME_LIMIT, gt=0.0, description="Seconds handed to the solver")
    breakpoints: int = Field(default=DEFAULT_BREAKPOINTS, ge=2, description="PWL breakpoints for the exponential kernel")
    workdir: Optional[Path] = Field(default=None, description="Where models and solution pools are written; a temp dir when unset")

    def resolved_command(self) -> Optional[str]:
        return self.command or os.getenv(SOLVER_CMD_ENV) or None


def build_acquisition_model(
    spec: GraphSpaceSpec,
    gp: GpState,
    beta_sqrt: float,
    exclude: AbstractSet[str] = frozenset(),
    breakpoints: int = DEFAULT_BREAKPOINTS,
) -> MipModel:
    """Space model with kernel terms, the LCB objective and a no-good cut per excluded graph of this size."""
    model = build_space_model(spec)
    add_kernel_terms(model, kernel_data(gp.graphs, model.metadata.vocabulary), gp.params, gp.vocabulary, breakpoints)
    add_acquisition(model, gp, beta_sqrt)
    for key in sorted(exclude):
        g = graph_from_key(bytes.fromhex(key))
        if g.n == model.n and spec.contains(g):
            add_no_good_cut(model, g)
    log.info("Acquisition model for %s: %d variables, %d constraints", spec.label, model.num_variables, model.num_constraints)
    return model


def _tail(text: str) -> str:
    return text[-_OUTPUT_TAIL:]


def run_solver(command: str, model_path: Path, solution_path: Path, time_limit: float) -> str:
    """Run one solver invocation; returns its captured output."""
    line = command.format(model=shlex.quote(str(model_path)), solution=shlex.quote(str(solution_path)), timelimit=f"{time_limit:g}")
    log.info("Invoking solver: %s", line)
    # redirections in the template need a shell
    use_shell = any(token in command for token in (">", "|", "&&", ";"))
    try:
        completed = subprocess.run(
            line if use_shell else shlex.split(line),
            shell=use_shell,
            capture_output=True,
            text=True,
            timeout=time_limit + _TIMEOUT_GRACE,
            check=False,
        )
    except FileNotFoundError as exc:
        raise SolverError(f"solver executable not found: {exc.filename}") from exc
    except subprocess.TimeoutExpired as exc:
        output = exc.stdout if isinstance(exc.stdout, str) else ""
        raise SolverError(f"solver exceeded {time_limit + _TIMEOUT_GRACE:g}s", output=_tail(output)) from exc
    output = (completed.stdout or "") + (completed.stderr or "")
    if completed.returncode != 0:
        raise SolverError(f"solver exited with status {completed.returncode}", returncode=completed.returncode, output=_tail(output))
    return output


def _score_solutions(model: MipModel, gp: GpState, beta_sqrt: float, solutions: Sequence[dict], exclude: AbstractSet[str]) -> List[Candidate]:
    scored: List[Candidate] = []
    for index, solution in enumerate(solutions):
        try:
            g = decode_graph(model, solution)
            violations = check_assignment(model, complete_assignment(model, g))
        except ArchSearchError as exc:
            log.warning("Dropping solution %d: %s", index, exc)
            continue
        if violations:
            log.warning("Dropping solution %d: %d violated constraints, first %s", index, len(violations), violations[0].constraint)
            continue
        key = key_hex(g)
        if key in exclude:
            log.warning("Dropping solution %d: already evaluated", index)
            continue
        mean, variance = gp.posterior(g)
        std = variance**0.5
        scored.append(Candidate(graph=g, key=key, acquisition=mean - beta_sqrt * std, mean=mean, std=std))
    return scored


def optimize_external(
    spec: GraphSpaceSpec,
    gp: GpState,
    beta_sqrt: float = 3.0,
    k: int = 5,
    exclude: AbstractSet[str] = frozenset(),
    config: Optional[SolverConfig] = None,
) -> CandidatePool:
    """Solve the acquisition MIP externally, then decode, validate and re-score the solution pool."""
    config = config or SolverConfig()
    command = config.resolved_command()
    if not command:
        raise SolverError(f"no solver command configured (set {SOLVER_CMD_ENV} or [run.solver].command)")
    model = build_acquisition_model(spec, gp, beta_sqrt, exclude, config.breakpoints)

    with tempfile.TemporaryDirectory(prefix="archsearch-") as scratch:
        workdir = Path(config.workdir) if config.workdir is not None else Path(scratch)
        workdir.mkdir(parents=True, exist_ok=True)
        model_path = workdir / f"acquisition-{spec.label}.lp"
        solution_path = workdir / f"acquisition-{spec.label}.sol"
        with FileLock(str(workdir / "solver.lock")):
            model_path.write_bytes(emit(model, "lp"))
            solution_path.unlink(missing_ok=True)
            output = run_solver(command, model_path, solution_path, config.time_limit)
            if not solution_path.exists():
                raise SolutionParseError("solver wrote no solution file", output=_tail(output))
            try:
                solutions = read_solution_pool(solution_path.read_text())
            except SolutionParseError as exc:
                raise SolutionParseError(str(exc), output=_tail(output)) from exc

    if not solutions:
        raise InfeasibleClaimError("solver returned an empty solution pool", output=_tail(output))
    scored = _score_solutions(model, gp, beta_sqrt, solutions, exclude)
    if not scored:
        raise InfeasibleClaimError(f"none of the {len(solutions)} returned solutions is feasible", output=_tail(output))
    pool = CandidatePool.from_scored(scored, k, "external-solver-claimed")
    log.info("Solver returned %d solutions, %d kept, best LCB %.5f", len(solutions), len(pool), pool.candidates[0].acquisition)
    return pool


def optimize_two_size(
    sizes: Sequence[GraphSpaceSpec],
    gp: GpState,
    beta_sqrt: float = 3.0,
    k: int = 5,
    exclude: AbstractSet[str] = frozenset(),
    optimizer: Literal["enum", "external"] = "enum",
    config: Optional[SolverConfig] = None,
    spaces: Optional[Sequence[EnumeratedSpace]] = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> CandidatePool:
    """One pool of ``k`` per graph size, merged into the global top ``k``."""
    if not sizes:
        raise ValueError("optimize_two_size needs at least one space")
    pools: List[CandidatePool] = []
    for index, spec in enumerate(sizes):
        try:
            if optimizer == "external":
                pools.append(optimize_external(spec, gp, beta_sqrt, k, exclude, config))
            else:
                space = spaces[index] if spaces is not None else EnumeratedSpace.build(spec, cap)
                pools.append(optimize_enumerative(space, gp, beta_sqrt, k, exclude))
        except SpaceExhaustedError:
            log.warning("Space %s is exhausted", spec.label)
    if not pools:
        raise SpaceExhaustedError("every space is exhausted")
    return merge_pools(pools, k)
