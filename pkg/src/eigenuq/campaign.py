"""Campaign orchestration.

Parses the solver-style config dialect, plans the five perturbed runs
(one per componentality/alignment combination, plus an optional
baseline), and executes them sequentially or in parallel against the
built-in channel solver or an external solver command. Each run gets
its own directory holding the emitted config, solver logs, and the
solution export.

Config dialect: "KEY= VALUE" lines with whitespace tolerated around
'=', '%' starts a comment line, later duplicates of a key override
earlier ones, booleans are YES/NO case-insensitively. Keys this module
does not recognize pass through untouched and are re-emitted verbatim
in their original order.
"""

from __future__ import annotations

import logging
import shlex
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .channel import (
    ChannelParams,
    QoiRecord,
    load_solution,
    qoi_extract,
    solve_baseline,
    solve_perturbed,
    write_solution,
)
from .errors import ConfigError, InvalidMagnitude, IoError, LaunchError
from .perturb import PerturbationSpec

log = logging.getLogger(__name__)

# The canonical perturbed-run set: (name, component, permute).
TABLE_RUNS = (
    ("1c", 1, False),
    ("2c", 2, False),
    ("3c", 3, False),
    ("p1c1", 1, True),
    ("p1c2", 2, True),
)

UQ_KEYS = ("USING_UQ", "UQ_COMPONENT", "UQ_PERMUTE", "UQ_URLX", "UQ_DELTA_B")

URLX_ADVISORY_FLOOR = 0.05

CONFIG_FILENAME = "config.cfg"
SOLUTION_FILENAME = "solution.dat"

# Pass-through keys the built-in solver interprets when present.
BUILTIN_SOLVER_KEYS = {
    "RETAU": ("retau", float),
    "GRID_CELLS": ("n_cells", int),
    "GRID_STRETCHING": ("stretching", float),
    "CONV_TOL": ("tol", float),
    "MAX_ITERS": ("max_iterations", int),
}


@dataclass(frozen=True)
class UqConfig:
    """Parsed UQ options plus everything else as opaque pass-through."""

    using_uq: bool = False
    uq_component: int = 1
    uq_permute: bool = False
    uq_urlx: float = 0.1
    uq_delta_b: float = 1.0
    passthrough: dict = field(default_factory=dict)


def _parse_yes_no(value: str, key: str, line: int) -> bool:
    v = value.strip().upper()
    if v == "YES":
        return True
    if v == "NO":
        return False
    raise ConfigError(f"{key} expects YES or NO, got {value!r}", line=line)


def parse_config(text: str) -> UqConfig:
    """Parse config text into a UqConfig.

    Unknown keys are preserved byte-for-byte in first-appearance order
    with last-value-wins semantics. Malformed lines and invalid values
    for recognized keys raise ConfigError carrying the line number.
    """
    fields: dict = {}
    passthrough: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        # '%' starts a comment anywhere on the line
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected KEY= VALUE, got {line!r}", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"missing key before '=' in {line!r}", line=lineno)
        if key == "USING_UQ":
            fields["using_uq"] = _parse_yes_no(value, key, lineno)
        elif key == "UQ_COMPONENT":
            try:
                component = int(value)
            except ValueError:
                raise ConfigError(
                    f"UQ_COMPONENT expects an integer, got {value!r}", line=lineno
                ) from None
            if component not in (1, 2, 3):
                raise ConfigError(
                    f"UQ_COMPONENT must be 1, 2, or 3, got {component}", line=lineno
                )
            fields["uq_component"] = component
        elif key == "UQ_PERMUTE":
            fields["uq_permute"] = _parse_yes_no(value, key, lineno)
        elif key in ("UQ_URLX", "UQ_DELTA_B"):
            try:
                number = float(value)
            except ValueError:
                raise ConfigError(
                    f"{key} expects a number, got {value!r}", line=lineno
                ) from None
            if not 0.0 <= number <= 1.0:
                raise ConfigError(
                    f"{key} must lie in [0, 1], got {number}", line=lineno
                )
            fields["uq_urlx" if key == "UQ_URLX" else "uq_delta_b"] = number
        else:
            passthrough[key] = value
    config = UqConfig(**fields, passthrough=passthrough)
    if config.uq_urlx < URLX_ADVISORY_FLOOR:
        log.warning(
            "UQ_URLX= %g is below the advisory floor %g; perturbations may "
            "not be completed by convergence",
            config.uq_urlx,
            URLX_ADVISORY_FLOOR,
        )
    return config


def emit_config(base: UqConfig, overrides: dict | None = None) -> str:
    """Serialize a config: pass-through keys first (original order),
    then the UQ keys. parse_config(emit_config(c)) == c."""
    cfg = replace(base, **overrides) if overrides else base
    lines = [f"{key}= {value}" for key, value in cfg.passthrough.items()]
    lines.append(f"USING_UQ= {'YES' if cfg.using_uq else 'NO'}")
    lines.append(f"UQ_COMPONENT= {cfg.uq_component}")
    lines.append(f"UQ_PERMUTE= {'YES' if cfg.uq_permute else 'NO'}")
    lines.append(f"UQ_URLX= {cfg.uq_urlx!r}")
    lines.append(f"UQ_DELTA_B= {cfg.uq_delta_b!r}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RunPlan:
    """One planned run: its name, recipe (None for baseline), and
    output directory."""

    name: str
    spec: PerturbationSpec | None
    directory: Path


@dataclass(frozen=True)
class CampaignPlan:
    """Ordered run list with the parallelism degree and base config."""

    runs: tuple[RunPlan, ...]
    nprocs: int
    config: UqConfig
    output_root: Path


@dataclass(frozen=True)
class RunResult:
    """Outcome of one run: success, non-convergence, or failure."""

    name: str
    converged: bool
    failed: bool
    qoi: QoiRecord | None
    artifacts: tuple[Path, ...]
    duration: float
    error: BaseException | None = None


def plan_campaign(
    config: UqConfig,
    include_baseline: bool,
    n: int,
    output_root: Path | str = Path("equips_out"),
) -> CampaignPlan:
    """Lay out the canonical run set in canonical order.

    The five perturbed runs always appear, in table order, carrying the
    config's urlx and delta_b; the baseline, when included, goes first.
    Pure: no directories are created here.
    """
    n = int(n)
    if n < 1:
        raise InvalidMagnitude(f"parallelism degree must be >= 1, got {n}")
    root = Path(output_root)
    runs: list[RunPlan] = []
    if include_baseline:
        runs.append(RunPlan(name="baseline", spec=None, directory=root / "baseline"))
    for name, component, permute in TABLE_RUNS:
        spec = PerturbationSpec(
            component=component,
            permute=permute,
            delta_b=config.uq_delta_b,
            urlx=config.uq_urlx,
        )
        runs.append(RunPlan(name=name, spec=spec, directory=root / name))
    return CampaignPlan(
        runs=tuple(runs), nprocs=n, config=config, output_root=root
    )


def _run_overrides(run: RunPlan) -> dict:
    if run.spec is None:
        return {"using_uq": False}
    return {
        "using_uq": True,
        "uq_component": int(run.spec.component),
        "uq_permute": run.spec.permute,
        "uq_urlx": run.spec.urlx,
        "uq_delta_b": run.spec.delta_b,
    }


def channel_params_from_config(
    config: UqConfig, base: ChannelParams | None = None
) -> ChannelParams:
    """Apply the built-in solver's recognized pass-through keys."""
    params = base if base is not None else ChannelParams()
    updates = {}
    for key, (attr, cast) in BUILTIN_SOLVER_KEYS.items():
        if key in config.passthrough:
            raw = config.passthrough[key]
            try:
                updates[attr] = cast(raw)
            except ValueError:
                raise ConfigError(f"{key} expects {cast.__name__}, got {raw!r}") from None
    return replace(params, **updates) if updates else params


class BuiltinChannelSolver:
    """Solver adapter running the in-process channel solver."""

    def __init__(self, params: ChannelParams | None = None):
        self.params = params if params is not None else ChannelParams()

    def execute(self, run: RunPlan, config: UqConfig, config_path: Path) -> RunResult:
        start = time.perf_counter()
        params = channel_params_from_config(config, self.params)
        if run.spec is None:
            sol = solve_baseline(params)
        else:
            sol = solve_perturbed(params, run.spec)
        solution_path = run.directory / SOLUTION_FILENAME
        write_solution(sol, solution_path)
        log_path = run.directory / "solver.log"
        final = sol.residuals[-1] if sol.residuals else float("nan")
        log_path.write_text(
            f"run: {run.name}\n"
            f"converged: {sol.converged}\n"
            f"iterations: {sol.iterations}\n"
            f"final_residual: {final:.17g}\n",
            encoding="utf-8",
        )
        return RunResult(
            name=run.name,
            converged=sol.converged,
            failed=False,
            qoi=qoi_extract(sol),
            artifacts=(config_path, solution_path, log_path),
            duration=time.perf_counter() - start,
        )


def _qoi_from_solution_file(path: Path) -> QoiRecord:
    import numpy as np

    loaded = load_solution(path)
    y = loaded.data["y"]
    u = loaded.data["u"]
    trapz = getattr(np, "trapezoid", None) or np.trapz
    u_bulk = float(trapz(u, y))
    c_f = 2.0 / (u_bulk * u_bulk) if u_bulk != 0.0 else float("inf")
    return QoiRecord(
        c_f=c_f,
        u_bulk=u_bulk,
        u_centerline=float(u[-1]),
        y=y,
        u=u,
        converged=bool(loaded.header.get("converged", True)),
    )


def external_solver_exec(
    command_template: str,
    config_path: Path | str,
    nprocs: int,
    run_name: str = "run",
) -> RunResult:
    """Launch an external solver on one run directory.

    The template must contain {config}; {np} is substituted when
    present. The child runs in the config's directory with stdout and
    stderr captured to log files. A nonzero exit or a missing
    executable is recorded in the RunResult, never raised.
    """
    if "{config}" not in command_template:
        raise ConfigError(
            f"solver command template must contain {{config}}: {command_template!r}"
        )
    # the child runs with cwd set to the run directory, so substituted
    # paths must be absolute to stay meaningful there
    config_path = Path(config_path).resolve()
    directory = config_path.parent
    try:
        command = command_template.format(
            config=str(config_path), np=int(nprocs), dir=str(directory)
        )
    except (KeyError, IndexError) as exc:
        raise ConfigError(
            f"unknown placeholder in solver command template "
            f"{command_template!r}: {exc}"
        ) from None
    argv = shlex.split(command)
    stdout_path = directory / "solver_stdout.log"
    stderr_path = directory / "solver_stderr.log"
    start = time.perf_counter()
    try:
        with open(stdout_path, "w", encoding="utf-8") as out_f, open(
            stderr_path, "w", encoding="utf-8"
        ) as err_f:
            proc = subprocess.run(
                argv, cwd=directory, stdout=out_f, stderr=err_f, check=False
            )
    except FileNotFoundError as exc:
        return RunResult(
            name=run_name,
            converged=False,
            failed=True,
            qoi=None,
            artifacts=(config_path, stdout_path, stderr_path),
            duration=time.perf_counter() - start,
            error=LaunchError(f"solver executable not found: {exc}"),
        )
    duration = time.perf_counter() - start
    artifacts: list[Path] = [config_path, stdout_path, stderr_path]
    if proc.returncode != 0:
        return RunResult(
            name=run_name,
            converged=False,
            failed=True,
            qoi=None,
            artifacts=tuple(artifacts),
            duration=duration,
            error=RuntimeError(f"solver exited with status {proc.returncode}"),
        )
    qoi = None
    converged = True
    solution_path = directory / SOLUTION_FILENAME
    if solution_path.exists():
        qoi = _qoi_from_solution_file(solution_path)
        converged = qoi.converged
        artifacts.append(solution_path)
    return RunResult(
        name=run_name,
        converged=converged,
        failed=False,
        qoi=qoi,
        artifacts=tuple(artifacts),
        duration=duration,
    )


class ExternalCommandSolver:
    """Solver adapter shelling out to a command template."""

    def __init__(self, command_template: str, nprocs: int = 1):
        if "{config}" not in command_template:
            raise ConfigError(
                f"solver command template must contain {{config}}: "
                f"{command_template!r}"
            )
        self.command_template = command_template
        self.nprocs = int(nprocs)

    def execute(self, run: RunPlan, config: UqConfig, config_path: Path) -> RunResult:
        return external_solver_exec(
            self.command_template, config_path, self.nprocs, run_name=run.name
        )


def _execute_run(run: RunPlan, config: UqConfig, solver) -> RunResult:
    start = time.perf_counter()
    try:
        config_path = run.directory / CONFIG_FILENAME
        config_path.write_text(
            emit_config(config, _run_overrides(run)), encoding="utf-8"
        )
        return solver.execute(run, config, config_path)
    except BaseException as exc:  # noqa: BLE001 - isolation contract
        log.error("run %s failed: %s", run.name, exc)
        return RunResult(
            name=run.name,
            converged=False,
            failed=True,
            qoi=None,
            artifacts=(),
            duration=time.perf_counter() - start,
            error=exc,
        )


def run_campaign(
    plan: CampaignPlan, solver, mode: str = "sequential"
) -> list[RunResult]:
    """Execute every planned run; one RunResult per run, in plan order.

    All run directories are created before any launch (an unwritable
    output root raises IoError with nothing started). A failing run is
    recorded and never aborts the rest. Parallel mode distributes runs
    over a thread pool of the plan's parallelism degree; the built-in
    solves and external child processes are independent of each other.
    """
    if mode not in ("sequential", "parallel"):
        raise ValueError(f"mode must be 'sequential' or 'parallel', got {mode!r}")
    try:
        plan.output_root.mkdir(parents=True, exist_ok=True)
        for run in plan.runs:
            run.directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"output root not writable: {exc}") from exc
    if mode == "sequential" or plan.nprocs == 1:
        return [_execute_run(run, plan.config, solver) for run in plan.runs]
    with ThreadPoolExecutor(max_workers=plan.nprocs) as pool:
        futures = [
            pool.submit(_execute_run, run, plan.config, solver)
            for run in plan.runs
        ]
        return [f.result() for f in futures]
