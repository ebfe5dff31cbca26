"""Command-line entry points.

Subcommands: uncertainty (full campaign: baseline plus the five
perturbed runs, then aggregation), single (one perturbed solve from a
config), aggregate (rebuild reports from existing run directories),
demo (self-contained channel campaign).

Exit codes are a stable contract: 0 success, 1 run failures or
aggregation errors, 2 usage and configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .aggregate import build_campaign_aggregates, emit_report
from .campaign import (
    SOLUTION_FILENAME,
    BuiltinChannelSolver,
    CampaignPlan,
    ExternalCommandSolver,
    RunPlan,
    RunResult,
    UqConfig,
    _qoi_from_solution_file,
    channel_params_from_config,
    parse_config,
    plan_campaign,
    run_campaign,
)
from .errors import AggregationError, ConfigError, EigenUQError
from .perturb import PerturbationSpec

log = logging.getLogger(__name__)

REPORT_DIRNAME = "report"
CANONICAL_ORDER = ("baseline", "1c", "2c", "3c", "p1c1", "p1c2")


def _unit_interval(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{value} is outside [0, 1]")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"processor count must be >= 1, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if value <= 0.0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return value


def _load_config(path: Path) -> UqConfig:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration file {path}: {exc}") from exc
    return parse_config(text)


def _apply_overrides(config: UqConfig, args) -> UqConfig:
    if getattr(args, "urlx", None) is not None and args.urlx != config.uq_urlx:
        log.warning(
            "command-line -u/--urlx %s overrides configured UQ_URLX %s",
            args.urlx,
            config.uq_urlx,
        )
        config = replace(config, uq_urlx=args.urlx)
    if getattr(args, "delta_b", None) is not None and args.delta_b != config.uq_delta_b:
        log.warning(
            "command-line -b/--delta-b %s overrides configured UQ_DELTA_B %s",
            args.delta_b,
            config.uq_delta_b,
        )
        config = replace(config, uq_delta_b=args.delta_b)
    return config


def _make_solver(args, config: UqConfig, nprocs: int):
    if getattr(args, "solver_cmd", None):
        return ExternalCommandSolver(args.solver_cmd, nprocs=nprocs)
    return BuiltinChannelSolver(channel_params_from_config(config))


def _print_summary(results) -> None:
    print("run summary:")
    for r in results:
        if r.failed:
            status = f"FAILED ({r.error})"
        elif not r.converged:
            status = "NOT CONVERGED"
        else:
            status = "ok"
        print(f"  {r.name:<9} {status}  [{r.duration:.2f}s]")


def _emit_reports(results, root: Path, formats, include_nonconverged: bool) -> Path:
    bounds, envelopes, variability, runs_meta = build_campaign_aggregates(
        results, include_nonconverged=include_nonconverged
    )
    report_dir = root / REPORT_DIRNAME
    for fmt in formats:
        paths = emit_report(
            bounds, envelopes, variability, fmt, report_dir, runs_meta=runs_meta
        )
        for p in paths:
            print(f"wrote {p}")
    return report_dir


def cmd_uncertainty(args) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    plan = plan_campaign(
        config, include_baseline=True, n=args.nprocs, output_root=args.output_root
    )
    solver = _make_solver(args, config, args.nprocs)
    # for the built-in solver -n means concurrent runs; an external
    # solver receives it as its {np} substitution instead
    parallel = args.solver_cmd is None and args.nprocs > 1
    results = run_campaign(plan, solver, mode="parallel" if parallel else "sequential")
    _print_summary(results)
    _emit_reports(results, plan.output_root, [args.format], not args.exclude_nonconverged)
    ok = all(r.converged and not r.failed for r in results)
    return 0 if ok else 1


def cmd_single(args) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    if not config.using_uq:
        raise ConfigError(
            "single expects a perturbed configuration: set USING_UQ= YES and "
            "choose UQ_COMPONENT / UQ_PERMUTE (USING_UQ= NO requests the "
            "unperturbed baseline, which needs no perturbation machinery)"
        )
    component = config.uq_component
    permute = config.uq_permute
    if component == 3 and permute:
        log.info(
            "the three-component target is isotropic, so eigenvector "
            "permutation has no effect; running the plain 3c perturbation"
        )
    spec = PerturbationSpec(
        component=component,
        permute=permute,
        delta_b=config.uq_delta_b,
        urlx=config.uq_urlx,
    )
    name = f"p1c{component}" if permute else f"{component}c"
    root = Path(args.output_root)
    run = RunPlan(name=name, spec=spec, directory=root / name)
    plan = CampaignPlan(runs=(run,), nprocs=1, config=config, output_root=root)
    solver = _make_solver(args, config, args.nprocs)
    results = run_campaign(plan, solver, mode="sequential")
    _print_summary(results)
    ok = all(r.converged and not r.failed for r in results)
    return 0 if ok else 1


def _results_from_directories(root: Path) -> list[RunResult]:
    if not root.is_dir():
        raise AggregationError(f"output root {root} does not exist")
    found = {
        p.name: p / SOLUTION_FILENAME
        for p in root.iterdir()
        if p.is_dir() and (p / SOLUTION_FILENAME).is_file()
    }
    if len(found) < 2:
        raise AggregationError(
            f"need at least two run directories with {SOLUTION_FILENAME} "
            f"under {root}, found {sorted(found)}"
        )
    order = [n for n in CANONICAL_ORDER if n in found]
    order += sorted(n for n in found if n not in CANONICAL_ORDER)
    results = []
    for name in order:
        qoi = _qoi_from_solution_file(found[name])
        results.append(
            RunResult(
                name=name,
                converged=qoi.converged,
                failed=False,
                qoi=qoi,
                artifacts=(found[name],),
                duration=0.0,
            )
        )
    return results


def cmd_aggregate(args) -> int:
    results = _results_from_directories(Path(args.output_root))
    _emit_reports(
        results, Path(args.output_root), [args.format], not args.exclude_nonconverged
    )
    return 0


def cmd_demo(args) -> int:
    n_cells = 32 if args.quick else 128
    stretching = 1.15 if args.quick else 1.03
    config = UqConfig(
        using_uq=True,
        uq_urlx=args.urlx if args.urlx is not None else 0.1,
        uq_delta_b=args.delta_b if args.delta_b is not None else 1.0,
        passthrough={
            "RETAU": repr(float(args.retau)),
            "GRID_CELLS": str(n_cells),
            "GRID_STRETCHING": repr(stretching),
        },
    )
    plan = plan_campaign(
        config, include_baseline=True, n=args.nprocs, output_root=args.output_root
    )
    solver = BuiltinChannelSolver(channel_params_from_config(config))
    mode = "parallel" if args.nprocs > 1 else "sequential"
    results = run_campaign(plan, solver, mode=mode)
    _print_summary(results)
    report_dir = None
    bounds, envelopes, variability, runs_meta = build_campaign_aggregates(results)
    report_dir = Path(args.output_root) / REPORT_DIRNAME
    for fmt in ("json", "plot-data"):
        emit_report(bounds, envelopes, variability, fmt, report_dir, runs_meta=runs_meta)
    by_name = {b.qoi: b for b in bounds}
    for label, key in (("C_f", "c_f"), ("bulk velocity", "u_bulk")):
        b = by_name[key]
        print(
            f"{label}: [{b.lower:.6g}, {b.upper:.6g}]  "
            f"baseline {b.baseline_value:.6g}  "
            f"(lower from {b.lower_run}, upper from {b.upper_run})"
        )
    print(f"report written under {report_dir}")
    ok = all(r.converged and not r.failed for r in results)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eigenuq",
        description=(
            "Eigenspace perturbation bounds for eddy-viscosity turbulence "
            "closures: run the perturbed-model campaign and aggregate the "
            "spread of its predictions."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_config=True, with_uq=True):
        if with_config:
            p.add_argument(
                "-f", "--config", type=Path, required=True,
                help="solver configuration file",
            )
        p.add_argument(
            "-n", "--nprocs", type=_positive_int, default=1,
            help="processors: concurrent runs for the built-in solver, "
            "{np} substitution for external commands (default 1)",
        )
        if with_uq:
            p.add_argument(
                "-u", "--urlx", type=_unit_interval, default=None,
                help="stress under-relaxation factor in [0,1]; overrides the "
                "config (default 0.1)",
            )
            p.add_argument(
                "-b", "--delta-b", dest="delta_b", type=_unit_interval, default=None,
                help="perturbation magnitude in [0,1]; overrides the config "
                "(default 1.0)",
            )
        p.add_argument(
            "--output-root", type=Path, default=Path("equips_out"),
            help="directory holding the run directories (default ./equips_out)",
        )

    p = sub.add_parser(
        "uncertainty",
        help="run baseline + 5 perturbed solves and report QoI bounds",
    )
    add_common(p)
    p.add_argument(
        "--solver-cmd", default=None,
        help="external solver command template with {config} and optional "
        "{np}/{dir} placeholders (default: built-in channel solver)",
    )
    p.add_argument(
        "--format", choices=("json", "csv", "plot-data"), default="json",
        help="report format (default json)",
    )
    p.add_argument(
        "--exclude-nonconverged", action="store_true",
        help="drop non-converged runs from the bounds instead of including "
        "them with a warning",
    )
    p.set_defaults(func=cmd_uncertainty)

    p = sub.add_parser("single", help="run one perturbed solve from a config")
    add_common(p)
    p.add_argument(
        "--solver-cmd", default=None,
        help="external solver command template with {config} placeholder",
    )
    p.set_defaults(func=cmd_single)

    p = sub.add_parser(
        "aggregate", help="rebuild reports from existing run directories"
    )
    add_common(p, with_config=False, with_uq=False)
    p.add_argument(
        "--format", choices=("json", "csv", "plot-data"), default="json",
        help="report format (default json)",
    )
    p.add_argument(
        "--exclude-nonconverged", action="store_true",
        help="drop non-converged runs from the bounds",
    )
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser(
        "demo", help="self-contained turbulent channel campaign with report"
    )
    add_common(p, with_config=False)
    p.add_argument(
        "--retau", type=_positive_float, default=180.0,
        help="friction Reynolds number (default 180)",
    )
    p.add_argument(
        "--quick", action="store_true",
        help="coarse 32-cell grid for a fast smoke run",
    )
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    if not logging.getLogger().handlers:
        logging.basicConfig(
            level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
        )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AggregationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EigenUQError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
