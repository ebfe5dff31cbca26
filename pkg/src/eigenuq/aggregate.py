"""Aggregation of campaign results into uncertainty bounds.

Scalar QoIs become intervals [min, max] over the run set with the
attaining runs named; profiles become pointwise envelopes after linear
resampling onto a common grid; per-cell fields become variability maps
(cellwise max minus min). These are possibility bounds, not confidence
intervals of any statistical significance.

Reports are deterministic: fixed field ordering, full-precision
numbers (17 significant digits in text formats, lossless shortest
round-trip in JSON), and no timestamps, so re-running aggregation on
the same inputs reproduces byte-identical files.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AggregationError, IoError, ShapeError

log = logging.getLogger(__name__)


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


@dataclass(frozen=True)
class IntervalBound:
    """Scalar QoI interval with end attribution."""

    qoi: str
    lower: float
    upper: float
    lower_run: str
    upper_run: str
    baseline_run: str
    baseline_value: float

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise AggregationError(
                f"{self.qoi}: lower bound {self.lower} exceeds upper {self.upper}"
            )
        if not self.lower <= self.baseline_value <= self.upper:
            raise AggregationError(
                f"{self.qoi}: baseline value {self.baseline_value} outside "
                f"[{self.lower}, {self.upper}]"
            )


@dataclass(frozen=True, eq=False)
class ProfileEnvelope:
    """Pointwise band over resampled profiles."""

    grid: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    resampled: dict

    def __post_init__(self):
        for a in (self.grid, self.lower, self.upper):
            a.flags.writeable = False


@dataclass(frozen=True, eq=False)
class VariabilityField:
    """Per-cell spread over realizations: max - min, nonnegative."""

    values: np.ndarray

    def __post_init__(self):
        self.values.flags.writeable = False


def interval_bounds(values: dict, baseline: str, qoi: str = "qoi") -> IntervalBound:
    """Exact min/max interval over the run map with end attribution.

    Needs at least two entries, one of which is the baseline. Tied
    extremes are attributed to the lexicographically first run name so
    the result is invariant to map ordering.
    """
    if baseline not in values:
        raise AggregationError(
            f"{qoi}: baseline run {baseline!r} missing from values "
            f"{sorted(values)}"
        )
    if len(values) < 2:
        raise AggregationError(
            f"{qoi}: need at least two runs including the baseline, "
            f"got {len(values)}"
        )
    for name, v in values.items():
        if not math.isfinite(float(v)):
            raise AggregationError(f"{qoi}: run {name!r} has non-finite value {v}")
    lower = min(values.values())
    upper = max(values.values())
    lower_run = min(n for n, v in values.items() if v == lower)
    upper_run = min(n for n, v in values.items() if v == upper)
    return IntervalBound(
        qoi=qoi,
        lower=float(lower),
        upper=float(upper),
        lower_run=lower_run,
        upper_run=upper_run,
        baseline_run=baseline,
        baseline_value=float(values[baseline]),
    )


def profile_envelope(profiles: dict, grid) -> ProfileEnvelope:
    """Resample every profile onto the grid and take the pointwise band.

    Each profile is an (abscissa, ordinate) pair with strictly
    increasing abscissa; the grid must lie within the range common to
    all profiles, otherwise extrapolation would fabricate bounds and an
    AggregationError is raised instead.
    """
    if not profiles:
        raise AggregationError("no profiles to envelope")
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 2:
        raise ShapeError(f"grid must be a 1-D array of >= 2 samples, got {grid.shape}")
    lo = -math.inf
    hi = math.inf
    cleaned = {}
    for name, (x, y) in profiles.items():
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if x.shape != y.shape or x.ndim != 1:
            raise ShapeError(
                f"profile {name!r}: abscissa {x.shape} and ordinate {y.shape} "
                "must be equal-length 1-D arrays"
            )
        if x.size < 2 or np.any(np.diff(x) <= 0.0):
            raise AggregationError(
                f"profile {name!r}: abscissa must be strictly increasing"
            )
        cleaned[name] = (x, y)
        lo = max(lo, float(x[0]))
        hi = min(hi, float(x[-1]))
    if lo > hi:
        raise AggregationError(
            f"profiles have non-overlapping abscissa ranges (common range "
            f"[{lo}, {hi}] is empty)"
        )
    slack = 1.0e-12 * max(1.0, abs(lo), abs(hi))
    if float(grid[0]) < lo - slack or float(grid[-1]) > hi + slack:
        raise AggregationError(
            f"grid [{grid[0]}, {grid[-1]}] extends beyond the common "
            f"abscissa range [{lo}, {hi}]"
        )
    resampled = {
        name: np.interp(grid, x, y) for name, (x, y) in cleaned.items()
    }
    stack = np.vstack(list(resampled.values()))
    return ProfileEnvelope(
        grid=grid.copy(),
        lower=stack.min(axis=0),
        upper=stack.max(axis=0),
        resampled=resampled,
    )


def field_variability(fields) -> VariabilityField:
    """Cellwise max - min over a list of equal-length scalar fields."""
    arrays = [np.asarray(f, dtype=np.float64) for f in fields]
    if not arrays:
        raise AggregationError("no fields to compare")
    shape = arrays[0].shape
    for i, a in enumerate(arrays):
        if a.shape != shape:
            raise ShapeError(
                f"field {i} has shape {a.shape}, expected {shape}"
            )
    stack = np.vstack([a.ravel() for a in arrays])
    v = (stack.max(axis=0) - stack.min(axis=0)).reshape(shape)
    return VariabilityField(values=v)


def _interval_dict(b: IntervalBound) -> dict:
    return {
        "qoi": b.qoi,
        "lower": b.lower,
        "upper": b.upper,
        "lower_run": b.lower_run,
        "upper_run": b.upper_run,
        "baseline_run": b.baseline_run,
        "baseline_value": b.baseline_value,
    }


def emit_report(
    bounds,
    envelopes: dict,
    variability: dict,
    fmt: str,
    directory,
    runs_meta: dict | None = None,
) -> list[Path]:
    """Write the aggregate report in one of three formats.

    json: a single report.json document (schema shipped with the
    package as report_schema.json). csv: intervals.csv plus one file
    per envelope with columns (abscissa, lower, upper, baseline, one
    column per run), plus one file per variability field. plot-data:
    the same content as whitespace-separated columns for generic
    plotting tools. Returns the written paths.
    """
    if fmt not in ("json", "csv", "plot-data"):
        raise ValueError(f"format must be json, csv, or plot-data, got {fmt!r}")
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"report destination not writable: {exc}") from exc
    bounds = sorted(bounds, key=lambda b: b.qoi)
    written: list[Path] = []

    def _write(path: Path, text: str) -> None:
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot write report file {path}: {exc}") from exc
        written.append(path)

    if fmt == "json":
        doc = {
            "schema_version": 1,
            "intervals": [_interval_dict(b) for b in bounds],
            "envelopes": {
                name: {
                    "grid": [float(v) for v in env.grid],
                    "lower": [float(v) for v in env.lower],
                    "upper": [float(v) for v in env.upper],
                    "runs": {
                        run: [float(v) for v in vals]
                        for run, vals in sorted(env.resampled.items())
                    },
                }
                for name, env in sorted(envelopes.items())
            },
            "variability": {
                name: [float(v) for v in vf.values.ravel()]
                for name, vf in sorted(variability.items())
            },
            "runs": {
                name: dict(sorted(meta.items()))
                for name, meta in sorted((runs_meta or {}).items())
            },
        }
        _write(directory / "report.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return written

    sep = "," if fmt == "csv" else " "
    ext = "csv" if fmt == "csv" else "dat"
    comment = "" if fmt == "csv" else "# "

    header = sep.join(
        ["qoi", "lower", "upper", "lower_run", "upper_run",
         "baseline_run", "baseline_value"]
    )
    lines = [comment + header]
    for b in bounds:
        lines.append(
            sep.join(
                [b.qoi, _fmt(b.lower), _fmt(b.upper), b.lower_run,
                 b.upper_run, b.baseline_run, _fmt(b.baseline_value)]
            )
        )
    _write(directory / f"intervals.{ext}", "\n".join(lines) + "\n")

    for name, env in sorted(envelopes.items()):
        runs = sorted(r for r in env.resampled if r != "baseline")
        baseline_col = (
            env.resampled["baseline"]
            if "baseline" in env.resampled
            else np.full(env.grid.shape, np.nan)
        )
        cols = ["abscissa", "lower", "upper", "baseline"] + list(runs)
        lines = [comment + sep.join(cols)]
        for i in range(env.grid.shape[0]):
            row = [
                _fmt(env.grid[i]),
                _fmt(env.lower[i]),
                _fmt(env.upper[i]),
                _fmt(baseline_col[i]),
            ] + [_fmt(env.resampled[r][i]) for r in runs]
            lines.append(sep.join(row))
        _write(directory / f"envelope_{name}.{ext}", "\n".join(lines) + "\n")

    for name, vf in sorted(variability.items()):
        lines = [comment + sep.join(["cell", "variability"])]
        for i, v in enumerate(vf.values.ravel()):
            lines.append(sep.join([str(i), _fmt(v)]))
        _write(directory / f"variability_{name}.{ext}", "\n".join(lines) + "\n")

    return written


def build_campaign_aggregates(
    results, baseline_name: str = "baseline", include_nonconverged: bool = True
):
    """Assemble interval bounds, the velocity-profile envelope, and the
    velocity variability field from a list of RunResults.

    Non-converged runs are included by default (with a loud warning and
    their flags recorded); pass include_nonconverged=False to drop them
    from the aggregates instead. Runs that produced no QoIs at all
    (launch failures) are never aggregated.

    Returns (bounds, envelopes, variability, runs_meta).
    """
    runs_meta: dict = {}
    usable: dict = {}
    for res in results:
        meta = {"converged": bool(res.converged), "failed": bool(res.failed)}
        included = res.qoi is not None and (include_nonconverged or res.converged)
        meta["included"] = bool(included)
        if res.qoi is not None:
            meta["qoi"] = {
                "c_f": float(res.qoi.c_f),
                "u_bulk": float(res.qoi.u_bulk),
                "u_centerline": float(res.qoi.u_centerline),
            }
        else:
            meta["qoi"] = None
        runs_meta[res.name] = meta
        if not res.converged and res.qoi is not None:
            if include_nonconverged:
                log.warning(
                    "run %s did not converge; its QoIs are included in the "
                    "bounds (pass the exclusion flag to drop it)",
                    res.name,
                )
            else:
                log.warning("run %s did not converge; excluded from bounds", res.name)
        if included:
            usable[res.name] = res.qoi

    if baseline_name not in usable:
        raise AggregationError(
            f"baseline run {baseline_name!r} is required for aggregation but "
            "is missing or unusable"
        )
    bounds = [
        interval_bounds(
            {name: getattr(q, attr) for name, q in usable.items()},
            baseline_name,
            qoi=attr,
        )
        for attr in ("c_f", "u_bulk", "u_centerline")
    ]
    grid = usable[baseline_name].y
    envelope = profile_envelope(
        {name: (q.y, q.u) for name, q in usable.items()}, grid
    )
    variability = field_variability(
        [envelope.resampled[name] for name in sorted(envelope.resampled)]
    )
    return bounds, {"u": envelope}, {"u": variability}, runs_meta
