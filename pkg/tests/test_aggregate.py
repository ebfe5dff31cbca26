import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from eigenuq import (
    AggregationError,
    IntervalBound,
    IoError,
    ShapeError,
    emit_report,
    field_variability,
    interval_bounds,
    profile_envelope,
)

SCHEMA = json.loads(
    (Path(__file__).resolve().parents[1] / "src" / "eigenuq" / "report_schema.json")
    .read_text()
)

SAMPLE = {
    "baseline": 1.0,
    "1c": 1.4,
    "2c": 1.2,
    "3c": 0.7,
    "p1c1": 1.3,
    "p1c2": 0.9,
}


def sample_envelope():
    x = np.linspace(0.0, 1.0, 11)
    profiles = {
        "baseline": (x, x.copy()),
        "1c": (x, 2.0 * x),
        "3c": (x, 0.5 * x),
    }
    return profile_envelope(profiles, x)


class TestIntervalBounds:
    def test_documented_example(self):
        b = interval_bounds(SAMPLE, "baseline", qoi="lift")
        assert b.lower == 0.7
        assert b.upper == 1.4
        assert b.lower_run == "3c"
        assert b.upper_run == "1c"
        assert b.baseline_value == 1.0

    def test_missing_baseline(self):
        with pytest.raises(AggregationError):
            interval_bounds({"1c": 1.0, "2c": 2.0}, "baseline")

    def test_too_few_entries(self):
        with pytest.raises(AggregationError):
            interval_bounds({"baseline": 1.0}, "baseline")

    def test_nonfinite_value(self):
        vals = dict(SAMPLE)
        vals["1c"] = float("nan")
        with pytest.raises(AggregationError):
            interval_bounds(vals, "baseline")

    def test_tie_attributed_lexicographically(self):
        vals = {"baseline": 1.0, "zzz": 2.0, "aaa": 2.0, "mmm": 0.5}
        b = interval_bounds(vals, "baseline")
        assert b.upper_run == "aaa"

    def test_permutation_invariance(self, rng):
        names = ["baseline", "1c", "2c", "3c", "p1c1", "p1c2"]
        for _ in range(200):
            values = dict(zip(names, rng.uniform(-5, 5, len(names))))
            b1 = interval_bounds(values, "baseline")
            order = list(values)
            rng.shuffle(order)
            b2 = interval_bounds({n: values[n] for n in order}, "baseline")
            assert b1 == b2

    def test_baseline_containment_enforced(self):
        with pytest.raises(AggregationError):
            IntervalBound("q", 0.0, 1.0, "a", "b", "baseline", 2.0)


class TestProfileEnvelope:
    def test_band_contains_all_runs(self, rng):
        x = np.linspace(0, 1, 33)
        profiles = {
            f"r{i}": (x, rng.standard_normal(33)) for i in range(5)
        }
        env = profile_envelope(profiles, x)
        for name, vals in env.resampled.items():
            assert np.all(vals >= env.lower - 1e-12)
            assert np.all(vals <= env.upper + 1e-12)

    def test_resampling_linear(self):
        x = np.array([0.0, 1.0])
        grid = np.array([0.0, 0.25, 0.5, 1.0])
        env = profile_envelope({"a": (x, np.array([0.0, 4.0])),
                                "b": (x, np.array([4.0, 0.0]))}, grid)
        assert np.allclose(env.resampled["a"], [0, 1, 2, 4])
        assert np.allclose(env.lower, [0, 1, 2, 0])
        assert np.allclose(env.upper, [4, 3, 2, 4])

    def test_grid_outside_range(self):
        x = np.linspace(0.2, 0.8, 5)
        with pytest.raises(AggregationError):
            profile_envelope({"a": (x, x)}, np.linspace(0, 1, 5))

    def test_non_overlapping_profiles(self):
        a = np.linspace(0, 0.4, 5)
        b = np.linspace(0.6, 1.0, 5)
        with pytest.raises(AggregationError):
            profile_envelope({"a": (a, a), "b": (b, b)}, a)

    def test_decreasing_abscissa_rejected(self):
        x = np.array([1.0, 0.5, 0.0])
        with pytest.raises(AggregationError):
            profile_envelope({"a": (x, x)}, np.array([0.0, 1.0]))

    def test_union_monotone(self, rng):
        x = np.linspace(0, 1, 17)
        profiles = {f"r{i}": (x, rng.standard_normal(17)) for i in range(6)}
        small = {k: profiles[k] for k in list(profiles)[:3]}
        env_small = profile_envelope(small, x)
        env_all = profile_envelope(profiles, x)
        assert np.all(env_all.lower <= env_small.lower + 1e-15)
        assert np.all(env_all.upper >= env_small.upper - 1e-15)


class TestFieldVariability:
    def test_basic(self):
        v = field_variability([np.array([0.0, 1.0]), np.array([2.0, -1.0])])
        assert np.allclose(v.values, [2.0, 2.0])

    def test_single_field_is_zero(self):
        v = field_variability([np.array([3.0, 4.0])])
        assert np.allclose(v.values, 0.0)

    def test_nonnegative(self, rng):
        fields = [rng.standard_normal(50) for _ in range(8)]
        assert np.all(field_variability(fields).values >= 0.0)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            field_variability([np.zeros(3), np.zeros(4)])

    def test_empty(self):
        with pytest.raises(AggregationError):
            field_variability([])

    def test_scale_translation_laws(self, rng):
        fields = [rng.standard_normal(20) for _ in range(5)]
        v = field_variability(fields).values
        shifted = field_variability([f + 7.5 for f in fields]).values
        scaled = field_variability([-3.0 * f for f in fields]).values
        assert np.allclose(shifted, v, atol=1e-12)
        assert np.allclose(scaled, 3.0 * v, rtol=1e-12)


class TestEmitReport:
    def _inputs(self):
        bounds = [interval_bounds(SAMPLE, "baseline", qoi="c_f")]
        env = sample_envelope()
        var = field_variability(list(env.resampled.values()))
        meta = {
            "baseline": {"converged": True, "failed": False, "included": True,
                         "qoi": {"c_f": 1.0, "u_bulk": 2.0, "u_centerline": 3.0}},
            "1c": {"converged": False, "failed": False, "included": True,
                   "qoi": None},
        }
        return bounds, {"u": env}, {"u": var}, meta

    def test_json_valid_against_schema(self, tmp_path):
        bounds, envs, var, meta = self._inputs()
        paths = emit_report(bounds, envs, var, "json", tmp_path, runs_meta=meta)
        assert [p.name for p in paths] == ["report.json"]
        doc = json.loads(paths[0].read_text())
        jsonschema.validate(doc, SCHEMA)
        assert doc["intervals"][0]["lower_run"] == "3c"
        assert doc["runs"]["1c"]["converged"] is False

    def test_csv_layout(self, tmp_path):
        bounds, envs, var, meta = self._inputs()
        paths = emit_report(bounds, envs, var, "csv", tmp_path)
        names = sorted(p.name for p in paths)
        assert names == ["envelope_u.csv", "intervals.csv", "variability_u.csv"]
        lines = (tmp_path / "envelope_u.csv").read_text().splitlines()
        header = lines[0].split(",")
        assert header[:4] == ["abscissa", "lower", "upper", "baseline"]
        assert header[4:] == ["1c", "3c"]  # baseline not duplicated
        assert len(lines) == 1 + 11

    def test_plot_data_layout(self, tmp_path):
        bounds, envs, var, meta = self._inputs()
        emit_report(bounds, envs, var, "plot-data", tmp_path)
        lines = (tmp_path / "envelope_u.dat").read_text().splitlines()
        assert lines[0].startswith("# abscissa lower upper baseline")
        cols = lines[1].split()
        assert len(cols) == 6

    def test_full_precision(self, tmp_path):
        value = 1.0 / 3.0
        bounds = [interval_bounds({"baseline": value, "x": 1.0}, "baseline",
                                  qoi="q")]
        emit_report(bounds, {}, {}, "csv", tmp_path)
        text = (tmp_path / "intervals.csv").read_text()
        assert format(value, ".17g") in text

    def test_empty_aggregates(self, tmp_path):
        paths = emit_report([], {}, {}, "json", tmp_path)
        doc = json.loads(paths[0].read_text())
        jsonschema.validate(doc, SCHEMA)
        assert doc["intervals"] == []
        assert doc["envelopes"] == {}
        paths = emit_report([], {}, {}, "csv", tmp_path)
        assert [p.name for p in paths] == ["intervals.csv"]

    def test_reruns_byte_identical(self, tmp_path):
        bounds, envs, var, meta = self._inputs()
        a = tmp_path / "a"
        b = tmp_path / "b"
        for fmt in ("json", "csv", "plot-data"):
            pa = emit_report(bounds, envs, var, fmt, a, runs_meta=meta)
            pb = emit_report(bounds, envs, var, fmt, b, runs_meta=meta)
            for x, y in zip(pa, pb):
                assert x.read_bytes() == y.read_bytes()

    def test_unwritable_destination(self, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        bounds, envs, var, meta = self._inputs()
        with pytest.raises(IoError):
            emit_report(bounds, envs, var, "json", blocker / "out")

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report([], {}, {}, "xml", tmp_path)
