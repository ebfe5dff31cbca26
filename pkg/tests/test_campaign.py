from pathlib import Path

import pytest

from eigenuq import (
    BuiltinChannelSolver,
    ConfigError,
    ExternalCommandSolver,
    InvalidMagnitude,
    IoError,
    LaunchError,
    UqConfig,
    emit_config,
    external_solver_exec,
    parse_config,
    plan_campaign,
    run_campaign,
)
from eigenuq.campaign import (
    SOLUTION_FILENAME,
    TABLE_RUNS,
    channel_params_from_config,
)

FIVE_LINES = (
    "USING_UQ= YES\n"
    "UQ_COMPONENT= 1\n"
    "UQ_PERMUTE= NO\n"
    "UQ_URLX= 0.1\n"
    "UQ_DELTA_B= 1.0\n"
)

QUICK_KEYS = {"RETAU": "180.0", "GRID_CELLS": "32", "GRID_STRETCHING": "1.15"}


class TestParse:
    def test_reference_listing(self):
        c = parse_config(FIVE_LINES)
        assert c.using_uq is True
        assert c.uq_component == 1
        assert c.uq_permute is False
        assert c.uq_urlx == 0.1
        assert c.uq_delta_b == 1.0

    def test_defaults_without_uq_keys(self):
        c = parse_config("")
        assert c.using_uq is False
        assert c.uq_component == 1
        assert c.uq_urlx == 0.1
        assert c.uq_delta_b == 1.0

    def test_comments_and_blank_lines(self):
        c = parse_config("% a comment\n\nUSING_UQ= YES  % trailing\n")
        assert c.using_uq is True

    def test_case_insensitive_yes_no(self):
        assert parse_config("USING_UQ= yes\n").using_uq is True
        assert parse_config("UQ_PERMUTE= No\n").uq_permute is False

    def test_whitespace_tolerant(self):
        c = parse_config("  UQ_COMPONENT =  2 \n")
        assert c.uq_component == 2

    def test_bad_boolean(self):
        with pytest.raises(ConfigError) as e:
            parse_config("USING_UQ= MAYBE\n")
        assert "line 1" in str(e.value)

    def test_bad_component(self):
        with pytest.raises(ConfigError) as e:
            parse_config("X= 1\nUQ_COMPONENT= 4\n")
        assert "line 2" in str(e.value)

    def test_bad_urlx_range(self):
        with pytest.raises(ConfigError):
            parse_config("UQ_URLX= 1.5\n")
        with pytest.raises(ConfigError):
            parse_config("UQ_DELTA_B= -0.2\n")

    def test_malformed_line(self):
        with pytest.raises(ConfigError) as e:
            parse_config("JUST_A_KEY_NO_EQUALS\n")
        assert "line 1" in str(e.value)

    def test_unknown_keys_preserved(self):
        c = parse_config("MARKER= anything goes here\n")
        assert c.passthrough["MARKER"] == "anything goes here"

    def test_duplicate_keeps_last_value(self):
        c = parse_config("RETAU= 100\nRETAU= 200\n")
        assert c.passthrough["RETAU"] == "200"

    def test_low_urlx_warns(self, caplog):
        import logging

        with caplog.at_level(logging.WARNING, logger="eigenuq.campaign"):
            parse_config("UQ_URLX= 0.01\n")
        assert any("under-relaxation" in m or "urlx" in m.lower()
                   for m in caplog.messages)


class TestEmit:
    def test_roundtrip_identity(self):
        c1 = parse_config(FIVE_LINES)
        text = emit_config(c1)
        assert parse_config(text) == c1
        assert emit_config(parse_config(text)) == text

    def test_reference_listing_unchanged(self):
        assert emit_config(parse_config(FIVE_LINES)) == FIVE_LINES

    def test_override_component(self):
        c = parse_config(FIVE_LINES)
        text = emit_config(c, {"uq_component": 2})
        assert "UQ_COMPONENT= 2" in text

    def test_passthrough_order_preserved(self):
        text = "ZKEY= 1\nAKEY= 2\nUSING_UQ= YES\n"
        out = emit_config(parse_config(text))
        assert out.index("ZKEY") < out.index("AKEY") < out.index("USING_UQ")


class TestPlan:
    def test_canonical_layout(self, tmp_path):
        c = parse_config(FIVE_LINES)
        plan = plan_campaign(c, include_baseline=True, n=2, output_root=tmp_path)
        names = [r.name for r in plan.runs]
        assert names == ["baseline", "1c", "2c", "3c", "p1c1", "p1c2"]
        assert plan.nprocs == 2
        assert plan.runs[0].spec is None
        specs = {r.name: r.spec for r in plan.runs if r.spec is not None}
        for name, component, permute in TABLE_RUNS:
            assert int(specs[name].component) == component
            assert specs[name].permute is permute
        assert all(r.directory == tmp_path / r.name for r in plan.runs)

    def test_without_baseline(self, tmp_path):
        c = parse_config(FIVE_LINES)
        plan = plan_campaign(c, include_baseline=False, n=1, output_root=tmp_path)
        assert [r.name for r in plan.runs] == ["1c", "2c", "3c", "p1c1", "p1c2"]

    def test_specs_carry_config_settings(self, tmp_path):
        c = parse_config("USING_UQ= YES\nUQ_URLX= 0.4\nUQ_DELTA_B= 0.6\n")
        plan = plan_campaign(c, include_baseline=False, n=1, output_root=tmp_path)
        assert all(r.spec.urlx == 0.4 for r in plan.runs)
        assert all(r.spec.delta_b == 0.6 for r in plan.runs)

    def test_invalid_parallelism(self, tmp_path):
        with pytest.raises(InvalidMagnitude):
            plan_campaign(parse_config(""), True, 0, tmp_path)


class TestBuiltinSolver:
    def test_campaign_produces_artifacts(self, tmp_path):
        c = UqConfig(using_uq=True, passthrough=dict(QUICK_KEYS))
        plan = plan_campaign(c, include_baseline=True, n=1, output_root=tmp_path)
        solver = BuiltinChannelSolver(channel_params_from_config(c))
        results = run_campaign(plan, solver)
        assert [r.name for r in results] == [r.name for r in plan.runs]
        for r in results:
            assert r.converged and not r.failed
            assert r.qoi is not None
            assert (tmp_path / r.name / SOLUTION_FILENAME).is_file()
            assert (tmp_path / r.name / "config.cfg").is_file()

    def test_run_config_documents_perturbation(self, tmp_path):
        c = UqConfig(using_uq=True, passthrough=dict(QUICK_KEYS))
        plan = plan_campaign(c, include_baseline=True, n=1, output_root=tmp_path)
        run_campaign(plan, BuiltinChannelSolver(channel_params_from_config(c)))
        base_cfg = (tmp_path / "baseline" / "config.cfg").read_text()
        assert "USING_UQ= NO" in base_cfg
        p1c2_cfg = (tmp_path / "p1c2" / "config.cfg").read_text()
        assert "UQ_COMPONENT= 2" in p1c2_cfg
        assert "UQ_PERMUTE= YES" in p1c2_cfg

    def test_parallel_matches_sequential(self, tmp_path):
        c = UqConfig(using_uq=True, passthrough=dict(QUICK_KEYS))
        solver = BuiltinChannelSolver(channel_params_from_config(c))
        seq = run_campaign(
            plan_campaign(c, True, 1, tmp_path / "seq"), solver, mode="sequential"
        )
        par = run_campaign(
            plan_campaign(c, True, 3, tmp_path / "par"), solver, mode="parallel"
        )
        assert [r.name for r in par] == [r.name for r in seq]
        for a, b in zip(seq, par):
            assert a.qoi.u_bulk == pytest.approx(b.qoi.u_bulk, abs=1e-15)

    def test_bad_mode(self, tmp_path):
        c = UqConfig(passthrough=dict(QUICK_KEYS))
        plan = plan_campaign(c, True, 1, tmp_path)
        with pytest.raises(ValueError):
            run_campaign(plan, BuiltinChannelSolver(), mode="distributed")

    def test_failure_isolated(self, tmp_path):
        # a solver that explodes on one run must not take down the rest
        c = UqConfig(using_uq=True, passthrough=dict(QUICK_KEYS))
        inner = BuiltinChannelSolver(channel_params_from_config(c))

        class Flaky:
            def execute(self, run, config, config_path):
                if run.name == "2c":
                    raise RuntimeError("synthetic blowup")
                return inner.execute(run, config, config_path)

        plan = plan_campaign(c, True, 1, tmp_path)
        results = run_campaign(plan, Flaky())
        by_name = {r.name: r for r in results}
        assert by_name["2c"].failed
        assert isinstance(by_name["2c"].error, RuntimeError)
        assert all(r.converged for n, r in by_name.items() if n != "2c")

    def test_unwritable_root(self, tmp_path):
        # a regular file where a directory is needed fails regardless of uid
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        c = UqConfig(passthrough=dict(QUICK_KEYS))
        plan = plan_campaign(c, True, 1, blocker / "out")
        with pytest.raises(IoError):
            run_campaign(plan, BuiltinChannelSolver())


class TestChannelParamsFromConfig:
    def test_recognized_keys(self):
        c = UqConfig(passthrough={"RETAU": "395", "GRID_CELLS": "64",
                                  "GRID_STRETCHING": "1.08"})
        p = channel_params_from_config(c)
        assert p.retau == 395.0
        assert p.n_cells == 64
        assert p.stretching == 1.08

    def test_bad_value(self):
        with pytest.raises(ConfigError):
            channel_params_from_config(UqConfig(passthrough={"RETAU": "fast"}))

    def test_unrecognized_keys_ignored(self):
        p = channel_params_from_config(UqConfig(passthrough={"SOLVER": "SA"}))
        assert p.retau == 180.0


def _write_script(path: Path, body: str) -> Path:
    path.write_text("#!/bin/sh\n" + body)
    path.chmod(0o755)
    return path


class TestExternalSolver:
    def test_template_requires_config(self):
        with pytest.raises(ConfigError):
            ExternalCommandSolver("mpirun -n {np} solver")

    def test_unknown_placeholder(self, tmp_path):
        cfg = tmp_path / "config.cfg"
        cfg.write_text("")
        with pytest.raises(ConfigError):
            external_solver_exec("solve {config} {bogus}", cfg, 1)

    def test_happy_path(self, tmp_path):
        script = _write_script(
            tmp_path / "solver.sh",
            'echo "solving $1 with $2 ranks"\n',
        )
        cfg = tmp_path / "run" / "config.cfg"
        cfg.parent.mkdir()
        cfg.write_text("USING_UQ= NO\n")
        res = external_solver_exec(f"{script} {{config}} {{np}}", cfg, 4)
        assert not res.failed
        out = (tmp_path / "run" / "solver_stdout.log").read_text()
        assert "with 4 ranks" in out
        assert str(cfg.resolve()) in out

    def test_solution_picked_up(self, tmp_path):
        script = _write_script(
            tmp_path / "solver.sh",
            "cat > {dir}/solution.dat <<'EOF'\n"
            "# converged=True\n"
            "# y u nu_t k R_xx R_yy R_zz R_xy P\n"
            "0 0 0 0 0 0 0 0 0\n"
            "1 3 0 0 0 0 0 0 0\n"
            "EOF\n".replace("{dir}", "$(dirname $1)"),
        )
        cfg = tmp_path / "run" / "config.cfg"
        cfg.parent.mkdir()
        cfg.write_text("")
        res = external_solver_exec(f"{script} {{config}}", cfg, 1)
        assert res.qoi is not None
        assert res.qoi.u_bulk == pytest.approx(1.5)
        assert res.converged

    def test_nonzero_exit_recorded(self, tmp_path):
        script = _write_script(tmp_path / "solver.sh", "exit 3\n")
        cfg = tmp_path / "run" / "config.cfg"
        cfg.parent.mkdir()
        cfg.write_text("")
        res = external_solver_exec(f"{script} {{config}}", cfg, 1)
        assert res.failed
        assert "status 3" in str(res.error)

    def test_missing_executable(self, tmp_path):
        cfg = tmp_path / "run" / "config.cfg"
        cfg.parent.mkdir()
        cfg.write_text("")
        res = external_solver_exec("/nonexistent/solver {config}", cfg, 1)
        assert res.failed
        assert isinstance(res.error, LaunchError)

    def test_dir_placeholder(self, tmp_path):
        script = _write_script(tmp_path / "solver.sh", 'echo "dir=$2"\n')
        cfg = tmp_path / "run" / "config.cfg"
        cfg.parent.mkdir()
        cfg.write_text("")
        res = external_solver_exec(f"{script} {{config}} {{dir}}", cfg, 1)
        assert not res.failed
        out = (tmp_path / "run" / "solver_stdout.log").read_text()
        assert str((tmp_path / "run").resolve()) in out
