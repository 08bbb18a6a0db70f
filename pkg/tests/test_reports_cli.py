"""Config parsing, report generation, file emission, CLI exit codes."""

import copy
import json
import os
import math
import subprocess
import sys

import numpy as np
import pytest

from mixneu import (ConfigError, HypothesisViolationError, MixneuError,
                    NumericalError, config_from_dict, config_to_dict, emit,
                    load_config, parse_report, run)

BASE = {
    "task": "solve-eigen",
    "geometry": {"a": 0.0, "b": 1.0, "n_in": 16, "R": 1.0, "n_col": 4},
    "operator": {"alpha": 1.0, "beta": 1.0, "s": 0.5},
    "weight": {"breakpoints": [0.25], "values": [1.0, -1.0]},
    "eigencounts": {"k_pos": 2, "k_neg": 2},
    "seed": 3,
}


def cfg_dict(**overrides):
    d = copy.deepcopy(BASE)
    d.update(overrides)
    return d


def write_cfg(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def run_cli(task, cfg_path, out_dir, *extra):
    return subprocess.run(
        [sys.executable, "-m", "mixneu.cli", task,
         "--config", str(cfg_path), "--out", str(out_dir), *extra],
        capture_output=True, text=True)


class TestConfigParsing:
    def test_minimal_valid(self):
        cfg = config_from_dict(cfg_dict())
        assert cfg.task == "solve-eigen"
        assert cfg.k_pos == 2 and cfg.k_neg == 2
        assert cfg.q == math.inf      # default
        assert cfg.seed == 3

    @pytest.mark.parametrize("mutate", [
        lambda d: d.update(extra=1),
        lambda d: d["geometry"].update(extra=1),
        lambda d: d["operator"].update(extra=1),
        lambda d: d["weight"].update(extra=1),
        lambda d: d["eigencounts"].update(extra=1),
    ])
    def test_unknown_keys_rejected(self, mutate):
        d = cfg_dict()
        mutate(d)
        with pytest.raises(ConfigError):
            config_from_dict(d)

    @pytest.mark.parametrize("drop", ["task", "geometry", "operator"])
    def test_missing_keys_rejected(self, drop):
        d = cfg_dict()
        del d[drop]
        with pytest.raises(ConfigError):
            config_from_dict(d)

    def test_q_inf_spelling(self):
        cfg = config_from_dict(cfg_dict(q="inf"))
        assert cfg.q == math.inf
        cfg = config_from_dict(cfg_dict(q=4.0))
        assert cfg.q == 4.0
        with pytest.raises(ConfigError):
            config_from_dict(cfg_dict(q="huge"))

    @pytest.mark.parametrize("seed", [-1, 2 ** 64, 1.5, True, "7"])
    def test_seed_bounds(self, seed):
        with pytest.raises(ConfigError):
            config_from_dict(cfg_dict(seed=seed))

    def test_bad_task(self):
        with pytest.raises(ConfigError):
            config_from_dict(cfg_dict(task="eigensolve"))

    def test_bad_geometry_caught_at_parse(self):
        d = cfg_dict()
        d["geometry"]["n_in"] = 1
        with pytest.raises(ConfigError):
            config_from_dict(d)

    def test_bad_params_caught_at_parse(self):
        d = cfg_dict()
        d["operator"]["s"] = 1.5
        with pytest.raises(ConfigError):
            config_from_dict(d)

    def test_source_required_for_solve_source(self):
        d = cfg_dict(task="solve-source")
        with pytest.raises(ConfigError):
            config_from_dict(d)
        d["source"] = {"breakpoints": [0.5], "values": [1.0, -1.0]}
        assert config_from_dict(d).task == "solve-source"

    def test_verify_needs_finite_q(self):
        d = cfg_dict(task="verify")
        with pytest.raises(ConfigError):
            config_from_dict(d)          # q defaults to inf
        d["q"] = 4.0
        assert config_from_dict(d).q == 4.0

    def test_convergence_section_rules(self):
        d = cfg_dict(task="convergence")
        with pytest.raises(ConfigError):
            config_from_dict(d)          # sweep missing
        d["convergence"] = {"n_in": [16, 32, 64]}
        assert config_from_dict(d).n_in_sweep == (16, 32, 64)
        d["convergence"] = {"n_in": [16]}
        with pytest.raises(ConfigError):
            config_from_dict(d)          # needs at least two sizes
        d = cfg_dict()
        d["convergence"] = {"n_in": [16, 32]}
        with pytest.raises(ConfigError):
            config_from_dict(d)          # sweep only valid for the task

    def test_echo_round_trip(self):
        d = cfg_dict(q=4.0, diagnostic=True)
        cfg = config_from_dict(d)
        echoed = config_to_dict(cfg)
        assert config_from_dict(echoed) == cfg

    def test_load_config_errors(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(bad)

    def test_load_config_overrides(self, tmp_path):
        path = write_cfg(tmp_path, cfg_dict())
        cfg = load_config(path, seed_override=99)
        assert cfg.seed == 99
        with pytest.raises(ConfigError):
            load_config(path, task_override="audit")


class TestRunAndEmit:
    def test_solve_eigen_report(self, tmp_path):
        cfg = config_from_dict(cfg_dict())
        report = run(cfg)
        files = emit(report, tmp_path)
        assert sorted(os.path.basename(p) for p in files) == [
            "degiorgi.csv", "eigenfunctions.csv", "report.json",
            "residuals.csv", "spectrum.csv"]
        rows = (tmp_path / "spectrum.csv").read_text().strip().splitlines()
        header, body = rows[0], rows[1:]
        assert header.startswith("index,")
        # lambda_0 row present with value 0 within tolerance
        by_index = {int(r.split(",")[0]): float(r.split(",")[1]) for r in body}
        lam_max = max(abs(v) for v in by_index.values())
        assert abs(by_index[0]) <= 1e-9 * lam_max
        assert set(by_index) == {-2, -1, 0, 1, 2}

    def test_eigenfunction_rows_match_nodes(self, tmp_path):
        cfg = config_from_dict(cfg_dict())
        report = run(cfg)
        emit(report, tmp_path)
        rows = (tmp_path / "eigenfunctions.csv").read_text().strip().splitlines()
        n_nodes = cfg.mesh().n_nodes
        assert len(rows) == 1 + n_nodes
        assert rows[0].split(",")[:2] == ["node", "x"]

    def test_report_json_round_trip(self, tmp_path):
        cfg = config_from_dict(cfg_dict())
        report = run(cfg)
        emit(report, tmp_path)
        parsed = parse_report(tmp_path / "report.json")
        assert parsed == report

    def test_audit_header_only_tables(self, tmp_path):
        cfg = config_from_dict(cfg_dict(task="audit"))
        report = run(cfg)
        emit(report, tmp_path)
        for name in ("spectrum.csv", "eigenfunctions.csv", "residuals.csv",
                     "degiorgi.csv"):
            lines = (tmp_path / name).read_text().splitlines()
            assert len(lines) == 1, f"{name} should be header-only"
        audits = {a["name"]: a for a in report.audits}
        assert set(audits) == {"mediant", "truncation", "product",
                               "decomposition"}
        assert all(a["violations"] == 0 for a in audits.values())

    def test_audit_determinism(self, tmp_path):
        cfg = config_from_dict(cfg_dict(task="audit", seed=42))
        out1, out2 = tmp_path / "one", tmp_path / "two"
        emit(run(cfg), out1)
        emit(run(cfg), out2)
        for name in ("report.json", "spectrum.csv", "eigenfunctions.csv",
                     "residuals.csv", "degiorgi.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_convergence_task(self, tmp_path):
        d = cfg_dict(task="convergence")
        d["operator"] = {"alpha": 1.0, "beta": 0.0, "s": 0.5}
        d["weight"] = {"values": [1.0]}
        d["diagnostic"] = True
        d["convergence"] = {"n_in": [16, 32, 64, 128]}
        report = run(config_from_dict(d))
        entries = report.convergence["entries"]
        assert [e["n_in"] for e in entries] == [16, 32, 64, 128]
        for order in report.convergence["orders"]:
            assert order == pytest.approx(2.0, abs=0.3)

    def test_solve_source_task(self, tmp_path):
        d = cfg_dict(task="solve-source")
        d["source"] = {"breakpoints": [0.5], "values": [1.0, -1.0]}
        report = run(config_from_dict(d))
        assert report.source["residual"] <= 1e-10
        assert abs(report.source["interval_mean"]) <= 1e-10
        emit(report, tmp_path)
        rows = (tmp_path / "eigenfunctions.csv").read_text().splitlines()
        assert rows[0].rstrip().endswith("u[source]")

    def test_verify_task(self, tmp_path):
        d = cfg_dict(task="verify", q=4.0)
        report = run(config_from_dict(d))
        assert report.poincare > 0
        assert report.degiorgi["converged"]
        names = {a["name"] for a in report.audits}
        assert "poincare" in names and "rayleigh-min" in names
        emit(report, tmp_path)
        ladder_rows = (tmp_path / "degiorgi.csv").read_text().splitlines()
        assert len(ladder_rows) > 1


class TestCli:
    def test_success_exit_zero(self, tmp_path):
        path = write_cfg(tmp_path, cfg_dict())
        proc = run_cli("solve-eigen", path, tmp_path / "out")
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "out" / "report.json").exists()

    def test_task_mismatch_is_config_error(self, tmp_path):
        path = write_cfg(tmp_path, cfg_dict())
        proc = run_cli("audit", path, tmp_path / "out")
        assert proc.returncode == 2
        assert "error[" in proc.stderr

    def test_config_error_exit_two(self, tmp_path):
        path = write_cfg(tmp_path, cfg_dict(extra_key=1))
        proc = run_cli("solve-eigen", path, tmp_path / "out")
        assert proc.returncode == 2

    def test_hypothesis_violation_exit_three(self, tmp_path):
        d = cfg_dict()
        d["weight"] = {"values": [1.0]}   # m- vanishes, diagnostic off
        path = write_cfg(tmp_path, d)
        proc = run_cli("solve-eigen", path, tmp_path / "out")
        assert proc.returncode == 3
        assert "error[DegenerateWeightError]" in proc.stderr

    def test_seed_override_changes_echo(self, tmp_path):
        path = write_cfg(tmp_path, cfg_dict(task="audit", seed=1))
        p1 = run_cli("audit", path, tmp_path / "a")
        p2 = run_cli("audit", path, tmp_path / "b", "--seed", "2")
        assert p1.returncode == 0 and p2.returncode == 0
        r1 = json.loads((tmp_path / "a" / "report.json").read_text())
        r2 = json.loads((tmp_path / "b" / "report.json").read_text())
        assert r1["config"]["seed"] == 1
        assert r2["config"]["seed"] == 2

    def test_exit_code_mapping(self):
        assert ConfigError("x").exit_code == 2
        assert HypothesisViolationError("x").exit_code == 3
        assert NumericalError("x").exit_code == 4
        assert MixneuError("x").exit_code == 1
