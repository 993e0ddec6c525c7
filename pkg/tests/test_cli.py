import dataclasses
import json
import math

import numpy as np
import pytest

from cgl3d import cli, etdrk4, io, runner
from cgl3d.config import RunConfig
from cgl3d.linear_theory import CutoffP, SolvabilityError, build_P


def write_cfg(path, **kw):
    path.write_text("".join(f"{k} = {v}\n" for k, v in kw.items()))
    return str(path)


class TestSelftest:
    def test_clean_build_passes(self, capsys):
        assert cli.main(["selftest"]) == 0
        assert "FAIL" not in capsys.readouterr().out

    def test_corrupted_coefficients_fail(self, monkeypatch, capsys):
        good = etdrk4.phi_coeffs

        def corrupted(*args, **kw):
            c = good(*args, **kw)
            return dataclasses.replace(c, f1=c.f1 * 1.01)

        monkeypatch.setattr(etdrk4, "phi_coeffs", corrupted)
        assert cli.main(["selftest"]) != 0
        assert "FAIL" in capsys.readouterr().out


class TestRun:
    def test_unperturbed_run(self, tmp_path):
        cfg = write_cfg(tmp_path / "c.cfg", n=32, T=20, epsilon=0.0, snapshot_every=10)
        out = tmp_path / "out"
        assert cli.main(["run", "--config", cfg, "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["diagnostics"]["m_phi"] is None
        assert report["diagnostics"]["max_abs_u_minus_1"] <= 1e-10
        assert set(report) == {"config", "diagnostics", "prediction", "timings"}
        final = io.read_snapshot(out / "final")
        assert np.abs(final.values - 1).max() <= 1e-10
        assert sorted(p.name for p in (out / "snapshots").glob("*.meta")) == [
            "snap_000010.meta", "snap_000020.meta"]
        header = (out / "profiles.csv").read_text().splitlines()[0]
        assert header == "r,phi,S,ln_r,ln_abs_phi,phi_raw"
        for name in ("phase.png", "amplitude.png", "profiles.gp"):
            assert (out / name).stat().st_size > 0

    def test_determinism_and_reload(self, tmp_path):
        cfg = write_cfg(tmp_path / "c.cfg", n=32, T=30, snapshot_every=0)
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli.main(["run", "--config", cfg, "--out", str(a)]) == 0
        assert cli.main(["run", "--config", cfg, "--out", str(b)]) == 0
        assert (a / "final.dat").read_bytes() == (b / "final.dat").read_bytes()
        # diagnosing the reloaded state reproduces the in-memory report
        d = tmp_path / "d"
        assert cli.main(["diagnose", "--snapshot", str(a / "final.meta"), "--out", str(d)]) == 0
        ra = json.loads((a / "report.json").read_text())
        rd = json.loads((d / "report.json").read_text())
        assert ra["diagnostics"] == rd["diagnostics"]
        for key in ("n", "l", "alpha", "gamma", "epsilon", "inhomogeneity", "fit_window"):
            assert ra["config"][key] == rd["config"][key]
        # the echoed config re-runs the experiment exactly
        echo = tmp_path / "echo.cfg"
        echo.write_text((a / "config.txt").read_text())
        assert cli.main(["run", "--config", str(echo), "--out", str(tmp_path / "e")]) == 0
        assert (tmp_path / "e" / "final.dat").read_bytes() == (a / "final.dat").read_bytes()

    def test_threads_flag(self, tmp_path):
        cfg = write_cfg(tmp_path / "c.cfg", n=32, T=5, snapshot_every=0)
        assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "o"), "--threads", "2"]) == 0
        assert cli.main(["run", "--config", cfg, "--threads", "0"]) == 2


class TestDiagnose:
    def test_synthetic_point_source(self, tmp_path):
        cfg = RunConfig(n=64, T=0.0)
        P, _ = build_P(CutoffP(), cfg.grid)
        runner.write_state(tmp_path / "syn", np.exp(0.13j * P), cfg, 0.0, 0)
        out = tmp_path / "out"
        assert cli.main(["diagnose", "--snapshot", str(tmp_path / "syn"), "--out", str(out)]) == 0
        d = json.loads((out / "report.json").read_text())["diagnostics"]
        assert d["m_phi"] == pytest.approx(-1.0, abs=0.02)
        assert d["m_phi_raw"] == pytest.approx(-1.0, abs=1e-9)

    def test_constant_state(self, tmp_path):
        cfg = RunConfig(n=32, T=0.0)
        runner.write_state(tmp_path / "one", np.ones(cfg.grid.shape, complex), cfg, 0.0, 0)
        out = tmp_path / "out"
        assert cli.main(["diagnose", "--snapshot", str(tmp_path / "one"), "--out", str(out)]) == 0
        rows = (out / "profiles.csv").read_text().splitlines()[1:]
        assert all(float(r.split(",")[1]) == 0.0 for r in rows)

    def test_grid_mismatch(self, tmp_path):
        cfg = RunConfig(n=32, T=0.0)
        runner.write_state(tmp_path / "one", np.ones(cfg.grid.shape, complex), cfg, 0.0, 0)
        c = write_cfg(tmp_path / "c.cfg", n=64)
        assert cli.main(["diagnose", "--config", c, "--snapshot", str(tmp_path / "one")]) == 5


class TestPredict:
    def test_writes_first_order(self, tmp_path):
        c = write_cfg(tmp_path / "c.cfg", n=32, inhomogeneity="radial_power a=2.0")
        out = tmp_path / "p"
        assert cli.main(["predict", "--config", c, "--out", str(out)]) == 0
        pred = json.loads((out / "prediction.json").read_text())["prediction"]
        assert pred["c1"] == pytest.approx(math.pi / 24, rel=1e-14)
        assert pred["linear_residual"] <= 1e-8
        s1 = io.read_snapshot(out / "first_order_s1")
        assert s1.values.dtype == np.float64 and s1.meta["c1"] == pred["c1_box"]

    def test_zero_forcing(self, tmp_path):
        path = tmp_path / "zero.dat"
        np.zeros(32**3).astype("<f8").tofile(path)
        c = write_cfg(tmp_path / "c.cfg", n=32, inhomogeneity=f"grid_sample path={path}")
        out = tmp_path / "p"
        assert cli.main(["predict", "--config", c, "--out", str(out)]) == 0
        pred = json.loads((out / "prediction.json").read_text())["prediction"]
        assert pred["c1"] == 0 and pred["c1_box"] == 0
        assert not io.read_snapshot(out / "first_order_phi1").values.any()


class TestExitCodes:
    def test_config_error(self, tmp_path):
        assert cli.main(["run", "--config", write_cfg(tmp_path / "c.cfg", n=48)]) == 2
        assert cli.main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2
        assert cli.main(["diagnose"]) == 2

    def test_blow_up(self, tmp_path, capsys):
        # the unshifted split is unstable at h = 1
        c = write_cfg(tmp_path / "c.cfg", n=16, T=200, split_damping=0, snapshot_every=0)
        assert cli.main(["run", "--config", c, "--out", str(tmp_path / "o")]) == 3
        assert "blow-up at step" in capsys.readouterr().err

    def test_solvability(self, tmp_path, monkeypatch):
        def failing(*args, **kw):
            raise SolvabilityError("mean residual too large")

        monkeypatch.setattr(runner, "solve_first_order", failing)
        c = write_cfg(tmp_path / "c.cfg", n=16)
        assert cli.main(["predict", "--config", c, "--out", str(tmp_path / "p")]) == 4

    def test_io_error(self, tmp_path):
        assert cli.main(["diagnose", "--snapshot", str(tmp_path / "none")]) == 5
        blocker = tmp_path / "file"
        blocker.write_text("x")
        c = write_cfg(tmp_path / "c.cfg", n=16, T=1)
        assert cli.main(["run", "--config", c, "--out", str(blocker / "sub")]) == 5
