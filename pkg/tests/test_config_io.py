import numpy as np
import pytest

from cgl3d import config, io
from cgl3d.config import ConfigError, RunConfig, parse_inhomogeneity
from cgl3d.model import Anisotropic, GridSample, RadialPower


class TestConfig:
    def test_defaults_mirror_reference_run(self):
        cfg = RunConfig()
        assert (cfg.n, cfg.l, cfg.h, cfg.T) == (64, 40.0, 1.0, 500.0)
        assert (cfg.alpha, cfg.gamma, cfg.epsilon) == (1.0, 5.0, 0.5)
        assert cfg.fit_window == (5.0, 15.0)
        assert cfg.contour_points == 32 and cfg.contour_radius == 1.0
        assert cfg.steps == 500
        assert cfg.delta() == pytest.approx(0.45)

    def test_parse_text(self):
        text = """
        # reference run at desk scale
        n = 32
        T = 20   # short
        inhomogeneity = anisotropic exponent=1.6 center=10,10,10 coeffs=0.25,2,1
        dealias = true
        fit_window = 4,12
        """
        cfg = RunConfig(**config.parse_text(text))
        assert cfg.n == 32 and cfg.T == 20.0 and cfg.dealias is True
        assert cfg.fit_window == (4.0, 12.0)
        assert cfg.spec == Anisotropic(1.6, (10.0, 10.0, 10.0), (0.25, 2.0, 1.0))

    def test_text_round_trip(self):
        cfg = RunConfig(n=32, T=12.0, epsilon=-0.05, inhomogeneity="radial_power a=1.6",
                        amplitude_delta="0.3")
        assert RunConfig(**config.parse_text(cfg.to_text())) == cfg

    @pytest.mark.parametrize("text", [
        "n = 48", "n = 64\nbogus = 1", "alpha = 1\ngamma = -1", "T = 10.5",
        "fit_window = 5,25", "fit_window = 5", "dealias = maybe", "n = sixty",
        "inhomogeneity = radial_power a=1.0", "inhomogeneity = blob a=2",
        "inhomogeneity = radial_power", "contour_points = 8", "cutoff_r1 = 12",
        "amplitude_delta = lots", "h = nan", "just a line",
    ])
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            RunConfig(**config.parse_text(text))

    def test_env_overrides(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("n = 32\nepsilon = 0.5\n")
        cfg = config.load(path, env={"CGL3D_EPSILON": "-0.25", "CGL3D_T": "10"})
        assert cfg.n == 32 and cfg.epsilon == -0.25 and cfg.T == 10.0
        assert config.load(path, env={}, n=16).n == 16

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            config.load(tmp_path / "nope.cfg", env={})

    def test_grid_sample(self, tmp_path):
        vals = np.random.default_rng(0).random((16, 16, 16))
        path = tmp_path / "g.dat"
        vals.astype("<f8").tofile(path)
        spec = parse_inhomogeneity(f"grid_sample path={path}", 16)
        assert isinstance(spec, GridSample) and np.array_equal(spec.values, vals)
        with pytest.raises(ConfigError):
            parse_inhomogeneity(f"grid_sample path={path}", 32)
        with pytest.raises(ConfigError):
            parse_inhomogeneity(f"grid_sample path={tmp_path / 'missing.dat'}", 16)
        assert parse_inhomogeneity("radial_power a=2.2") == RadialPower(2.2)


class TestSnapshots:
    def test_bit_exact_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        u = rng.standard_normal((16, 16, 16)) + 1j * rng.standard_normal((16, 16, 16))
        stem = io.write_snapshot(tmp_path / "snap", u, l=40.0, t=0.1 + 0.2, h=1.0, step=3,
                                 inhomogeneity="radial_power a=2.2")
        assert stem.with_suffix(".dat").stat().st_size == 16 * 16**3
        back = io.read_snapshot(tmp_path / "snap.meta")
        assert np.array_equal(back.values, u)
        assert back.meta["t"] == 0.1 + 0.2 and back.meta["step"] == 3
        assert back.meta["inhomogeneity"] == "radial_power a=2.2"
        assert back.n == 16 and back.l == 40.0

    def test_layout_is_row_major_little_endian(self, tmp_path):
        u = np.zeros((16, 16, 16), complex)
        u[0, 0, 1] = 1 + 2j
        io.write_snapshot(tmp_path / "s", u)
        raw = np.fromfile(tmp_path / "s.dat", dtype="<f8")
        assert raw[2] == 1.0 and raw[3] == 2.0 and np.count_nonzero(raw) == 2

    def test_real_fields(self, tmp_path):
        f = np.random.default_rng(6).random((16, 16, 16))
        io.write_snapshot(tmp_path / "r", f, c1=0.125)
        back = io.read_snapshot(tmp_path / "r")
        assert back.values.dtype == np.float64 and np.array_equal(back.values, f)
        assert (tmp_path / "r.dat").stat().st_size == 8 * 16**3

    def test_malformed(self, tmp_path):
        io.write_snapshot(tmp_path / "s", np.ones((16, 16, 16), complex))
        with open(tmp_path / "s.dat", "ab") as fh:
            fh.write(b"\0")
        with pytest.raises(io.SnapshotError):
            io.read_snapshot(tmp_path / "s")
        (tmp_path / "t.meta").write_text("format_version = 9\nn = 16\n")
        with pytest.raises(io.SnapshotError):
            io.read_meta(tmp_path / "t")
        with pytest.raises(io.SnapshotError):
            io.read_snapshot(tmp_path / "absent")
        with pytest.raises(io.SnapshotError):
            io.write_snapshot(tmp_path / "bad", np.ones((4, 5, 6)))
