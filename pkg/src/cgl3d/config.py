"""Run configuration: flat ``key = value`` text with ``#`` comments.

Every key may be overridden by an environment variable ``CGL3D_<KEY>``
(upper case).  ``RunConfig.to_text`` writes a file that parses back to an
equal config, which is what the report echoes.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .model import Anisotropic, GridSample, InhomogeneitySpec, ModelParams, RadialPower
from .spectral import Grid3


class ConfigError(ValueError):
    pass


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _floats(s: str, count: int, key: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in s.split(","))
    except ValueError:
        raise ConfigError(f"{key}: expected {count} comma-separated numbers, got {s!r}") from None
    if len(vals) != count:
        raise ConfigError(f"{key}: expected {count} comma-separated numbers, got {s!r}")
    return vals


def parse_inhomogeneity(text: str, n: Optional[int] = None) -> InhomogeneitySpec:
    """Parse ``radial_power a=2.2``, ``anisotropic exponent=1.6 center=.. coeffs=..``
    or ``grid_sample path=<file>`` (raw little-endian float64, n^3 values)."""
    kind, *rest = text.split()
    kw = {}
    for item in rest:
        if "=" not in item:
            raise ConfigError(f"inhomogeneity option {item!r} is not key=value")
        k, v = item.split("=", 1)
        kw[k] = v
    try:
        if kind == "radial_power":
            return RadialPower(float(kw["a"]))
        if kind == "anisotropic":
            return Anisotropic(float(kw["exponent"]),
                               _floats(kw.get("center", "0,0,0"), 3, "center"),
                               _floats(kw.get("coeffs", "1,1,1"), 3, "coeffs"))
        if kind == "grid_sample":
            path = kw["path"]
            vals = np.fromfile(path, dtype="<f8")
            if n is not None:
                if vals.size != n**3:
                    raise ConfigError(f"{path}: {vals.size} values, expected {n**3}")
                vals = vals.reshape(n, n, n)
            return GridSample(vals, path)
    except KeyError as e:
        raise ConfigError(f"inhomogeneity {kind!r} is missing option {e.args[0]!r}") from None
    except OSError as e:
        raise ConfigError(f"cannot read sampled inhomogeneity: {e}") from None
    except ValueError as e:
        raise ConfigError(str(e)) from None
    raise ConfigError(f"unknown inhomogeneity kind {kind!r}")


@dataclass(frozen=True)
class RunConfig:
    n: int = 64
    l: float = 40.0
    h: float = 1.0
    T: float = 500.0
    alpha: float = 1.0
    gamma: float = 5.0
    epsilon: float = 0.5
    inhomogeneity: str = "radial_power a=2.2"
    dealias: bool = False
    contour_points: int = 32
    contour_radius: float = 1.0
    snapshot_every: int = 100
    fit_window: tuple[float, float] = (5.0, 15.0)
    output_dir: str = "out"
    split_damping: float = 1.0
    far_radius: float = 18.0
    amplitude_delta: str = "auto"
    cutoff_r0: float = 1.0
    cutoff_r1: float = 5.0
    _spec: InhomogeneitySpec = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and not math.isfinite(v):
                raise ConfigError(f"{f.name} must be finite")
        try:
            Grid3(self.n, self.l)
            ModelParams(self.alpha, self.gamma, self.epsilon)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if not self.h > 0 or self.T < 0:
            raise ConfigError("need h > 0 and T >= 0")
        if abs(round(self.T / self.h) * self.h - self.T) > 1e-9 * max(self.T, self.h):
            raise ConfigError(f"T={self.T} is not an integer multiple of h={self.h}")
        if self.contour_points < 16 or not self.contour_radius > 0:
            raise ConfigError("contour needs >= 16 points and a positive radius")
        if self.snapshot_every < 0:
            raise ConfigError("snapshot_every must be >= 0")
        lo, hi = self.fit_window
        if not 0 < lo < hi < self.l / 2:
            raise ConfigError(f"fit_window must satisfy 0 < r_min < r_max < l/2, got {self.fit_window}")
        if self.split_damping < 0:
            raise ConfigError("split_damping must be >= 0")
        if self.amplitude_delta != "auto":
            try:
                float(self.amplitude_delta)
            except ValueError:
                raise ConfigError(f"amplitude_delta must be a number or 'auto'") from None
        if not 0 <= self.cutoff_r0 < self.cutoff_r1 < self.l / 4:
            raise ConfigError("cutoff radii must satisfy 0 <= r0 < r1 < l/4")
        object.__setattr__(self, "_spec", parse_inhomogeneity(self.inhomogeneity, self.n))

    @property
    def grid(self) -> Grid3:
        return Grid3(self.n, self.l)

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.alpha, self.gamma, self.epsilon)

    @property
    def spec(self) -> InhomogeneitySpec:
        return self._spec

    @property
    def steps(self) -> int:
        return int(round(self.T / self.h))

    def delta(self) -> Optional[float]:
        """Weight exponent for the amplitude bound, or None when undefined."""
        if self.amplitude_delta != "auto":
            return float(self.amplitude_delta)
        a = getattr(self.spec, "a", getattr(self.spec, "exponent", None))
        if a is None:
            return None
        return min(2 * a - 3.5, 0.5) - 0.05

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            if f.name.startswith("_"):
                continue
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    def to_text(self) -> str:
        lines = []
        for k, v in self.to_dict().items():
            if isinstance(v, list):
                v = ",".join(repr(x) for x in v)
            elif isinstance(v, bool):
                v = str(v).lower()
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


_KEYS = {f.name: f for f in fields(RunConfig) if not f.name.startswith("_")}


def _convert(key: str, raw: str):
    default = _KEYS[key].default
    try:
        if isinstance(default, bool):
            return _bool(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return _floats(raw, 2, key)
    except ValueError as e:
        raise ConfigError(f"{key}: cannot parse {raw!r}: {e}") from None
    return raw.strip()


def parse_text(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    return values


def load(path: Optional[str | Path] = None, env: Optional[Mapping[str, str]] = None,
         **overrides) -> RunConfig:
    """Defaults, then the file, then ``CGL3D_*`` variables, then ``overrides``."""
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        values.update(parse_text(text))
    env = os.environ if env is None else env
    for key in _KEYS:
        raw = env.get(f"CGL3D_{key.upper()}")
        if raw is not None:
            values[key] = _convert(key, raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


def with_updates(cfg: RunConfig, **kw) -> RunConfig:
    return replace(cfg, **kw)
