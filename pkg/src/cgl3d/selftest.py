"""Quick invariant battery (n = 32, well under a minute).

Each check returns ``(ok, detail)``.  Checks look modules up by attribute
at call time so that a patched component is what gets tested.
"""
from __future__ import annotations

import math
import tempfile
import time
from pathlib import Path
from typing import Callable

import numpy as np

from . import config, diagnostics, etdrk4, io, linear_theory, model, spectral

CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = []


def check(name: str):
    def deco(fn):
        CHECKS.append((name, fn))
        return fn
    return deco


def _grid():
    return spectral.Grid3(32, 40.0)


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


@check("spectral: DFT of a constant sits in mode 0")
def _const():
    g = _grid()
    v = spectral.fft3(np.full(g.shape, 2.5 + 0j))
    rest = np.abs(v).ravel()[1:].max()
    return abs(v[0, 0, 0] - 2.5 * g.n**3) < 1e-9 and rest <= 1e-12 * 2.5 * g.n**3, f"rest={rest:.2e}"


@check("spectral: round trip")
def _round_trip():
    g = _grid()
    rng = np.random.default_rng(1)
    f = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    err = np.abs(spectral.ifft3(spectral.fft3(f)) - f).max() / np.abs(f).max()
    return err <= 1e-12, f"err={err:.2e}"


@check("spectral: Laplacian symbol and dealias mask")
def _symbols():
    g = _grid()
    lap = spectral.laplacian_symbol(g)
    m = spectral.dealias_mask(g)
    ok = (lap[0, 0, 0] == 0 and _rel(lap[1, 0, 0], -(2 * math.pi / 40) ** 2) < 1e-14
          and m[0, 0, 0] and not m[g.n // 2, 0, 0] and g.coordinate((16, 16, 16)) == (0, 0, 0))
    return bool(ok), f"lap(1,0,0)={lap[1, 0, 0]:.6f}"


@check("etdrk4: removable-singularity limits at hL = 0")
def _limits():
    h = 0.7
    c = etdrk4.phi_coeffs(np.zeros(1), h)
    err = max(_rel(c.Q[0], h / 2), *(_rel(f[0], h / 6) for f in (c.f1, c.f2, c.f3)))
    return err <= 1e-10, f"err={err:.2e}"


@check("etdrk4: contour average matches direct formulas away from 0")
def _direct():
    h, z = 1.0, -3.0
    c = etdrk4.phi_coeffs(np.array([z]), h)
    e = math.exp(z)
    ref = [(e**0.5 - 1) / z, (-4 - z + e * (4 - 3 * z + z * z)) / z**3,
           (2 + z + e * (z - 2)) / z**3, (-4 - 3 * z - z * z + e * (4 - z)) / z**3]
    err = max(_rel(a[0], b) for a, b in zip((c.Q, c.f1, c.f2, c.f3), ref))
    return err <= 1e-9, f"err={err:.2e}"


@check("etdrk4: steady state u = 1 preserved (eps = 0)")
def _steady():
    g = _grid()
    p = model.ModelParams(epsilon=0.0)
    field = np.zeros(g.shape)
    sym, nl = model.split(p, g, field)
    c = etdrk4.phi_coeffs(sym, 1.0)
    u = etdrk4.integrate(np.ones(g.shape, complex), 20.0, 1.0, c, nl)
    err = np.abs(u - 1).max()
    return err <= 1e-10, f"max|u-1|={err:.2e}"


@check("etdrk4: linear flow is exact")
def _linear():
    lam = np.array([-0.3 + 2j])
    c = etdrk4.phi_coeffs(lam, 0.5)
    v = etdrk4.step(np.array([1.0 + 0j]), c, lambda u: np.zeros_like(u))
    err = abs(v[0] - np.exp(0.5 * lam[0]))
    return err <= 1e-12, f"err={err:.2e}"


@check("cgl_model: symbol, nonlinearity and integral of g")
def _model():
    p = model.ModelParams()
    g = _grid()
    L = model.linear_symbol(p, g)
    k2 = g.k2
    ok_sym = np.allclose(L[0, 0, 0], 1 + 5j)
    ok_int = _rel(model.integral_g(model.RadialPower(2.0)), math.pi**2) < 1e-12
    ok_quad = _rel(model.integral_g_quadrature(2.4), model.integral_g(model.RadialPower(2.4))) < 1e-6
    re_ok = np.allclose(L.real, 1 - k2)
    return bool(ok_sym and ok_int and ok_quad and re_ok), "symbol/integral"


@check("linear_theory: Fourier symbol values")
def _symbol_A():
    p = model.ModelParams()
    a0, a1 = linear_theory.symbol_A(0.0, p), linear_theory.symbol_A(1.0, p)
    return _rel(a0, 1 / 6) < 1e-14 and _rel(a1, -1 / 7) < 1e-14, f"A(0)={a0}, A(1)={a1}"


@check("linear_theory: grid integral of Lap P is -4 pi")
def _four_pi():
    g = spectral.Grid3(64, 40.0)
    _, lap = linear_theory.build_P(linear_theory.CutoffP(), g)
    val = lap.sum() * g.cell_volume
    return _rel(val, -4 * math.pi) <= 0.01, f"integral={val:.5f}"


@check("linear_theory: first-order solve satisfies its equation")
def _first_order():
    g = _grid()
    p = model.ModelParams()
    gf = model.sample_inhomogeneity(model.RadialPower(2.0), g)
    fo = linear_theory.solve_first_order(p, gf, linear_theory.CutoffP(), g)
    zero = linear_theory.solve_first_order(p, np.zeros(g.shape), linear_theory.CutoffP(), g)
    ok = fo.residual <= 1e-8 and fo.c1 > 0 and zero.c1 == 0 and not zero.s1.any()
    return ok, f"residual={fo.residual:.2e}, c1={fo.c1:.5f}"


@check("linear_theory: periodic Poisson solvability")
def _poisson():
    g = _grid()
    rho = np.cos(2 * math.pi * g.x / g.l)[:, None, None] * np.ones(g.shape)
    linear_theory.poisson_solve(rho, g)
    try:
        linear_theory.poisson_solve(rho + 1.0, g)
    except linear_theory.SolvabilityError:
        return True, "mean-free solvable, mean rejected"
    return False, "nonzero-mean source was accepted"


@check("diagnostics: power-law fit and c estimate")
def _fits():
    r = np.linspace(1.0, 19.0, 40)
    prof = diagnostics.Profile1D(r, 0.13 / r)
    fit = diagnostics.fit_power_law(prof, (5, 15))
    c = diagnostics.estimate_c(diagnostics.Profile1D(r, 0.1 / r), (5, 15))
    ok = abs(fit.m + 1) < 1e-10 and abs(fit.lnC - math.log(0.13)) < 1e-10 and _rel(c, 0.1) < 1e-12
    return ok, f"m={fit.m:.12f}"


@check("diagnostics: amplitude, phase and group velocity")
def _amp():
    g = _grid()
    S, Phi = diagnostics.amplitude_phase(np.full(g.shape, 1j), g)
    cg = diagnostics.group_velocity(model.ModelParams(), -0.01)
    ok = np.allclose(S, 1) and np.allclose(Phi, math.pi / 2) and abs(cg - 0.08) < 1e-15
    return bool(ok), f"c_g={cg}"


@check("experiment: snapshot and config round trips")
def _round_trips():
    g = _grid()
    rng = np.random.default_rng(2)
    u = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    with tempfile.TemporaryDirectory() as tmp:
        stem = io.write_snapshot(Path(tmp) / "s", u, l=40.0, t=1.5)
        back = io.read_snapshot(stem)
        size = stem.with_suffix(".dat").stat().st_size
    cfg = config.RunConfig(n=32, T=10.0)
    cfg2 = config.RunConfig(**config.parse_text(cfg.to_text()))
    ok = np.array_equal(back.values, u) and size == 16 * 32**3 and cfg2 == cfg
    return ok, f"bytes={size}"


def run(verbose: bool = True) -> bool:
    t0 = time.perf_counter()
    failures = 0
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as e:  # a crashing check is a failing check
            ok, detail = False, f"{type(e).__name__}: {e}"
        failures += not ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
    if verbose:
        print(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed "
              f"in {time.perf_counter() - t0:.1f} s")
    return failures == 0
