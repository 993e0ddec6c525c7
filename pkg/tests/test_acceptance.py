"""Acceptance criteria; each test records one PASS/FAIL line in the summary."""
import math
import os
import time

import numpy as np
import pytest

from cgl3d import etdrk4, runner
from cgl3d.config import RunConfig
from cgl3d.linear_theory import CutoffP, build_P, eval_F, solve_first_order
from cgl3d.model import ModelParams, RadialPower, integral_g, sample_inhomogeneity, split
from cgl3d.spectral import Grid3

# decay rates of the far-field phase measured at n=256 for a = 1.6, 2.0, 2.2
TABLE = {1.6: -0.949, 2.0: -1.066, 2.2: -1.046}


def test_1_steady_state(acceptance):
    cfg = RunConfig(n=32, T=100.0, epsilon=0.0, snapshot_every=0)
    t0 = time.perf_counter()
    u = runner.simulate(cfg)
    secs = time.perf_counter() - t0
    err = float(np.abs(u - 1).max())
    ok = acceptance(1, err <= 1e-10 and secs <= 5.0,
                    f"max|u-1| = {err:.2e} (<= 1e-10), {secs:.2f} s (<= 5 s)")
    assert ok


def test_2_integrator_order(acceptance):
    grid = Grid3(32, 40.0)
    p = ModelParams(epsilon=0.0)
    L, N = split(p, grid, np.zeros(grid.shape))
    u0 = (1 + 0.01 * np.cos(2 * math.pi / grid.l * grid.x))[:, None, None] * np.ones(grid.shape)
    t0 = time.perf_counter()
    sols = [etdrk4.integrate(u0, 4.0, h, etdrk4.phi_coeffs(L, h), N) for h in (0.5, 0.25, 0.125)]
    secs = time.perf_counter() - t0
    e1 = np.abs(sols[0] - sols[1]).max()
    e2 = np.abs(sols[1] - sols[2]).max()
    order = math.log2(e1 / e2)
    ok = acceptance(2, 3.5 <= order <= 4.5 and secs <= 30.0,
                    f"observed order {order:.3f} (in [3.5, 4.5]), {secs:.2f} s (<= 30 s)")
    assert ok


def test_3_phi_limits(acceptance):
    worst = 0.0
    for h in (1.0, 0.5, 0.125):
        c = etdrk4.phi_coeffs(np.zeros(1), h)
        for val, ref in ((c.Q, h / 2), (c.f1, h / 6), (c.f2, h / 6), (c.f3, h / 6)):
            worst = max(worst, abs(val[0] - ref) / ref)
    ok = acceptance(3, worst <= 1e-10, f"max relative deviation {worst:.2e} (<= 1e-10)")
    assert ok


def test_4_minus_four_pi(acceptance):
    grid = Grid3(64, 40.0)
    _, lap = build_P(CutoffP(), grid)
    val = lap.sum() * grid.cell_volume
    rel = abs(val / (-4 * math.pi) - 1)
    ok = acceptance(4, rel <= 0.01, f"grid integral {val:.6f} vs -4 pi, rel {rel:.2e} (<= 1%)")
    assert ok


def test_5_c1_oracle(acceptance):
    cfg = RunConfig(n=64, inhomogeneity="radial_power a=2.0")
    _, pred = runner.predict(cfg)
    ref = math.pi / 24
    rel = abs(pred["c1"] / ref - 1)
    # the box solve misses only the mass of g outside the box
    bracket = pred["c1_box"] <= ref <= pred["c1_box"] + pred["c1_tail_bound"]
    ok = acceptance(5, rel <= 0.02 and bracket and pred["linear_residual"] <= 1e-8,
                    f"c1 = {pred['c1']:.6f} vs pi/24 = {ref:.6f} (rel {rel:.1e}, <= 2%); "
                    f"box {pred['c1_box']:.6f} + tail <= {pred['c1_tail_bound']:.6f} brackets it")
    assert ok


@pytest.mark.slow
def test_6_table_reproduction(runs, acceptance):
    total, fails, parts = 0.0, [], []
    for a, target in TABLE.items():
        run = runs(a, 0.5)
        total += run.seconds
        d = run.diag
        m = d["m_phi"]
        if not (m is not None and abs(m - target) <= 0.2 and d["phase_within_half_pi"]):
            fails.append(a)
        parts.append(f"a={a}: m_phi {m:.3f} vs {target} (raw {d['m_phi_raw']:.3f}, "
                     f"free {d['m_phi_free']:.3f})")
    ok = acceptance(6, not fails and total <= 600.0,
                    "; ".join(parts) + f"; tolerance 0.2; {total:.0f} s (<= 600 s)")
    assert ok, f"failed for a in {fails}"


@pytest.mark.slow
def test_7_leading_coefficient(runs, acceptance):
    eps = 0.05
    ref = eps * math.pi / 24
    cp = runs(2.0, eps).diag["c_estimate"]
    cm = runs(2.0, -eps).diag["c_estimate"]
    rel = abs(cp / ref - 1)
    odd = abs(cp + cm) / abs(cp)
    ok = acceptance(7, rel <= 0.2 and odd <= 0.25 and np.sign(cp) == -np.sign(cm),
                    f"c(+{eps}) = {cp:.5f} vs eps*c1 = {ref:.5f} (rel {rel:.3f}, <= 0.2); "
                    f"c(-{eps}) = {cm:.5f}, oddness defect {odd:.3f} (<= 0.25)")
    assert ok


def test_8_residual_scaling(acceptance):
    grid = Grid3(64, 40.0)
    p = ModelParams()
    cut = CutoffP()
    g = sample_inhomogeneity(RadialPower(2.0), grid)
    fo = solve_first_order(p, g, cut, grid)
    norms = []
    for eps in (0.1, 0.05):
        F1, F2 = eval_F(eps * fo.s1, eps * fo.phi1, eps * fo.c1, p, g, eps, cut, grid)
        norms.append(math.sqrt(np.sum(F1**2 + F2**2)))
    ratio = norms[0] / norms[1]
    ok = acceptance(8, 3.4 <= ratio <= 4.6,
                    f"|F(0.1)| / |F(0.05)| = {ratio:.4f} (in [3.4, 4.6])")
    assert ok


@pytest.mark.slow
def test_9_amplitude_bound(runs, acceptance):
    d = runs(2.2, 0.5).diag
    env = d["amplitude_envelope"]
    sup = d["amplitude_sup"]
    monotone = all(b <= a for a, b in zip(env, env[1:]))
    ok = acceptance(9, d["amplitude_delta"] == pytest.approx(0.45) and math.isfinite(sup)
                    and monotone,
                    f"delta {d['amplitude_delta']:.2f}, sup {sup:.5f}, envelope "
                    + ", ".join(f"{e:.5f}" for e in env) + " (non-increasing)")
    assert ok


@pytest.mark.slow
def test_10_group_velocity_sign(runs, acceptance):
    parts, good = [], True
    mass = integral_g(RadialPower(2.2))
    for eps in (0.5, -0.5):
        d = runs(2.2, eps).diag
        expected = -int(np.sign(eps * mass))
        good &= d["gradient_sign"] == expected and d["phase_within_half_pi"]
        parts.append(f"eps={eps:+}: gradient {d['phase_gradient']:+.2e} "
                     f"(sign {d['gradient_sign']:+d}, expected {expected:+d})")
    ok = acceptance(10, good, "; ".join(parts))
    assert ok


@pytest.mark.fullscale
@pytest.mark.skipif(os.environ.get("CGL3D_FULLSCALE") != "1",
                    reason="n=256 reproduction takes hours; set CGL3D_FULLSCALE=1")
def test_11_full_scale(acceptance):
    parts, fails = [], []
    for a, target in TABLE.items():
        cfg = RunConfig(n=256, inhomogeneity=f"radial_power a={a!r}")
        m = runner.diagnose(runner.simulate(cfg), cfg)["m_phi"]
        if m is None or abs(m - target) > 0.1:
            fails.append(a)
        parts.append(f"a={a}: m_phi {m} vs {target}")
    ok = acceptance(11, not fails, "; ".join(parts) + "; tolerance 0.1")
    assert ok
