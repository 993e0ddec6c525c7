"""Experiment orchestration: simulate, predict, diagnose, and write reports."""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import diagnostics as dg
from . import io
from .config import RunConfig
from .etdrk4 import integrate, phi_coeffs
from .linear_theory import CutoffP, FirstOrder, c1 as c1_formula, solve_first_order
from .model import GridSample, box_tail_bound, rhs, sample_inhomogeneity, split
from .spectral import dealias_mask

log = logging.getLogger(__name__)


class Timer(dict):
    @contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self[name] = self.get(name, 0.0) + time.perf_counter() - t0


def _finite(x):
    """JSON-safe float: non-finite values become None."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def simulate(cfg: RunConfig, snapshot_dir: Optional[Path] = None,
             timer: Optional[Timer] = None) -> np.ndarray:
    """Integrate from ``u0 = 1`` to ``T``; optionally persist snapshots."""
    timer = Timer() if timer is None else timer
    grid, p = cfg.grid, cfg.params
    g = sample_inhomogeneity(cfg.spec, grid)
    with timer.phase("coefficients"):
        damping = cfg.split_damping if cfg.split_damping > 0 else None
        symbol, nonlin = split(p, grid, g, damping)
        coeffs = phi_coeffs(symbol, cfg.h, cfg.contour_points, cfg.contour_radius)
        mask = dealias_mask(grid) if cfg.dealias else None

    def save(t, step, u):
        with timer.phase("io"):
            write_state(snapshot_dir / f"snap_{step:06d}", u, cfg, t, step)

    cb = save if snapshot_dir is not None and cfg.snapshot_every else None
    u0 = np.ones(grid.shape, dtype=np.complex128)
    with timer.phase("integrate"):
        u = integrate(u0, cfg.T, cfg.h, coeffs, nonlin, cb, cfg.snapshot_every, mask)
    return u


def write_state(path, u, cfg: RunConfig, t: float, step: int):
    return io.write_snapshot(path, u, l=float(cfg.l), t=float(t), h=float(cfg.h), step=int(step),
                             alpha=float(cfg.alpha), gamma=float(cfg.gamma),
                             epsilon=float(cfg.epsilon), inhomogeneity=cfg.inhomogeneity)


def config_from_meta(meta: dict, base: RunConfig) -> RunConfig:
    """Adopt grid, parameters and inhomogeneity from a snapshot header."""
    return replace(base, n=int(meta["n"]), l=float(meta["l"]), alpha=float(meta["alpha"]),
                   gamma=float(meta["gamma"]), epsilon=float(meta["epsilon"]),
                   inhomogeneity=str(meta["inhomogeneity"]))


def profiles(u: np.ndarray, cfg: RunConfig) -> dict:
    """Axis profiles of phase (raw and box-corrected) and amplitude."""
    grid = cfg.grid
    S, Phi = dg.amplitude_phase(u, grid)
    raw = dg.axis_profile(Phi, grid)
    amp = dg.axis_profile(S, grid)
    corr = None
    if np.abs(raw.values).max() > 1e-10:
        corr = dg.corrected_phase(raw, grid.l, cfg.fit_window)
    return {"S": S, "Phi": Phi, "raw": raw, "amp": amp, "corrected": corr}


def diagnose(u: np.ndarray, cfg: RunConfig, prof: Optional[dict] = None) -> dict:
    """All measured quantities of a state; depends only on ``u`` and ``cfg``."""
    grid, p, win = cfg.grid, cfg.params, cfg.fit_window
    prof = profiles(u, cfg) if prof is None else prof
    S, Phi, raw, corr = prof["S"], prof["Phi"], prof["raw"], prof["corrected"]
    g = sample_inhomogeneity(cfg.spec, grid)

    out = {
        "max_abs_phase": float(np.abs(Phi).max()),
        "phase_within_half_pi": bool(np.abs(Phi).max() < math.pi / 2),
        "max_abs_u_minus_1": float(np.abs(u - 1).max()),
        "rhs_rms": float(np.sqrt(np.mean(np.abs(rhs(u, p, grid, g)) ** 2))),
    }
    if corr is None:
        # zero phase: no decay to fit
        out.update(m_phi=None, ln_prefactor=None, fit_rms=None, m_phi_raw=None, m_phi_free=None,
                   c_estimate=None, c_estimate_raw=None, box_offset=None, box_coefficient=None,
                   phase_gradient=0.0, gradient_sign=0, group_velocity=0.0)
    else:
        fit = dg.fit_power_law(corr.profile, win)
        try:
            m_free = dg.free_power_fit(raw, win)[0]
        except RuntimeError:
            m_free = math.nan
        grad = dg.phase_gradient(raw, win)
        out.update(
            m_phi=fit.m, ln_prefactor=fit.lnC, fit_rms=fit.rms_residual,
            m_phi_raw=dg.fit_power_law(raw, win).m, m_phi_free=_finite(m_free),
            c_estimate=dg.estimate_c(corr.profile, win), c_estimate_raw=dg.estimate_c(raw, win),
            box_offset=corr.offset, box_coefficient=corr.coefficient,
            phase_gradient=grad, gradient_sign=int(np.sign(grad)),
            group_velocity=dg.group_velocity(p, grad),
        )

    bulk = dg.bulk_amplitude(S, grid, cfg.far_radius)
    out["bulk_amplitude"] = bulk
    delta = cfg.delta()
    out["amplitude_delta"] = delta
    if delta is None:
        out["amplitude_sup"] = None
        out["amplitude_envelope"] = None
    else:
        Sn = S / bulk
        out["amplitude_sup"] = dg.amplitude_bound(Sn, delta, grid, win)
        _, env = dg.amplitude_envelope(Sn, delta, grid, win)
        out["amplitude_envelope"] = [float(e) for e in env]
        out["amplitude_sup_raw"] = dg.amplitude_bound(S, delta, grid, win)
    return out


def predict(cfg: RunConfig) -> tuple[FirstOrder, dict]:
    grid, p = cfg.grid, cfg.params
    g = sample_inhomogeneity(cfg.spec, grid)
    cut = CutoffP(cfg.cutoff_r0, cfg.cutoff_r1)
    fo = solve_first_order(p, g, cut, grid)
    tail = box_tail_bound(cfg.spec, grid)
    if isinstance(cfg.spec, GridSample):
        c1 = fo.c1      # a sampled field has no mass outside the box
    else:
        try:
            c1 = c1_formula(p, cfg.spec)
        except ValueError:
            c1 = None   # not integrable
    denom = 4 * math.pi * p.one_plus_ag
    pred = {
        "c1": _finite(c1),
        "c1_box": fo.c1,
        "c1_tail_bound": _finite(tail / denom),
        "integral_g_box": float(g.sum() * grid.cell_volume),
        "integral_g_tail_bound": _finite(tail),
        "eps_c1": _finite(c1 * cfg.epsilon) if c1 is not None else None,
        "linear_residual": fo.residual,
        "cutoff": [cfg.cutoff_r0, cfg.cutoff_r1],
    }
    return fo, pred


def write_profiles_csv(path: Path, prof: dict):
    raw, amp, corr = prof["raw"], prof["amp"], prof["corrected"]
    phi = corr.profile.values if corr is not None else raw.values
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "phi", "S", "ln_r", "ln_abs_phi", "phi_raw"])
        for r, ph, s, pr in zip(raw.r, phi, amp.values, raw.values):
            lnp = math.log(abs(ph)) if abs(ph) > 0 else math.nan
            w.writerow([repr(float(r)), repr(float(ph)), repr(float(s)), repr(math.log(r)),
                        repr(lnp), repr(float(pr))])


def write_report(path: Path, report: dict):
    path.write_text(json.dumps(report, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def emit_outputs(out: Path, u: np.ndarray, cfg: RunConfig, timer: Timer,
                 prediction: Optional[dict] = None, plots: bool = True) -> dict:
    """Diagnose ``u`` and write report.json, profiles.csv and figures to ``out``."""
    from . import plotting

    with timer.phase("diagnose"):
        prof = profiles(u, cfg)
        diag = diagnose(u, cfg, prof)
    if prediction is None:
        with timer.phase("predict"):
            _, prediction = predict(cfg)
    with timer.phase("io"):
        out.mkdir(parents=True, exist_ok=True)
        write_profiles_csv(out / "profiles.csv", prof)
        if plots:
            plotting.write_gnuplot(out / "profiles.gp", "profiles.csv", diag)
            plotting.render(out, prof, diag, cfg)
    report = {"config": cfg.to_dict(), "diagnostics": diag, "prediction": prediction,
              "timings": dict(timer)}
    write_report(out / "report.json", report)
    return report
