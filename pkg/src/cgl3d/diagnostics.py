"""Measured quantities of a simulated state: profiles, decay fits, bounds.

The far-field phase in a periodic box is not ``c/|x|``.  A point source of
phase gradient in a box of side ``l`` produces the periodic Green function,
which is ``1/(4 pi |x|)`` plus a smooth background ``|x|^2/(6 l^3)`` and a
constant (the background of uniform frequency shift).  ``corrected_phase``
removes those box terms before the power-law fit.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit
from scipy.special import erfc

from .model import ModelParams
from .spectral import Grid3


class PhaseSingularityError(ValueError):
    """The modulus nearly vanishes, so the phase is undefined."""

    def __init__(self, index, coord, modulus):
        super().__init__(f"|u| = {modulus:.3e} at grid point {index} (x = {coord}); "
                         "phase is undefined there")
        self.index = index
        self.coord = coord


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class Profile1D:
    r: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.shape != v.shape or r.ndim != 1:
            raise ValueError("profile radii and values must be 1D and equally long")
        if np.any(np.diff(r) <= 0):
            raise ValueError("profile radii must be strictly increasing")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "values", v)

    def window(self, window) -> "Profile1D":
        lo, hi = window
        sel = (self.r >= lo) & (self.r <= hi)
        return Profile1D(self.r[sel], self.values[sel])


@dataclass(frozen=True)
class DecayFit:
    m: float
    lnC: float
    window: tuple[float, float]
    rms_residual: float
    samples: int


def amplitude_phase(u: np.ndarray, grid: Grid3 | None = None, floor: float = 1e-6):
    """``S = |u|`` and the principal argument of ``u``."""
    u = np.asarray(u)
    S = np.abs(u)
    flat = int(np.argmin(S))
    if S.flat[flat] < floor:
        idx = np.unravel_index(flat, S.shape)
        coord = grid.coordinate(idx) if grid is not None else None
        raise PhaseSingularityError(tuple(int(i) for i in idx), coord, float(S.flat[flat]))
    return S, np.angle(u)


def axis_profile(f: np.ndarray, grid: Grid3) -> Profile1D:
    """Samples along the +x axis through the origin (``y = z = 0``)."""
    c = grid.center_index
    return Profile1D(grid.x[c + 1:].copy(), np.asarray(f)[c + 1:, c, c].astype(float))


def _check_window(window, grid: Grid3 | None = None):
    lo, hi = (float(w) for w in window)
    if not 0 < lo < hi:
        raise FitError(f"window must satisfy 0 < r_min < r_max, got {window!r}")
    if grid is not None and hi >= grid.l / 2:
        raise FitError(f"window end {hi} must lie inside the half box {grid.l / 2}")
    return lo, hi


def fit_power_law(profile: Profile1D, window, min_samples: int = 8) -> DecayFit:
    """Least-squares line through ``(ln r, ln|value|)`` over the window."""
    lo, hi = _check_window(window)
    w = profile.window((lo, hi))
    mag = np.abs(w.values)
    ok = mag > 1e-12
    if ok.sum() < min_samples:
        raise FitError(f"{int(ok.sum())} usable samples in [{lo}, {hi}], need {min_samples}")
    x, y = np.log(w.r[ok]), np.log(mag[ok])
    m, lnC = np.polyfit(x, y, 1)
    rms = float(np.sqrt(np.mean((y - (m * x + lnC)) ** 2)))
    return DecayFit(float(m), float(lnC), (lo, hi), rms, int(ok.sum()))


def estimate_c(profile: Profile1D, window) -> float:
    """Median of ``value * r`` over the window."""
    w = profile.window(_check_window(window))
    if w.r.size == 0:
        raise FitError(f"no samples in window {window!r}")
    return float(np.median(w.values * w.r))


def amplitude_weight(S: np.ndarray, delta: float, grid: Grid3) -> np.ndarray:
    return np.abs(S - 1) * (1 + grid.radius**2) ** ((delta + 2.5) / 2)


def amplitude_bound(S: np.ndarray, delta: float, grid: Grid3, window) -> float:
    """Sup of ``|S - 1| <x>^(delta + 2.5)`` over grid points with ``|x|`` in the window."""
    lo, hi = _check_window(window)
    sel = (grid.radius >= lo) & (grid.radius <= hi)
    if not sel.any():
        raise FitError(f"no grid points in window {window!r}")
    return float(amplitude_weight(S, delta, grid)[sel].max())


def amplitude_envelope(S: np.ndarray, delta: float, grid: Grid3, window, bins: int = 4):
    """Shell-wise maxima of the amplitude weight over equal-width radial bins."""
    lo, hi = _check_window(window)
    edges = np.linspace(lo, hi, bins + 1)
    wgt = amplitude_weight(S, delta, grid)
    r = grid.radius
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (r >= a) & (r <= b)
        out.append(float(wgt[sel].max()) if sel.any() else math.nan)
    return edges, np.array(out)


def default_delta(a: float) -> float:
    """Weight exponent for ``radial_power(a)``: just below ``min(2a - 3.5, 1/2)``."""
    return min(2 * a - 3.5, 0.5) - 0.05


def bulk_amplitude(S: np.ndarray, grid: Grid3, r_far: float | None = None) -> float:
    """Median modulus far from the origin (``|x| >= r_far``, default ``0.45 l``)."""
    r_far = 0.45 * grid.l if r_far is None else r_far
    sel = grid.radius >= r_far
    if not sel.any():
        raise ValueError(f"no grid points beyond r = {r_far}")
    return float(np.median(S[sel]))


def group_velocity(p: ModelParams, k: float) -> float:
    return 2 * (p.alpha - p.gamma) * k


def phase_gradient(profile: Profile1D, window) -> float:
    """Mean radial derivative of the phase over the window (least-squares slope)."""
    w = profile.window(_check_window(window))
    if w.r.size < 2:
        raise FitError(f"need two samples in window {window!r}")
    return float(np.polyfit(w.r, w.values, 1)[0])


def periodic_green(points, l: float, eta: float | None = None, nr: int = 3, nk: int = 8):
    """Zero-mean periodic Green function of ``-Lap`` for a unit source at 0.

    Ewald summation: the source is screened by a Gaussian of width
    ``1/eta`` (real-space sum of ``erfc``), the remainder is summed in
    Fourier space, and the neutralizing uniform background fixes the mean
    to zero.  Near the source it behaves like ``1/(4 pi |x|)``.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    V = l**3
    eta = 2.5 / l if eta is None else eta
    rng = np.arange(-nr, nr + 1)
    shifts = np.array(np.meshgrid(rng, rng, rng, indexing="ij")).reshape(3, -1).T * l
    d = np.linalg.norm(pts[:, None, :] + shifts[None, :, :], axis=2)
    out = np.sum(erfc(eta * d) / (4 * np.pi * d), axis=1)
    rk = np.arange(-nk, nk + 1)
    K = np.array(np.meshgrid(rk, rk, rk, indexing="ij")).reshape(3, -1).T * (2 * np.pi / l)
    K = K[np.any(K != 0, axis=1)]
    k2 = np.sum(K * K, axis=1)
    out += np.cos(pts @ K.T) @ (np.exp(-k2 / (4 * eta**2)) / k2 / V)
    return out - 1 / (4 * eta**2 * V)


@dataclass(frozen=True)
class CorrectedPhase:
    profile: Profile1D      # phase with the box background removed
    offset: float
    coefficient: float


def corrected_phase(profile: Profile1D, l: float, window) -> CorrectedPhase:
    """Remove the periodic-image background from an axis phase profile.

    Fits ``phi ~ b + c * 4 pi G_per(r)`` on the window, then subtracts ``b``
    and ``c * (4 pi G_per - 1/r)``, leaving the free-space ``c/r`` part plus
    whatever the model does not capture.
    """
    lo, hi = _check_window(window)
    r = profile.r
    G = 4 * np.pi * periodic_green(np.c_[r, 0 * r, 0 * r], l)
    sel = (r >= lo) & (r <= hi)
    if sel.sum() < 3:
        raise FitError(f"too few samples in window {window!r}")
    A = np.c_[np.ones(sel.sum()), G[sel]]
    (b, c), *_ = np.linalg.lstsq(A, profile.values[sel], rcond=None)
    vals = profile.values - b - c * (G - 1 / r)
    return CorrectedPhase(Profile1D(r, vals), float(b), float(c))


def free_power_fit(profile: Profile1D, window) -> tuple[float, float, float]:
    """Unconstrained ``phi ~ b + C r^m`` fit; returns ``(m, C, b)``.

    Ignores the box structure; reported for comparison only.
    """
    w = profile.window(_check_window(window))
    v = w.values
    p0 = [v[-1] - 0.5 * (v[0] - v[-1]), 5 * (v[0] - v[-1]) or 1e-3, -1.0]
    with warnings.catch_warnings():
        # an exactly representable profile leaves the covariance undefined
        warnings.simplefilter("ignore", OptimizeWarning)
        (b, C, m), _ = curve_fit(lambda r, b, C, m: b + C * r**m, w.r, v, p0=p0, maxfev=20000)
    return float(m), float(C), float(b)
