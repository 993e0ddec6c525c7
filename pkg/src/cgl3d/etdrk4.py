"""Fourth-order exponential time differencing Runge-Kutta (ETDRK4).

Integrates ``du/dt = L u + N(u)`` with ``L`` diagonal in Fourier space.  The
phi-function weights are averaged over a circle of points around each
``h*L`` so that modes with ``h*L`` near zero do not suffer cancellation.

States are plain ndarrays.  ``step`` works in spectral space; ``integrate``
takes and returns physical-space arrays.  Transforms run over every axis of
the array, so a shape-``(1,)`` array is a scalar ODE.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .spectral import fft3, ifft3

log = logging.getLogger(__name__)

BLOWUP_LIMIT = 1e3

SERIES_RADIUS = 0.5
_TERMS = 24


def _series_coefficients():
    # Taylor coefficients (highest power first, for np.polyval) of
    # (e^{z/2}-1)/z and the three z^-3 expressions of the scheme
    f = [math.factorial(k) for k in range(_TERMS + 4)]
    q = [1 / (2 ** (m + 1) * f[m + 1]) for m in range(_TERMS)]
    a = [4 / f[m + 3] - 3 / f[m + 2] + 1 / f[m + 1] for m in range(_TERMS)]
    b = [1 / f[m + 2] - 2 / f[m + 3] for m in range(_TERMS)]
    c = [4 / f[m + 3] - 1 / f[m + 2] for m in range(_TERMS)]
    return tuple(np.array(s[::-1]) for s in (q, a, b, c))


_SERIES = _series_coefficients()

Nonlinear = Callable[[np.ndarray], np.ndarray]


class BlowUpError(RuntimeError):
    """Raised when the state becomes non-finite or exceeds ``BLOWUP_LIMIT``."""

    def __init__(self, step: int, reason: str):
        super().__init__(f"blow-up at step {step}: {reason}")
        self.step = step
        self.reason = reason


@dataclass(frozen=True)
class EtdCoeffs:
    h: float
    E: np.ndarray
    E2: np.ndarray
    Q: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray

    def __post_init__(self):
        for name in ("E", "E2", "Q", "f1", "f2", "f3"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite entries in ETD coefficient {name}")


def phi_coeffs(linear_symbol, h: float, contour_points: int = 32,
               contour_radius: float = 1.0) -> EtdCoeffs:
    """Build ETDRK4 weights for every entry of ``linear_symbol``.

    ``Q, f1, f2, f3`` are means over ``z = h*L + r*exp(2*pi*i*j/M)``,
    ``j = 0..M-1``, of the rational-exponential expressions of the scheme.
    """
    L = np.asarray(linear_symbol, dtype=np.complex128)
    if not np.all(np.isfinite(L)):
        raise ValueError("linear symbol has non-finite entries")
    if not h > 0:
        raise ValueError(f"time step must be positive, got {h!r}")
    if contour_points < 16:
        raise ValueError("contour_points must be >= 16")

    z0 = h * L
    roots = contour_radius * np.exp(2j * np.pi * np.arange(contour_points) / contour_points)
    Q = np.zeros_like(z0)
    f1 = np.zeros_like(z0)
    f2 = np.zeros_like(z0)
    f3 = np.zeros_like(z0)
    # accumulate point by point: a full (modes x M) table is 32x the field size
    for r in roots:
        z = z0 + r
        # a contour point can land on (or next to) the removable singularity,
        # e.g. z0 = -1 with radius 1; those points use the Taylor series
        small = np.abs(z) < SERIES_RADIUS
        zd = np.where(small, 1.0, z)
        ez = np.exp(zd)
        z3 = zd**3
        q = (np.exp(zd / 2) - 1) / zd
        a = (-4 - zd + ez * (4 - 3 * zd + zd * zd)) / z3
        b = (2 + zd + ez * (zd - 2)) / z3
        c = (-4 - 3 * zd - zd * zd + ez * (4 - zd)) / z3
        if small.any():
            zs = z[small]
            q[small], a[small], b[small], c[small] = (np.polyval(s, zs) for s in _SERIES)
        Q += q
        f1 += a
        f2 += b
        f3 += c
    scale = h / contour_points
    return EtdCoeffs(h=float(h), E=np.exp(z0), E2=np.exp(z0 / 2),
                     Q=Q * scale, f1=f1 * scale, f2=f2 * scale, f3=f3 * scale)


def _check_state(v: np.ndarray, step: int):
    if not np.all(np.isfinite(v)):
        raise BlowUpError(step, "non-finite value in state")
    # sum |v_hat| / size bounds max |u| from above; only invert when it might exceed
    bound = np.abs(v).sum() / v.size
    if bound > BLOWUP_LIMIT:
        umax = np.abs(ifft3(v)).max()
        if umax > BLOWUP_LIMIT:
            raise BlowUpError(step, f"max |u| = {umax:.3e} exceeds {BLOWUP_LIMIT:g}")


def step(v: np.ndarray, coeffs: EtdCoeffs, nonlin: Nonlinear,
         mask: Optional[np.ndarray] = None) -> np.ndarray:
    """Advance the spectral state ``v`` by one step of size ``coeffs.h``."""

    def Nhat(w):
        out = fft3(nonlin(ifft3(w)))
        if mask is not None:
            out *= mask
        return out

    c = coeffs
    Nv = Nhat(v)
    a = c.E2 * v + c.Q * Nv
    Na = Nhat(a)
    b = c.E2 * v + c.Q * Na
    Nb = Nhat(b)
    cc = c.E2 * a + c.Q * (2 * Nb - Nv)
    Nc = Nhat(cc)
    return c.E * v + c.f1 * Nv + 2 * c.f2 * (Na + Nb) + c.f3 * Nc


def step_count(T: float, h: float) -> int:
    m = int(round(T / h))
    if m < 0 or abs(m * h - T) > 1e-9 * max(abs(T), h):
        raise ValueError(f"final time {T} is not an integer multiple of h={h}")
    return m


def integrate(u0: np.ndarray, T: float, h: float, coeffs: EtdCoeffs, nonlin: Nonlinear,
              snapshot_cb: Optional[Callable[[float, int, np.ndarray], None]] = None,
              snapshot_every: int = 0, mask: Optional[np.ndarray] = None) -> np.ndarray:
    """Integrate from physical state ``u0`` to time ``T``; returns the physical state.

    ``snapshot_cb(t, step, u)`` is called with the physical state every
    ``snapshot_every`` steps (never when ``snapshot_every`` is 0).
    """
    if abs(coeffs.h - h) > 1e-15 * h:
        raise ValueError(f"coefficients were built for h={coeffs.h}, not h={h}")
    nsteps = step_count(T, h)
    u0 = np.asarray(u0, dtype=np.complex128)
    if nsteps == 0:
        return u0.copy()
    v = fft3(u0)
    for i in range(1, nsteps + 1):
        v = step(v, coeffs, nonlin, mask)
        _check_state(v, i)
        if snapshot_cb is not None and snapshot_every and i % snapshot_every == 0:
            snapshot_cb(i * h, i, ifft3(v))
    log.debug("integrated %d steps to t=%g", nsteps, nsteps * h)
    return ifft3(v)
