"""Order-epsilon theory of the far-field phase.

Variables are the diagonalizing pair ``s_hat = gamma*s``, ``phi_hat =
phi - gamma*s``, with the phase split as ``phi_hat = phi_tilde + c*P`` where
``P = chi(|x|)/|x|`` carries the 1/|x| far field.  All Laplacians and
gradients of periodic fields are spectral; those of ``P`` are analytic
because ``P`` is not periodic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Literal

import numpy as np

from .model import InhomogeneitySpec, ModelParams, integral_g
from .spectral import Grid3, fft3, ifft3, spectral_derivative, spectral_gradient, spectral_laplacian


class SolvabilityError(ArithmeticError):
    """The mean (mode-0) compatibility condition of a periodic solve fails."""


@dataclass(frozen=True)
class CutoffP:
    """Radial cutoff: ``chi = 0`` for ``r <= r0``, ``chi = 1`` for ``r >= r1``.

    The transition is the quintic smoothstep ``10t^3 - 15t^4 + 6t^5``, which
    is C^2.  The default transition width keeps the analytic ``Lap P``
    resolved on the n=64, l=40 grid.
    """

    r0: float = 1.0
    r1: float = 5.0

    def __post_init__(self):
        if not 0 <= self.r0 < self.r1:
            raise ValueError(f"need 0 <= r0 < r1, got r0={self.r0}, r1={self.r1}")

    def chi(self, r):
        t = np.clip((np.asarray(r, dtype=float) - self.r0) / (self.r1 - self.r0), 0.0, 1.0)
        return t**3 * (10 - 15 * t + 6 * t * t)

    def dchi(self, r):
        w = self.r1 - self.r0
        t = np.clip((np.asarray(r, dtype=float) - self.r0) / w, 0.0, 1.0)
        return 30 * t * t * (1 - t) ** 2 / w

    def d2chi(self, r):
        w = self.r1 - self.r0
        t = np.clip((np.asarray(r, dtype=float) - self.r0) / w, 0.0, 1.0)
        return 60 * t * (1 - t) * (1 - 2 * t) / w**2


@dataclass(frozen=True)
class FirstOrder:
    s1: np.ndarray
    phi1: np.ndarray
    c1: float
    residual: float = 0.0


@dataclass(frozen=True)
class WeightedSpaceSpec:
    kind: Literal["W", "M"] = "W"
    k: int = 0
    delta: float = 0.0
    p: float = 2.0

    def __post_init__(self):
        if self.kind not in ("W", "M"):
            raise ValueError("kind must be 'W' (Sobolev) or 'M' (Kondratiev)")
        if self.k not in (0, 1, 2):
            raise ValueError("derivative order k must be 0, 1 or 2")
        if not self.p > 1:
            raise ValueError("integrability exponent must exceed 1")


def symbol_A(k2, p: ModelParams):
    """Fourier symbol ``((1-ag)k^2 + 2) / ((1+a^2)k^2 + 2(1+ag))``."""
    ag = p.alpha * p.gamma
    k2 = np.asarray(k2, dtype=float)
    return ((1 - ag) * k2 + 2) / ((1 + p.alpha**2) * k2 + 2 * (1 + ag))


@lru_cache(maxsize=8)
def _build_P(cut: CutoffP, grid: Grid3):
    r = grid.radius
    safe = np.where(r > 0, r, 1.0)
    P = np.where(r > 0, cut.chi(r) / safe, 0.0)
    # Lap(f(r)) = f'' + 2f'/r; for f = chi/r this collapses to chi''/r
    lapP = np.where(r > 0, cut.d2chi(r) / safe, 0.0)
    dPdr = np.where(r > 0, cut.dchi(r) / safe - cut.chi(r) / safe**2, 0.0)
    P.setflags(write=False)
    lapP.setflags(write=False)
    dPdr.setflags(write=False)
    return P, lapP, dPdr


def build_P(cut: CutoffP, grid: Grid3) -> tuple[np.ndarray, np.ndarray]:
    """Sample ``P = chi(|x|)/|x|`` and its analytic Laplacian on the grid."""
    if not cut.r1 < grid.l / 4:
        raise ValueError(f"cutoff radius r1={cut.r1} must be below l/4={grid.l / 4}")
    P, lapP, _ = _build_P(cut, grid)
    return P, lapP


def grad_P(cut: CutoffP, grid: Grid3) -> list[np.ndarray]:
    _, _, dPdr = _build_P(cut, grid)
    r = grid.radius
    safe = np.where(r > 0, r, 1.0)
    return [dPdr * X / safe for X in grid.mesh()]


def c1(p: ModelParams, spec: InhomogeneitySpec) -> float:
    """Leading far-field coefficient ``int g / (4 pi (1 + alpha gamma))``."""
    return integral_g(spec) / (4 * math.pi * p.one_plus_ag)


def to_hatted(s, phi, gamma: float):
    """``(s, phi) -> (gamma s, phi - gamma s)``."""
    return gamma * s, phi - gamma * s


def from_hatted(s_hat, phi_hat, gamma: float):
    s = s_hat / gamma
    return s, phi_hat + gamma * s


def apply_L(s, phi, c: float, p: ModelParams, cut: CutoffP, grid: Grid3):
    """Linearized operator acting on ``(s_hat, phi_tilde, c)``."""
    ag = p.alpha * p.gamma
    _, lapP = build_P(cut, grid)
    lap_s = spectral_laplacian(np.asarray(s, dtype=float), grid)
    lap_phi = spectral_laplacian(np.asarray(phi, dtype=float), grid)
    row1 = (1 - ag) * lap_s - 2 * s - ag * lap_phi - ag * c * lapP
    row2 = (ag + p.alpha / p.gamma) * lap_s + (1 + ag) * lap_phi + (1 + ag) * c * lapP
    return row1, row2


def poisson_solve(rho: np.ndarray, grid: Grid3, rtol: float = 1e-10) -> np.ndarray:
    """Zero-mean periodic solution of ``Lap u = rho``.

    Raises ``SolvabilityError`` when ``rho`` has a mean component above
    ``rtol`` relative to its L2 size: the periodic Laplacian has no
    inverse on constants.
    """
    rho = np.asarray(rho, dtype=float)
    mean = rho.mean()
    scale = math.sqrt(np.mean(rho * rho))
    if abs(mean) > rtol * max(scale, np.finfo(float).tiny):
        raise SolvabilityError(f"source has nonzero mean {mean:.3e}; not in the range of Lap")
    rh = fft3(rho)
    k2 = grid.k2.copy()
    k2[0, 0, 0] = 1.0
    uh = -rh / k2
    uh[0, 0, 0] = 0.0
    return ifft3(uh).real


def solve_first_order(p: ModelParams, g_field: np.ndarray, cut: CutoffP, grid: Grid3,
                      rtol: float = 1e-10) -> FirstOrder:
    """Solve ``L(s1, phi1, c1) = (0, -g)`` on the periodic grid.

    ``c1`` is fixed by the mean of the second row (the only obstruction to
    inverting the Laplacian), then each Fourier mode is a 2x2 solve.  The
    mode-0 phase is set to zero.
    """
    g_field = np.asarray(g_field, dtype=float)
    ag = p.alpha * p.gamma
    _, lapP = build_P(cut, grid)
    g_sum = g_field.sum()
    if g_sum == 0.0 and not np.any(g_field):
        zero = np.zeros(grid.shape)
        return FirstOrder(zero, zero.copy(), 0.0, 0.0)
    c = -g_sum / ((1 + ag) * lapP.sum())

    f = ag * c * lapP                       # row 1 right-hand side
    rho = -g_field - (1 + ag) * c * lapP    # row 2 right-hand side, zero mean
    gnorm = math.sqrt(np.mean(g_field**2))
    if abs(rho.mean()) > rtol * gnorm:
        raise SolvabilityError(f"mean residual {rho.mean():.3e} after c1 correction")

    lam = -grid.k2
    fh, rh = fft3(f), fft3(rho)
    helm = (1 + p.alpha**2) * lam - 2 * (1 + ag)      # strictly negative
    sh = ((1 + ag) * fh + ag * rh) / helm
    lam_safe = lam.copy()
    lam_safe[0, 0, 0] = 1.0
    ph = (((1 - ag) * lam - 2) * rh - (ag + p.alpha / p.gamma) * lam * fh) / (lam_safe * helm)
    ph[0, 0, 0] = 0.0
    s1, phi1 = ifft3(sh).real, ifft3(ph).real

    r1, r2 = apply_L(s1, phi1, c, p, cut, grid)
    res = math.sqrt(np.mean(r1**2 + (r2 + g_field) ** 2)) / gnorm
    return FirstOrder(s1, phi1, float(c), float(res))


def eval_F(s, phi_tilde, c: float, p: ModelParams, g_field, eps: float, cut: CutoffP,
           grid: Grid3):
    """Full nonlinear residual ``(F1, F2)`` at ``(s_hat, phi_tilde, c)``."""
    al, ga = p.alpha, p.gamma
    ag = al * ga
    s = np.asarray(s, dtype=float)
    denom = ga + s
    if np.min(np.abs(denom)) < 0.1 * abs(ga):
        raise ZeroDivisionError("gamma + s_hat is too close to zero")
    _, lapP = build_P(cut, grid)
    gP = grad_P(cut, grid)

    gs = spectral_gradient(s, grid)
    gp = [d + c * q for d, q in zip(spectral_gradient(np.asarray(phi_tilde, float), grid), gP)]
    lap_s = spectral_laplacian(s, grid)
    lap_p = spectral_laplacian(np.asarray(phi_tilde, float), grid) + c * lapP

    ss = sum(a * a for a in gs)
    sp = sum(a * b for a, b in zip(gs, gp))
    pp = sum(b * b for b in gp)
    quad = ss + 2 * sp + pp

    F1 = ((1 - ag) * lap_s - 2 * s - ag * lap_p - denom * quad
          - 2 * al * ss - 2 * al * sp - al * s * (lap_s + lap_p)
          - 3 / ga * s**2 - s**3 / ga**2)
    F2 = ((al / ga + ag) * lap_s + (1 + ag) * lap_p + al * s * (lap_s + lap_p) + 2 * al * sp
          + (ga - al + s) * quad + 2 * al * ss + 3 * s**2 / ga + s**3 / ga**2
          + (2 * ss + 2 * sp - s**2 - s**3 / ga - al / ga * s * lap_s) / denom
          + eps * np.asarray(g_field, dtype=float))
    return F1, F2


def _multi_indices(k: int):
    for orders in product(range(k + 1), repeat=3):
        if sum(orders) <= k:
            yield orders


def weighted_norm(f, spec: WeightedSpaceSpec, grid: Grid3) -> float:
    """Riemann-sum weighted Sobolev (``W``) or Kondratiev (``M``) norm."""
    f = np.asarray(f)
    weight = 1 + grid.radius**2       # <x>^2
    total = 0.0
    for orders in _multi_indices(spec.k):
        d = f if orders == (0, 0, 0) else spectral_derivative(f, grid, orders)
        expo = spec.delta + (sum(orders) if spec.kind == "M" else 0)
        total += np.sum(np.abs(d * weight ** (expo / 2)) ** spec.p) * grid.cell_volume
    return float(total ** (1 / spec.p))
