"""Perturbed complex Ginzburg-Landau equation in the corotating frame.

    u_t = (1 + i alpha) Lap u + (1 + i gamma) u - (1 + i gamma) u |u|^2 + i eps g(x) u

``u = 1`` is a steady state at ``eps = 0``.  The spatially varying term
``i eps g u`` is not diagonal in Fourier space and therefore lives in the
nonlinear part of the ETD split.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import integrate as sint
from scipy.special import gammaln

from .spectral import Grid3, fft3, ifft3


@dataclass(frozen=True)
class ModelParams:
    alpha: float = 1.0
    gamma: float = 5.0
    epsilon: float = 0.5

    def __post_init__(self):
        for name in ("alpha", "gamma", "epsilon"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not 1 + self.alpha * self.gamma > 0:
            raise ValueError(
                f"stability requires 1 + alpha*gamma > 0, got {1 + self.alpha * self.gamma:g}")

    @property
    def one_plus_ag(self) -> float:
        return 1 + self.alpha * self.gamma


@dataclass(frozen=True)
class RadialPower:
    """``g(x) = (1 + |x|^2)^(-a)`` centered at the origin."""

    a: float

    def __post_init__(self):
        if not self.a > 1:
            raise ValueError(f"radial_power exponent must exceed 1, got {self.a!r}")

    def __str__(self):
        return f"radial_power a={self.a!r}"


@dataclass(frozen=True)
class Anisotropic:
    """``g(x) = (1 + sum_i c_i (x_i - x0_i)^2)^(-exponent)``."""

    exponent: float
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    coeffs: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if len(self.center) != 3 or len(self.coeffs) != 3:
            raise ValueError("anisotropic center and coeffs need three entries")
        if not all(c > 0 for c in self.coeffs):
            raise ValueError("quadratic-form coefficients must be positive")
        if not self.exponent > 1:
            raise ValueError(f"anisotropic exponent must exceed 1, got {self.exponent!r}")

    def __str__(self):
        fmt = lambda v: ",".join(repr(x) for x in v)
        return (f"anisotropic exponent={self.exponent!r} center={fmt(self.center)} "
                f"coeffs={fmt(self.coeffs)}")


@dataclass(frozen=True)
class GridSample:
    """Externally supplied real field on the simulation grid."""

    values: np.ndarray = field(repr=False)
    source: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values)
        if np.iscomplexobj(vals):
            if np.abs(vals.imag).max() > 0:
                raise ValueError("sampled inhomogeneity must be real-valued")
            vals = vals.real
        object.__setattr__(self, "values", np.ascontiguousarray(vals, dtype=np.float64))

    def __str__(self):
        return f"grid_sample path={self.source}"

    # ndarray fields break the generated __eq__/__hash__
    def __eq__(self, other):
        return isinstance(other, GridSample) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.source, self.values.shape))


InhomogeneitySpec = Union[RadialPower, Anisotropic, GridSample]


# (1 + i gamma) is the corotating-frame term for Omega = gamma.
def linear_symbol(p: ModelParams, grid: Grid3) -> np.ndarray:
    """``L(k) = (1 + i alpha)(-|k|^2) + (1 + i gamma)``."""
    return (1 + 1j * p.alpha) * (-grid.k2) + (1 + 1j * p.gamma)


def nonlinear(u: np.ndarray, p: ModelParams, g_field: np.ndarray) -> np.ndarray:
    """``N(u) = -(1 + i gamma) u |u|^2 + i eps g u``."""
    return -(1 + 1j * p.gamma) * u * (u.real**2 + u.imag**2) + 1j * p.epsilon * g_field * u


def split_shift(p: ModelParams, damping: float) -> complex:
    """Shift moved from the linear to the nonlinear part of the ETD split.

    With ``damping = d`` the integrated linear symbol becomes
    ``(1 + i alpha)(-|k|^2) - d``.  The unshifted split treats the stiff
    ``(1 + i gamma)`` rotation and the cubic term on opposite sides and is
    unstable at ``h = 1``.
    """
    return (1 + 1j * p.gamma) + damping


def split(p: ModelParams, grid: Grid3, g_field: np.ndarray, damping: Optional[float] = 1.0):
    """Return ``(symbol, nonlin)`` for ETDRK4.

    ``damping=None`` gives the plain split ``linear_symbol`` / ``nonlinear``.
    """
    L = linear_symbol(p, grid)
    if damping is None:
        return L, lambda u: nonlinear(u, p, g_field)
    sigma = split_shift(p, damping)
    return L - sigma, lambda u: nonlinear(u, p, g_field) + sigma * u


def rhs(u: np.ndarray, p: ModelParams, grid: Grid3, g_field: np.ndarray) -> np.ndarray:
    """Full right-hand side ``L u + N(u)`` in physical space."""
    return ifft3(linear_symbol(p, grid) * fft3(u)) + nonlinear(u, p, g_field)


def sample_inhomogeneity(spec: InhomogeneitySpec, grid: Grid3) -> np.ndarray:
    if isinstance(spec, RadialPower):
        return (1 + grid.radius**2) ** (-spec.a)
    if isinstance(spec, Anisotropic):
        X, Y, Z = grid.mesh()
        (c1, c2, c3), (x0, y0, z0) = spec.coeffs, spec.center
        q = 1 + c1 * (X - x0) ** 2 + c2 * (Y - y0) ** 2 + c3 * (Z - z0) ** 2
        return q ** (-spec.exponent)
    if isinstance(spec, GridSample):
        if spec.values.shape != grid.shape:
            raise ValueError(f"sampled field shape {spec.values.shape} != grid {grid.shape}")
        return spec.values.copy()
    raise TypeError(f"unknown inhomogeneity spec {spec!r}")


def _radial_moment(a: float) -> float:
    # int_0^inf r^2 (1+r^2)^(-a) dr = (sqrt(pi)/4) Gamma(a-3/2)/Gamma(a)
    return math.sqrt(math.pi) / 4 * math.exp(gammaln(a - 1.5) - gammaln(a))


def integral_g(spec: InhomogeneitySpec, grid: Optional[Grid3] = None) -> float:
    """Integral of ``g`` over R^3 (box Riemann sum for ``GridSample``)."""
    if isinstance(spec, (RadialPower, Anisotropic)):
        a = spec.a if isinstance(spec, RadialPower) else spec.exponent
        if not a > 1.5:
            raise ValueError(f"g is not integrable for exponent {a} <= 3/2")
        full = 4 * math.pi * _radial_moment(a)
        if isinstance(spec, Anisotropic):
            full /= math.sqrt(math.prod(spec.coeffs))
        return full
    if isinstance(spec, GridSample):
        if grid is None:
            raise ValueError("integral of a sampled field needs its grid")
        return float(spec.values.sum() * grid.cell_volume)
    raise TypeError(f"unknown inhomogeneity spec {spec!r}")


def integral_g_quadrature(a: float, r_max: float = math.inf) -> float:
    """Adaptive radial quadrature of ``4 pi int_0^r_max r^2 (1+r^2)^(-a) dr``."""
    val, _ = sint.quad(lambda r: r * r * (1 + r * r) ** (-a), 0, r_max,
                       epsabs=0, epsrel=1e-12, limit=400)
    return 4 * math.pi * val


def box_tail_bound(spec: InhomogeneitySpec, grid: Grid3) -> float:
    """Upper bound on the part of ``int g`` lying outside the periodic box.

    The box contains the ball of radius ``l/2`` around the origin, so the
    integral beyond that ball bounds the missing mass of a centered radial
    ``g``.  Sampled fields carry no information beyond the box: ``inf``.
    """
    R = grid.l / 2
    if isinstance(spec, RadialPower):
        if not spec.a > 1.5:
            return math.inf
        val, _ = sint.quad(lambda r: r * r * (1 + r * r) ** (-spec.a), R, math.inf,
                           epsabs=0, epsrel=1e-10)
        return 4 * math.pi * val
    if isinstance(spec, Anisotropic):
        if not spec.exponent > 1.5:
            return math.inf
        # ball of radius rho around the center, in the scaled frame y_i = sqrt(c_i) x_i
        off = max(abs(c) for c in spec.center)
        rho = (R - off) * math.sqrt(min(spec.coeffs))
        if rho <= 0:
            return integral_g(spec)
        val, _ = sint.quad(lambda r: r * r * (1 + r * r) ** (-spec.exponent), rho, math.inf,
                           epsabs=0, epsrel=1e-10)
        return 4 * math.pi * val / math.sqrt(math.prod(spec.coeffs))
    return math.inf
