"""Periodic cubic grid, FFT wrappers and spectral operator tables.

The box is ``[-l/2, l/2)^3`` so that radially symmetric inhomogeneities sit
at the origin.  Transforms use the unnormalized forward convention: the DFT
of a constant ``c`` has mode-0 value ``c * n**3`` and the inverse divides by
``n**3``.  Thread count is controlled with ``scipy.fft.set_workers``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
import scipy.fft as sfft

Space = Literal["physical", "spectral"]


@dataclass(frozen=True)
class Grid3:
    """Cubic periodic grid with ``n`` points per axis on a box of side ``l``."""

    n: int
    l: float = 40.0

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 16 or n & (n - 1):
            raise ValueError(f"n must be a power of two >= 16, got {n!r}")
        if not np.isfinite(self.l) or self.l <= 0:
            raise ValueError(f"box length must be positive and finite, got {self.l!r}")

    @property
    def spacing(self) -> float:
        return self.l / self.n

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    @cached_property
    def x(self) -> np.ndarray:
        """1D coordinates ``-l/2 + j*spacing``."""
        return -self.l / 2 + np.arange(self.n) * self.spacing

    @cached_property
    def signed_index(self) -> np.ndarray:
        """Frequency index in FFT order: ``m`` for ``m < n/2``, ``m - n`` otherwise."""
        m = np.arange(self.n)
        return np.where(m <= self.n // 2 - 1, m, m - self.n)

    @cached_property
    def k(self) -> np.ndarray:
        return (2 * np.pi / self.l) * self.signed_index

    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.x, self.x, indexing="ij", sparse=True)

    @cached_property
    def radius(self) -> np.ndarray:
        X, Y, Z = self.mesh()
        return np.sqrt(X**2 + Y**2 + Z**2)

    @cached_property
    def k2(self) -> np.ndarray:
        k = self.k
        return k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2

    def coordinate(self, index) -> tuple[float, float, float]:
        """Physical point of grid index ``(i, j, k)``."""
        idx = tuple(int(i) for i in index)
        if len(idx) != 3 or any(i < 0 or i >= self.n for i in idx):
            raise IndexError(f"grid index {index!r} out of range for n={self.n}")
        return tuple(float(self.x[i]) for i in idx)

    @property
    def center_index(self) -> int:
        """Index of the coordinate 0 along each axis."""
        return self.n // 2


@dataclass
class ComplexField3:
    """Complex field on a ``Grid3`` tagged with the space it lives in."""

    grid: Grid3
    values: np.ndarray
    space: Space = "physical"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"field shape {self.values.shape} does not match grid {self.grid.shape}")
        if self.space not in ("physical", "spectral"):
            raise ValueError(f"unknown space {self.space!r}")

    def _require(self, space: Space):
        if self.space != space:
            raise ValueError(f"expected a {space}-space field, got {self.space}-space")


def fft3(values: np.ndarray) -> np.ndarray:
    return sfft.fftn(values, axes=range(values.ndim))


def ifft3(values: np.ndarray) -> np.ndarray:
    return sfft.ifftn(values, axes=range(values.ndim))


def forward(f: ComplexField3) -> ComplexField3:
    f._require("physical")
    return ComplexField3(f.grid, fft3(f.values), "spectral")


def inverse(f: ComplexField3) -> ComplexField3:
    f._require("spectral")
    return ComplexField3(f.grid, ifft3(f.values), "physical")


def laplacian_symbol(grid: Grid3) -> np.ndarray:
    """``-(k1^2 + k2^2 + k3^2)`` for every mode."""
    return -grid.k2


def dealias_mask(grid: Grid3) -> np.ndarray:
    """2/3-rule mask: keep modes with ``max |m~_i| < n/3``."""
    m = np.abs(grid.signed_index)
    mmax = np.maximum(np.maximum(m[:, None, None], m[None, :, None]), m[None, None, :])
    return mmax < grid.n / 3


def spectral_gradient(f: np.ndarray, grid: Grid3) -> list[np.ndarray]:
    """Gradient of a real or complex periodic field, computed spectrally.

    The Nyquist wavenumber is zeroed for odd derivatives so real input
    gives real output.
    """
    fh = fft3(f)
    k = grid.k.copy()
    k[grid.n // 2] = 0.0
    out = []
    for axis in range(3):
        shape = [1, 1, 1]
        shape[axis] = grid.n
        d = ifft3(1j * k.reshape(shape) * fh)
        out.append(d.real if np.isrealobj(f) else d)
    return out


def spectral_laplacian(f: np.ndarray, grid: Grid3) -> np.ndarray:
    d = ifft3(-grid.k2 * fft3(f))
    return d.real if np.isrealobj(f) else d


def spectral_derivative(f: np.ndarray, grid: Grid3, orders: tuple[int, int, int]) -> np.ndarray:
    """Mixed partial derivative ``d^|orders| f`` for orders per axis."""
    fh = fft3(f)
    for axis, p in enumerate(orders):
        if p == 0:
            continue
        k = grid.k.copy()
        if p % 2:
            k[grid.n // 2] = 0.0
        shape = [1, 1, 1]
        shape[axis] = grid.n
        fh = fh * (1j * k.reshape(shape)) ** p
    d = ifft3(fh)
    return d.real if np.isrealobj(f) else d
