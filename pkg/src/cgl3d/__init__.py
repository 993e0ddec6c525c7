"""Pseudospectral ETDRK4 solver for the perturbed complex Ginzburg-Landau
equation in 3D, with first-order far-field theory and decay diagnostics."""

from .spectral import ComplexField3, Grid3
from .model import Anisotropic, GridSample, ModelParams, RadialPower
from .etdrk4 import BlowUpError, EtdCoeffs, integrate, phi_coeffs, step
from .linear_theory import CutoffP, FirstOrder, SolvabilityError, WeightedSpaceSpec
from .diagnostics import DecayFit, Profile1D
from .config import RunConfig

__version__ = "0.1.0"

__all__ = [
    "Anisotropic", "BlowUpError", "ComplexField3", "CutoffP", "DecayFit", "EtdCoeffs",
    "FirstOrder", "Grid3", "GridSample", "ModelParams", "Profile1D", "RadialPower",
    "RunConfig", "SolvabilityError", "WeightedSpaceSpec", "integrate", "phi_coeffs", "step",
]
