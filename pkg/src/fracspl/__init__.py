"""Fractional single-phase-lag heat equation: Mittag-Leffler spectral solutions and a Rothe FEM scheme."""

from .fracops import TimeGrid, caputo_discrete, conv_path, rl_kernel
from .mittag import ConvergenceError, MLQuery, ml2, mml, mml_series
from .params import ModelParams
from .rothe import Mesh1D, run_solver
from .spectral1d import SpectralConfig, spectral_solve

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "TimeGrid",
    "rl_kernel",
    "conv_path",
    "caputo_discrete",
    "MLQuery",
    "ConvergenceError",
    "ml2",
    "mml",
    "mml_series",
    "SpectralConfig",
    "spectral_solve",
    "Mesh1D",
    "run_solver",
]
