"""Pseudospectral laboratory for the generalized Camassa-Holm family

    m_t + u^p m_x + b u^(p-1) u_x m = -(g(u))_x + (b+1) u^p u_x,   m = (1 - d_xx)^k u

on a periodic interval: solver, conservation and growth diagnostics,
randomized inequality checks and a small CLI.
"""

from .errors import (
    BlowUpError,
    ConfigError,
    GCHError,
    HypothesisError,
    NonFiniteError,
    SnapshotError,
    StepLimitReached,
)
from .model import PRESETS, ModelParams, preset
from .spectral import Field, GridSpec, Spectrum

__version__ = "0.1.0"

__all__ = [
    "GridSpec",
    "Field",
    "Spectrum",
    "ModelParams",
    "PRESETS",
    "preset",
    "GCHError",
    "NonFiniteError",
    "BlowUpError",
    "HypothesisError",
    "ConfigError",
    "SnapshotError",
    "StepLimitReached",
]
