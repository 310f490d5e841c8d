"""Numerics for elliptic weight functions, dynamical R-matrices and stable envelopes."""

from ._kernels import BACKEND
from .theta import (
    EllipticParams,
    LatticeParams,
    quasi_period_multiplier,
    sample_generic_params,
    theta,
    theta_derivative_at_zero,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "EllipticParams",
    "LatticeParams",
    "quasi_period_multiplier",
    "sample_generic_params",
    "theta",
    "theta_derivative_at_zero",
]
