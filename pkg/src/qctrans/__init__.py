"""Classical and quantum descriptions of a free particle in one dimension.

Closed-form densities for Gaussian packets and their two-packet
superposition, a truncated-Fourier filter that interpolates between the
quantum and classical densities, the left/right decoherence decomposition,
and the numerical oracles used to cross-check them.
"""

__version__ = "0.1.0"

from .core import (ComplexField, Grid, ParameterError, PhysParams, RealField, correspondence,
                   integrate_trapezoid, validate_params)
from .special import PrecisionLossError, erf_complex, erf_diff_scaled, faddeeva, sum_log_terms

__all__ = [
    "__version__",
    "ComplexField",
    "Grid",
    "ParameterError",
    "PhysParams",
    "PrecisionLossError",
    "RealField",
    "correspondence",
    "erf_complex",
    "erf_diff_scaled",
    "faddeeva",
    "integrate_trapezoid",
    "sum_log_terms",
    "validate_params",
]
