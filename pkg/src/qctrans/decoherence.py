"""Left/right momentum decomposition of the two-packet state and its reduced density.

``Psi_L`` collects the positive-momentum half of the momentum amplitude,
``Psi_R`` the negative half. The environment enters only through a real
overlap ``epsilon`` multiplying the interference term of the position-space
diagonal::

    rho(x, x) = |Psi_L|**2 + |Psi_R|**2 + 2 epsilon Re(conj(Psi_L) Psi_R)

``epsilon = 1`` is the undisturbed pure state, ``epsilon = 0`` full
decoherence.

The closed forms are written with ``exp(z**2) (1 +- erf(z)) = w(-+i z)``
so the ``exp(alpha**2)`` factors (about ``exp(100)`` for the figure
parameters) never appear on their own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ComplexField, Grid, PhysParams, RealField, validate_params
from .special import _combine, log_faddeeva


@dataclass(frozen=True)
class OverlapParam:
    """Real overlap of the two environment states, in ``[-1, 1]``."""

    epsilon: float

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and abs(self.epsilon) <= 1.0):
            raise ValueError("epsilon must lie in [-1, 1]")


@dataclass(frozen=True)
class LRDecomposition:
    psi_l: ComplexField
    psi_r: ComplexField
    t: float
    params: PhysParams

    def total(self) -> ComplexField:
        return ComplexField(self.psi_l.grid, self.psi_l.values + self.psi_r.values)

    def interference(self) -> RealField:
        return RealField(self.psi_l.grid, 2.0 * np.real(np.conj(self.psi_l.values) * self.psi_r.values))


def _require_superposed(p: PhysParams):
    validate_params(p)
    if not p.d > 0:
        raise ValueError("the left/right decomposition needs a superposed state (d > 0)")


def _log_overlap(p: PhysParams) -> float:
    return float(np.logaddexp(0.0, -p.d**2 / (8.0 * p.sigma**2) - 2.0 * (p.mass * p.sigma * p.v0 / p.hbar) ** 2))


def momentum_amplitude(mom, params: PhysParams):
    """Momentum-space amplitude of the initial two-packet state."""
    _require_superposed(params)
    m, hb, s, d, v0 = params.mass, params.hbar, params.sigma, params.d, params.v0
    q = np.asarray(mom, dtype=float)
    pref = (2.0 * math.pi) ** -0.25 * math.sqrt(s / hb) * math.exp(-0.5 * _log_overlap(params))
    lo = q - m * v0
    hi = q + m * v0
    amp = (np.exp(-(s * lo / hb) ** 2 + 1j * d * lo / (2.0 * hb))
           + np.exp(-(s * hi / hb) ** 2 - 1j * d * hi / (2.0 * hb)))
    return pref * amp * np.exp(-1j * q * params.x0 / hb)


def alpha_arguments(x, t: float, params: PhysParams):
    """``(alpha_1, alpha_2)`` at positions ``x`` (relative to ``x0``); principal square root."""
    m, hb, s, d, v0 = params.mass, params.hbar, params.sigma, params.d, params.v0
    u = np.asarray(x, dtype=float) - params.x0
    root = np.sqrt(complex(4.0 * s**2, 2.0 * hb * t / m))
    a1 = (-4.0 * m * s**2 * v0 + 1j * hb * (2.0 * u - d)) / (2.0 * hb * root)
    a2 = (4.0 * m * s**2 * v0 + 1j * hb * (d + 2.0 * u)) / (2.0 * hb * root)
    return a1, a2


def lr_amplitudes(x, t: float, params: PhysParams):
    """``(Psi_L(x, t), Psi_R(x, t))`` from the erf closed forms."""
    _require_superposed(params)
    m, hb, s, d, v0 = params.mass, params.hbar, params.sigma, params.d, params.v0
    a1, a2 = alpha_arguments(x, t, params)
    big = d**2 / (8.0 * s**2) + 2.0 * (m * s * v0 / hb) ** 2
    log_pre = (0.5 * math.log(m * s) + d**2 / (16.0 * s**2) - 1j * d * m * v0 / (2.0 * hb)
               - math.log(2.0) - 0.25 * math.log(2.0 * math.pi)
               - 0.5 * np.log(complex(2.0 * m * s**2, hb * t))
               - 0.5 * float(np.logaddexp(big, 0.0)))
    out = []
    for sign in (-1.0, 1.0):  # Psi_L uses w(-i alpha), Psi_R uses w(+i alpha)
        w1 = log_faddeeva(sign * 1j * a1)
        w2 = log_faddeeva(sign * 1j * a2)
        scale, s_sum, _ = _combine(
            np.stack([np.asarray(w1.log_magnitude), np.asarray(w2.log_magnitude)]) + log_pre.real,
            np.stack([np.asarray(w1.phase), np.asarray(w2.phase)]) + log_pre.imag,
        )
        out.append(np.exp(scale) * s_sum)
    return out[0], out[1]


def lr_split(grid: Grid, t: float, params: PhysParams) -> LRDecomposition:
    psi_l, psi_r = lr_amplitudes(grid.x, t, params)
    return LRDecomposition(ComplexField(grid, psi_l), ComplexField(grid, psi_r), t, params)


def reduced_density_diagonal(x, t: float, params: PhysParams, overlap: OverlapParam):
    """Position-space diagonal of the reduced density operator.

    Evaluated as ``|eps| |Psi_L +- Psi_R|**2 + (1 - |eps|) (|Psi_L|**2 + |Psi_R|**2)``,
    which equals the expanded form and stays non-negative in the tails where
    the two components cancel.
    """
    psi_l, psi_r = lr_amplitudes(x, t, params)
    eps = overlap.epsilon
    mixed = np.abs(psi_l + math.copysign(1.0, eps) * psi_r) ** 2
    out = abs(eps) * mixed + (1.0 - abs(eps)) * (np.abs(psi_l) ** 2 + np.abs(psi_r) ** 2)
    return out[()] if np.ndim(out) == 0 else out


def interference_term(grid: Grid, t: float, params: PhysParams) -> RealField:
    """``2 Re(conj(Psi_L) Psi_R)`` on the grid."""
    return lr_split(grid, t, params).interference()
