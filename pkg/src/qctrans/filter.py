"""Truncated Fourier reconstruction of the superposed quantum density.

Transform convention (symmetric pair)::

    P~(k, t) = (2 pi)**-0.5 * int |Psi(x, t)|**2 exp(-i k x) dx
    P(x, t, k0) = (2 pi)**-0.5 * int_{-k0}^{k0} P~(k, t) exp(i k x) dk

The spectrum of the two-packet density is a sum of four Gaussians in ``k``::

    P~ = N * [exp(C - a k**2 - b k) + exp(C - a k**2 + b k)
              + exp(-a k**2 + i q k) + exp(-a k**2 - i q k)]

with ``a = (hbar**2 t**2 + 4 m**2 sigma**4) / (8 m**2 sigma**2)``,
``b = d hbar t / (4 m sigma**2) + 2 m sigma**2 v0 / hbar``,
``C = -d**2 / (8 sigma**2) - 2 m**2 sigma**2 v0**2 / hbar**2``,
``q = d/2 - v0 t`` and ``N = 1 / (2 sqrt(2 pi) (1 + exp(C)))``. The first two
Gaussians sit at ``k = -+b / (2a)`` and carry the interference fringes; the
last two are the lobes. Each truncated Gaussian integral is an erf
difference whose arguments are the ``beta``/``gamma`` values below. For the
reference parameters ``C = -212.5`` and ``b**2 / (4a) ~ 210``, so every term is
assembled in log space before exponentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Grid, PhysParams, RealField, validate_params
from .quantum import WavePacketSpec, density_superposed, log_overlap_factor
from .special import LogComplexTerm, PrecisionLossError, _combine, erf_diff_parts

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class GridTooNarrowError(ValueError):
    """The density does not vanish at the grid edges."""


@dataclass(frozen=True)
class SpectralDensity:
    """The closed-form transform at fixed ``t``; call it with wavenumbers."""

    params: PhysParams
    t: float

    def __call__(self, k):
        return spectral_density(k, self.t, self.params)


@dataclass(frozen=True)
class TruncationResult:
    field: RealField
    k0: float
    max_imag_residue: float
    # grid indices that were filled in by the FFT path after precision loss
    fallback_indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int), repr=False)

    @property
    def used_fallback(self) -> bool:
        return len(self.fallback_indices) > 0


def _spectral_coefficients(t: float, p: PhysParams):
    m, hb, s, d, v0 = p.mass, p.hbar, p.sigma, p.d, p.v0
    a = (hb**2 * t**2 + 4.0 * m**2 * s**4) / (8.0 * m**2 * s**2)
    b = d * hb * t / (4.0 * m * s**2) + 2.0 * m * s**2 * v0 / hb
    c = -d**2 / (8.0 * s**2) - 2.0 * m**2 * s**2 * v0**2 / hb**2
    q = d / 2.0 - v0 * t
    log_norm = -math.log(2.0) - _LOG_SQRT_2PI - log_overlap_factor(p)
    return a, b, c, q, log_norm


def spectral_density(k, t: float, p: PhysParams):
    """Closed-form Fourier transform of the superposed density at wavenumber(s) ``k``."""
    validate_params(p)
    a, b, c, q, log_norm = _spectral_coefficients(t, p)
    k = np.asarray(k, dtype=float)
    quad = log_norm - a * k * k
    zeros = np.zeros_like(k)
    lm = np.stack([quad + c - b * k, quad + c + b * k, quad, quad])
    ph = np.stack([zeros, zeros, q * k, -q * k]) - p.x0 * k
    scale, s, _ = _combine(lm, ph)
    out = np.exp(scale) * s
    return out[()] if out.ndim == 0 else out


def _root(t: float, p: PhysParams) -> float:
    return math.sqrt(2.0 * p.hbar**2 * t**2 + 8.0 * p.mass**2 * p.sigma**4)


def beta_arguments(x, t: float, k0: float, p: PhysParams):
    """The four ``beta`` erf arguments (interference Gaussians) at positions ``x``.

    Positions are taken relative to ``x0``.
    """
    m, hb, s, d, v0 = p.mass, p.hbar, p.sigma, p.d, p.v0
    u = np.asarray(x, dtype=float) - p.x0
    den = 2.0 * hb * m * s * _root(t, p)
    minus = hb**2 * t * (d * m - hb * k0 * t) + 4.0 * m**2 * s**4 * (2.0 * m * v0 - hb * k0)
    plus = hb**2 * t * (d * m + hb * k0 * t) + 4.0 * m**2 * s**4 * (hb * k0 + 2.0 * m * v0)
    im = 4.0 * hb * m**2 * s**2 * u
    return ((minus - 1j * im) / den, (plus - 1j * im) / den,
            (minus + 1j * im) / den, (plus + 1j * im) / den)


def gamma_arguments(x, t: float, k0: float, p: PhysParams):
    """The four ``gamma`` erf arguments (lobe Gaussians) at positions ``x``."""
    m, hb, s, d, v0 = p.mass, p.hbar, p.sigma, p.d, p.v0
    u = np.asarray(x, dtype=float) - p.x0
    den = 2.0 * m * s * _root(t, p)
    re = k0 * (hb**2 * t**2 + 4.0 * m**2 * s**4)
    i12 = 2.0 * m**2 * s**2 * (d - 2.0 * t * v0 - 2.0 * u)
    i34 = 2.0 * m**2 * s**2 * (d - 2.0 * t * v0 + 2.0 * u)
    return ((-re - 1j * i12) / den, (re - 1j * i12) / den,
            (-re + 1j * i34) / den, (re + 1j * i34) / den)


def _truncated_parts(x, t: float, k0: float, p: PhysParams):
    """Four erf-difference terms of P(x, t, k0), each with its log prefactor.

    ``int_{-k0}^{k0} exp(-a k**2 + B k) dk``
    ``= sqrt(pi / a) / 2 * exp(B**2 / (4a)) * (erf(k0 sqrt(a) - B / (2 sqrt(a))) - erf(-k0 sqrt(a) - B / (2 sqrt(a))))``.
    """
    a, b, c, q, log_norm = _spectral_coefficients(t, p)
    u = np.asarray(x, dtype=float) - p.x0
    beta1, beta2, beta3, beta4 = beta_arguments(x, t, k0, p)
    gamma1, gamma2, gamma3, gamma4 = gamma_arguments(x, t, k0, p)
    base = log_norm - _LOG_SQRT_2PI + 0.5 * math.log(math.pi / a) - math.log(2.0)
    pairs = []
    # B: linear coefficient of k in each spectral Gaussian times exp(i k x).
    # The integral is even in B, so each pair may use either sign of B.
    for B, const, lo, hi in (
        (-b + 1j * u, c, beta1, beta2),
        (b + 1j * u, c, beta3, beta4),
        (1j * (u + q), 0.0, gamma3, gamma4),
        (1j * (u - q), 0.0, gamma1, gamma2),
    ):
        expo = B * B / (4.0 * a)
        pre = LogComplexTerm(base + const + expo.real, expo.imag)
        pairs.append((lo, hi, pre))
    return pairs


def _truncated_values(x, t: float, k0: float, p: PhysParams):
    """Complex P(x, t, k0) and the worst surviving digit count per point."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if k0 == 0:
        return np.zeros(x.shape, dtype=complex), np.full(x.shape, np.inf)
    total = np.zeros(x.shape, dtype=complex)
    digits = np.full(x.shape, np.inf)
    for lo, hi, pre in _truncated_parts(x, t, k0, p):
        value, dig = erf_diff_parts(lo, hi, pre)
        total += value
        digits = np.minimum(digits, dig)
    return total, digits


def truncated_density_at(x, t: float, k0: float, p: PhysParams, min_digits: float = 6.0):
    """P(x, t, k0) at arbitrary positions through the erf closed form.

    Raises :class:`PrecisionLossError` if any point keeps fewer than
    ``min_digits`` significant digits.
    """
    validate_params(p)
    if k0 < 0:
        raise ValueError("k0 must be non-negative")
    scalar = np.ndim(x) == 0
    values, digits = _truncated_values(x, t, k0, p)
    bad = digits < min_digits
    if np.any(bad):
        xb = np.atleast_1d(x)[bad][0]
        raise PrecisionLossError(
            f"truncated density lost precision at x={xb:g}, k0={k0:g}", mask=bad, digits=digits
        )
    out = values.real
    return float(out[0]) if scalar else out


def truncated_density(grid: Grid, t: float, k0: float, p: PhysParams,
                      min_digits: float = 6.0) -> TruncationResult:
    """P(x, t, k0) on ``grid`` from the erf closed form.

    Points whose erf differences lose precision are taken from
    :func:`truncated_density_fft` instead and listed in
    ``fallback_indices``; if that path is unavailable the precision error is
    raised with the offending ``(x, k0)``.
    """
    validate_params(p)
    if k0 < 0:
        raise ValueError("k0 must be non-negative")
    x = grid.x
    values, digits = _truncated_values(x, t, k0, p)
    bad = np.flatnonzero(digits < min_digits)
    residue = float(np.max(np.abs(values.imag))) if len(values) else 0.0
    real = values.real.copy()
    if len(bad):
        try:
            fft = truncated_density_fft(grid, t, k0, p)
        except GridTooNarrowError:
            raise PrecisionLossError(
                f"truncated density lost precision at x={x[bad[0]]:g}, k0={k0:g} "
                "and the FFT fallback is unavailable on this grid",
                mask=digits < min_digits, digits=digits,
            ) from None
        real[bad] = fft.values[bad]
        good = np.ones(len(x), bool)
        good[bad] = False
        residue = float(np.max(np.abs(values.imag[good]))) if good.any() else 0.0
    return TruncationResult(RealField(grid, real), float(k0), residue, bad)


def _check_edges(f: np.ndarray, edge_tol: float):
    if max(abs(f[0]), abs(f[-1])) >= edge_tol:
        raise GridTooNarrowError(
            f"grid too narrow: density at the edges is {max(abs(f[0]), abs(f[-1])):.3g} "
            f"(needs < {edge_tol:g})"
        )


def _padded_length(n: int, pad_factor: int) -> int:
    return 1 << int(math.ceil(math.log2(n * pad_factor)))


def cell_weights(k: np.ndarray, dk: float, k0: float) -> np.ndarray:
    """Fraction of each spectral cell ``[k - dk/2, k + dk/2]`` lying inside ``[-k0, k0]``."""
    lo = np.maximum(k - dk / 2.0, -k0)
    hi = np.minimum(k + dk / 2.0, k0)
    return np.clip((hi - lo) / dk, 0.0, 1.0)


def spectrum_fft(grid: Grid, t: float, p: PhysParams, pad_factor: int = 1,
                 edge_tol: float = 1e-12):
    """Discrete transform of the sampled density in the symmetric convention.

    Returns ``(k, P~(k))`` in FFT bin order; bins are scaled by
    ``dx / sqrt(2 pi)`` and phase-shifted to the grid origin.
    """
    f = density_superposed(grid.x, t, WavePacketSpec(p, superposed=True))
    _check_edges(f, edge_tol)
    n = _padded_length(grid.n_points, pad_factor) if pad_factor > 1 else grid.n_points
    k = 2.0 * math.pi * np.fft.fftfreq(n, d=grid.dx)
    spec = np.fft.fft(f, n=n) * grid.dx / math.sqrt(2.0 * math.pi) * np.exp(-1j * k * grid.x_min)
    return k, spec


def truncated_density_fft(grid: Grid, t: float, k0: float, p: PhysParams,
                          pad_factor: int = 64, edge_tol: float = 1e-12) -> RealField:
    """P(x, t, k0) by sampling the density, filtering its DFT and inverting.

    The samples are zero-padded to at least ``pad_factor`` times the grid
    length so the spectral cells are fine; the cell straddling ``+-k0``
    is weighted by the fraction of it inside the cutoff, which makes the
    discrete sum a midpoint rule for the continuum integral.

    Raises
    ------
    GridTooNarrowError
        If the sampled density is not below ``edge_tol`` at both edges.
    """
    validate_params(p)
    if k0 < 0:
        raise ValueError("k0 must be non-negative")
    f = density_superposed(grid.x, t, WavePacketSpec(p, superposed=True))
    _check_edges(f, edge_tol)
    n = _padded_length(grid.n_points, max(pad_factor, 1))
    k = 2.0 * math.pi * np.fft.fftfreq(n, d=grid.dx)
    dk = 2.0 * math.pi / (n * grid.dx)
    spec = np.fft.fft(f, n=n)
    if k0 < math.pi / grid.dx:
        spec *= cell_weights(k, dk, k0)
    out = np.fft.ifft(spec)[: grid.n_points].real
    return RealField(grid, out)


def transition_scan(x: float, t: float, k0_values, p: PhysParams):
    """``[(k0, P(x, t, k0)), ...]`` over ascending cutoffs."""
    k0_values = [float(k) for k in k0_values]
    if any(b < a for a, b in zip(k0_values, k0_values[1:])):
        raise ValueError("k0_values must be sorted ascending")
    return [(k0, truncated_density_at(x, t, k0, p)) for k0 in k0_values]


def default_k0_values(k0_max: float = 40.0, step: float = 0.25) -> list[float]:
    n = int(round(k0_max / step))
    return [i * step for i in range(n + 1)]
