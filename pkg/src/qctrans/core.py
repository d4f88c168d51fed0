"""Shared parameter records, sampling grids and sampled fields.

Everything here is immutable once built. Physical quantities are plain
floats in natural units; no unit bookkeeping is attempted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

DEFAULT_X_MIN = -25.0
DEFAULT_X_MAX = 25.0
DEFAULT_N_POINTS = 8192


class ParameterError(ValueError):
    """A physical parameter violates its constraint."""


@dataclass(frozen=True)
class PhysParams:
    """Full parameter set of the free-particle model.

    Attributes
    ----------
    mass, hbar : float
        Particle mass and reduced Planck constant.
    sigma : float
        Width of the quantum wave packet (amplitude decays as
        ``exp(-(x - x0)**2 / (4 sigma**2))``).
    sigma_x, sigma_v : float
        Standard deviations of the classical initial position and velocity.
    x0, v0 : float
        Mean initial position and mean speed.
    d : float
        Separation between the two peaks of the superposed state.

    The defaults are the truncation/decoherence reference values
    (hbar = sigma = m = 1, d = v0 = 10) with the classical spreads tied to
    the quantum ones through :func:`correspondence`.
    """

    mass: float = 1.0
    hbar: float = 1.0
    sigma: float = 1.0
    sigma_x: float = 1.0
    sigma_v: float = 0.5
    x0: float = 0.0
    v0: float = 10.0
    d: float = 10.0

    @classmethod
    def from_quantum(
        cls,
        mass: float = 1.0,
        hbar: float = 1.0,
        sigma: float = 1.0,
        x0: float = 0.0,
        v0: float = 10.0,
        d: float = 10.0,
    ) -> "PhysParams":
        """Build a parameter set whose classical spreads follow the correspondence map."""
        sigma_x, sigma_v = correspondence(sigma, mass, hbar)
        return validate_params(
            cls(mass=mass, hbar=hbar, sigma=sigma, sigma_x=sigma_x,
                sigma_v=sigma_v, x0=x0, v0=v0, d=d)
        )

    def with_(self, **changes) -> "PhysParams":
        """Validated copy with some fields replaced."""
        return validate_params(replace(self, **changes))


_POSITIVE = ("mass", "hbar", "sigma", "sigma_x", "sigma_v")


def validate_params(p: PhysParams) -> PhysParams:
    """Return ``p`` unchanged, or raise :class:`ParameterError` naming the first bad field."""
    for name in ("mass", "hbar", "sigma", "sigma_x", "sigma_v", "x0", "v0", "d"):
        value = getattr(p, name)
        if not math.isfinite(value):
            raise ParameterError(f"{name} must be finite")
        if name in _POSITIVE and value <= 0:
            raise ParameterError(f"{name} must be positive")
    if p.d < 0:
        raise ParameterError("d must be non-negative")
    return p


def correspondence(sigma: float, mass: float, hbar: float) -> tuple[float, float]:
    """Classical spreads ``(sigma_x, sigma_v)`` that reproduce the quantum packet.

    ``sigma_x = sigma`` and ``sigma_v = hbar / (2 sigma m)``.
    """
    for name, value in (("sigma", sigma), ("mass", mass), ("hbar", hbar)):
        if not value > 0:
            raise ParameterError(f"{name} must be positive")
    return sigma, hbar / (2.0 * sigma * mass)


@dataclass(frozen=True)
class Grid:
    """Uniform 1-D sampling of ``[x_min, x_max]`` with ``n_points`` nodes (endpoints included)."""

    x_min: float = DEFAULT_X_MIN
    x_max: float = DEFAULT_X_MAX
    n_points: int = DEFAULT_N_POINTS

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ValueError("grid bounds must be finite")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError("n_points must be an integer >= 2")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RealField:
    """Real samples (typically a probability density) over a grid."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = _frozen_array(self.values, float)
        if values.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x


@dataclass(frozen=True)
class ComplexField:
    """Complex amplitude samples over a grid."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = _frozen_array(self.values, complex)
        if values.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def density(self) -> RealField:
        return RealField(self.grid, np.abs(self.values) ** 2)


def integrate_trapezoid(f: RealField) -> float:
    """Trapezoidal approximation of the integral of ``f`` over its grid."""
    return float(np.trapezoid(f.values, dx=f.grid.dx))
