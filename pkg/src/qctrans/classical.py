"""Classical free particle with Gaussian-distributed initial conditions.

Final positions follow ``x_f = x_i + v_i t``. The densities below are the
closed-form convolutions of the initial position and velocity laws; the
Monte Carlo sampler draws the same trajectories and is used as an
independent check of those closed forms.

Superposed scenarios are translated rigidly by ``x0``; the symmetric
two-Gaussian setup corresponds to ``x0 = 0``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import Grid, PhysParams, RealField, validate_params

# Samples per RNG block. Part of the reproducibility contract: changing it
# changes the drawn numbers, changing the worker count does not.
BLOCK_SIZE = 1 << 20
_UINT64 = 1 << 64


@dataclass(frozen=True)
class ClassicalScenario:
    params: PhysParams
    superposed: bool = False

    def __post_init__(self):
        validate_params(self.params)
        if self.superposed and not self.params.d > 0:
            raise ValueError("a superposed scenario needs d > 0")


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo sampling and histogram settings."""

    n_samples: int
    seed: int = 0
    histogram_bins: int = 200
    histogram_range: tuple[float, float] = (-15.0, 15.0)

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ValueError("n_samples must be a positive integer")
        if int(self.histogram_bins) != self.histogram_bins or self.histogram_bins < 1:
            raise ValueError("histogram_bins must be a positive integer")
        if not 0 <= self.seed < _UINT64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        lo, hi = self.histogram_range
        if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
            raise ValueError("histogram_range must be a finite, non-degenerate interval")


@dataclass(frozen=True)
class Histogram:
    """Density-normalised histogram: ``density = counts / (n_samples * bin_width)``."""

    edges: np.ndarray
    counts: np.ndarray
    n_samples: int

    @property
    def bin_width(self) -> float:
        return float(self.edges[1] - self.edges[0])

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.n_samples * self.bin_width)

    def to_field(self) -> RealField:
        """Density on the grid of bin centres (needs at least two bins)."""
        c = self.centers
        return RealField(Grid(float(c[0]), float(c[-1]), len(c)), self.density)


def _gaussian(x, mean, var):
    return np.exp(-((x - mean) ** 2) / (2.0 * var)) / np.sqrt(2.0 * np.pi * var)


def classical_density_single(x, t: float, p: PhysParams):
    """Normal law of final positions: mean ``x0 + v0 t``, variance ``sigma_x**2 + sigma_v**2 t**2``."""
    validate_params(p)
    var = p.sigma_x**2 + p.sigma_v**2 * t**2
    return _gaussian(np.asarray(x, dtype=float), p.x0 + p.v0 * t, var)


def classical_density_superposed(x, t: float, p: PhysParams):
    """Half-sum of the two approaching Gaussians.

    The packet starting at ``-d/2`` moves right with mean speed ``v0``, the
    one at ``+d/2`` moves left; both have variance
    ``sigma_x**2 + sigma_v**2 t**2``.
    """
    validate_params(p)
    var = p.sigma_x**2 + p.sigma_v**2 * t**2
    u = np.asarray(x, dtype=float) - p.x0
    shift = p.d / 2.0 - p.v0 * t
    return 0.5 * (_gaussian(u, shift, var) + _gaussian(u, -shift, var))


def _block_rng(seed: int, block: int) -> np.random.Generator:
    # Philox is counter based: the block index occupies the top counter word,
    # so every block is an independent, position-addressable stream.
    return np.random.Generator(np.random.Philox(key=seed, counter=block << 192))


def _sample_block(scenario: ClassicalScenario, t: float, seed: int, block: int, size: int):
    p = scenario.params
    rng = _block_rng(seed, block)
    if scenario.superposed:
        # component identity (not the sign of x_i) selects the velocity law
        left = rng.random(size) < 0.5
        centre = np.where(left, -p.d / 2.0, p.d / 2.0) + p.x0
        mean_v = np.where(left, p.v0, -p.v0)
    else:
        centre = p.x0
        mean_v = p.v0
    xi = centre + p.sigma_x * rng.standard_normal(size)
    vi = mean_v + p.sigma_v * rng.standard_normal(size)
    return xi + vi * t


def sample_final_positions(scenario: ClassicalScenario, t: float, n_samples: int, seed: int = 0):
    """Raw final positions ``x_i + v_i t`` (deterministic in ``seed``)."""
    out = []
    for block, start in enumerate(range(0, n_samples, BLOCK_SIZE)):
        out.append(_sample_block(scenario, t, seed, block, min(BLOCK_SIZE, n_samples - start)))
    return np.concatenate(out)


def sample_trajectories(scenario: ClassicalScenario, t: float, mc: McConfig,
                        workers: int = 1) -> Histogram:
    """Histogram of Monte Carlo final positions at time ``t``.

    Samples are drawn in fixed-size blocks, each from its own counter-based
    stream, and per-block integer counts are summed. The result depends only
    on ``(seed, n_samples, bins, range)``, never on ``workers``.
    """
    edges = np.linspace(*mc.histogram_range, mc.histogram_bins + 1)
    starts = list(range(0, mc.n_samples, BLOCK_SIZE))

    def count(block: int) -> np.ndarray:
        size = min(BLOCK_SIZE, mc.n_samples - starts[block])
        xf = _sample_block(scenario, t, mc.seed, block, size)
        return np.histogram(xf, bins=edges)[0]

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_block = list(pool.map(count, range(len(starts))))
    else:
        per_block = [count(b) for b in range(len(starts))]
    counts = np.sum(per_block, axis=0, dtype=np.int64)
    return Histogram(edges=edges, counts=counts, n_samples=mc.n_samples)


def bin_averaged_density(density, edges: np.ndarray, order: int = 8) -> np.ndarray:
    """Average of ``density(x)`` over each histogram bin (Gauss-Legendre per bin)."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    x = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
    return 0.5 * (density(x) * weights).sum(axis=1)


def histogram_l1(hist: Histogram, density) -> float:
    """L1 distance between the histogram and the bin averages of ``density``."""
    ref = bin_averaged_density(density, hist.edges)
    return float(np.sum(np.abs(hist.density - ref)) * hist.bin_width)
