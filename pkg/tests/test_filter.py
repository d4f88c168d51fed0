import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from qctrans.core import Grid, PhysParams, RealField, integrate_trapezoid
from qctrans.filter import (GridTooNarrowError, SpectralDensity, cell_weights, default_k0_values,
                            spectral_density, spectrum_fft, transition_scan, truncated_density,
                            truncated_density_at, truncated_density_fft)
from qctrans.quantum import WavePacketSpec, density_superposed
from qctrans.special import PrecisionLossError

BASE = PhysParams.from_quantum(mass=1.0, hbar=1.0, sigma=1.0, x0=0.0, v0=10.0, d=10.0)
SUPER = WavePacketSpec(BASE, superposed=True)


def closed_form_oracle(x, t, k0, m=1, hb=1, s=1, d=10, v0=10, dps=60):
    """Truncated density from the four erf brackets, transcribed literally at 60 digits (x0 = 0)."""
    with mpmath.workdps(dps):
        x, t, k0, m, hb, s, d, v0 = map(mpmath.mpf, (x, t, k0, m, hb, s, d, v0))
        j = mpmath.mpc(0, 1)
        root = mpmath.sqrt(2 * hb**2 * t**2 + 8 * m**2 * s**4)
        den = hb**3 * t**2 + 4 * hb * m**2 * s**4
        lo = hb**2 * t * (d * m - hb * k0 * t) + 4 * m**2 * s**4 * (2 * m * v0 - hb * k0)
        hi = hb**2 * t * (d * m + hb * k0 * t) + 4 * m**2 * s**4 * (hb * k0 + 2 * m * v0)
        im = 4 * hb * m**2 * s**2 * x
        b1, b2 = (lo - j * im) / (2 * hb * m * s * root), (hi - j * im) / (2 * hb * m * s * root)
        b3, b4 = (lo + j * im) / (2 * hb * m * s * root), (hi + j * im) / (2 * hb * m * s * root)
        kr = k0 * (hb**2 * t**2 + 4 * m**2 * s**4)
        g1 = (-kr - 2 * j * m**2 * s**2 * (d - 2 * t * v0 - 2 * x)) / (2 * m * s * root)
        g2 = (kr - 2 * j * m**2 * s**2 * (d - 2 * t * v0 - 2 * x)) / (2 * m * s * root)
        g3 = (-kr + 2 * j * m**2 * s**2 * (d - 2 * t * v0 + 2 * x)) / (2 * m * s * root)
        g4 = (kr + 2 * j * m**2 * s**2 * (d - 2 * t * v0 + 2 * x)) / (2 * m * s * root)
        pre = mpmath.exp(
            m * (hb * (-3 * d**2 * m * s**2 - 2 * j * d * hb * t * x - 12 * m * s**2 * x**2)
                 + 8 * m * s**2 * v0 * (d * hb * t - 2 * j * m * s**2 * x) - 12 * hb * m * s**2 * t**2 * v0**2)
            / (2 * hb**3 * t**2 + 8 * hb * m**2 * s**4)
        ) / (4 * mpmath.sqrt(mpmath.pi) * mpmath.sqrt(2 * s**2 + hb**2 * t**2 / (2 * m**2 * s**2))
             * (1 + mpmath.exp(-d**2 / (8 * s**2) - 2 * m**2 * s**2 * v0**2 / hb**2)))
        quad = d**2 - 2 * d * t * v0 + 4 * t**2 * v0**2 + 4 * x**2
        e1 = mpmath.exp(m**2 * s**2 * quad / (hb**2 * t**2 + 4 * m**2 * s**4))
        e2 = mpmath.exp(m * (hb * m * s**2 * quad + 2 * j * d * hb**2 * t * x + 16 * j * m**2 * s**4 * v0 * x) / den)
        e3 = mpmath.exp(m * (hb * m * s**2 * (d**2 - 2 * t * v0 * (d + 2 * x) + 2 * d * x + 4 * t**2 * v0**2 + 4 * x**2)
                             + j * d * hb**2 * t * x + 8 * j * m**2 * s**4 * v0 * x) / den)
        e4 = mpmath.exp(m * (hb * m * s**2 * (d**2 - 2 * d * (t * v0 + x) + 4 * (t**2 * v0**2 + t * v0 * x + x**2))
                             + j * d * hb**2 * t * x + 8 * j * m**2 * s**4 * v0 * x) / den)
        erf = mpmath.erf
        val = pre * ((erf(b2) - erf(b1)) * e1 + (erf(b4) - erf(b3)) * e2
                     + (erf(g2) - erf(g1)) * e3 + (erf(g4) - erf(g3)) * e4)
        return float(val.real)


def test_spectral_density_at_zero():
    assert spectral_density(0.0, 0.3, BASE) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)


def test_spectral_density_hermitian():
    k = np.random.default_rng(0).uniform(-40, 40, 100)
    sd = SpectralDensity(BASE, 0.3)
    np.testing.assert_allclose(sd(-k), np.conj(sd(k)), rtol=1e-13, atol=1e-300)


def test_spectral_density_matches_fft():
    g = Grid()
    k, spec = spectrum_fft(g, 0.3, BASE, pad_factor=4)
    near = np.abs(np.abs(k) - 5.0) < 0.5
    np.testing.assert_allclose(spec[near], spectral_density(k[near], 0.3, BASE), rtol=1e-6)
    # the same discrete sum evaluated exactly at k = 5
    f = density_superposed(g.x, 0.3, SUPER)
    dft = np.sum(f * np.exp(-5j * g.x)) * g.dx / math.sqrt(2 * math.pi)
    assert abs(dft - spectral_density(5.0, 0.3, BASE)) <= 1e-6 * abs(dft)


def test_spectral_density_matches_direct_transform():
    x = np.linspace(-25, 25, 20001)
    f = density_superposed(x, 0.4, SUPER)
    for k in (0.7, 5.0, 19.5):
        direct = np.trapezoid(f * np.exp(-1j * k * x), x) / math.sqrt(2 * math.pi)
        assert spectral_density(k, 0.4, BASE) == pytest.approx(direct, rel=1e-8, abs=1e-14)


def test_spectral_density_translation_phase():
    p = BASE.with_(x0=1.7)
    k = np.linspace(-20, 20, 41)
    np.testing.assert_allclose(spectral_density(k, 0.3, p), spectral_density(k, 0.3, BASE) * np.exp(-1j * k * 1.7),
                               rtol=1e-12, atol=1e-300)


def test_parseval():
    f = lambda k: abs(spectral_density(k, 0.3, BASE)) ** 2  # noqa: E731
    i60 = integrate.quad(f, -60, 60, limit=400, points=[-20.5, 0, 20.5], epsabs=1e-14, epsrel=1e-13)[0]
    i80 = integrate.quad(f, -80, 80, limit=400, points=[-20.5, 0, 20.5], epsabs=1e-14, epsrel=1e-13)[0]
    g = Grid()
    space = integrate_trapezoid(RealField(g, density_superposed(g.x, 0.3, SUPER) ** 2))
    assert abs(i60 - i80) < 1e-10
    assert abs(i60 - space) < 1e-8


def test_large_cutoff_recovers_density():
    g = Grid()
    res = truncated_density(g, 0.3, 60.0, BASE)
    assert np.max(np.abs(res.field.values - density_superposed(g.x, 0.3, SUPER))) < 1e-6


def test_zero_cutoff():
    g = Grid(-10, 10, 101)
    np.testing.assert_array_equal(truncated_density(g, 0.3, 0.0, BASE).field.values, 0.0)
    np.testing.assert_array_equal(truncated_density_fft(Grid(), 0.3, 0.0, BASE).values, 0.0)


def test_quantum_plateau_value():
    assert abs(truncated_density_at(0.5, 0.3, 40.0, BASE) - 0.0378736) < 1e-3


@pytest.mark.parametrize("x, k0", [(0.5, 5), (0.5, 18), (0.5, 20), (-3.0, 15), (4.0, 25), (10.0, 12), (-20.0, 30)])
def test_truncated_matches_high_precision_transcription(x, k0):
    ref = closed_form_oracle(x, 0.3, k0)
    assert truncated_density_at(x, 0.3, k0, BASE) == pytest.approx(ref, rel=1e-11, abs=1e-16)


def test_truncated_translation():
    p = BASE.with_(x0=2.0)
    x = np.linspace(-8, 12, 81)
    np.testing.assert_allclose(truncated_density_at(x, 0.3, 19.0, p), truncated_density_at(x - 2.0, 0.3, 19.0, BASE),
                               rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("k0", [10.0, 17.0, 18.0, 19.0, 20.0, 21.0, 22.0, 30.0])
def test_imaginary_residue_small(k0):
    res = truncated_density(Grid(), 0.3, k0, BASE)
    assert res.max_imag_residue < 1e-8
    assert not res.used_fallback


def test_fft_identity_above_nyquist():
    g = Grid()
    out = truncated_density_fft(g, 0.3, 1.01 * math.pi / g.dx, BASE)
    np.testing.assert_allclose(out.values, density_superposed(g.x, 0.3, SUPER), rtol=0, atol=1e-12)


@pytest.mark.parametrize("t", [0.2, 0.3, 0.4])
@pytest.mark.parametrize("k0", [5.0, 10.0, 20.0, 30.0])
def test_dual_path_agreement(t, k0):
    g = Grid()
    a = truncated_density(g, t, k0, BASE).field.values
    b = truncated_density_fft(g, t, k0, BASE).values
    assert np.max(np.abs(a - b)) < 1e-5


def test_fft_grid_too_narrow():
    with pytest.raises(GridTooNarrowError, match="grid too narrow"):
        truncated_density_fft(Grid(-5, 5, 512), 0.3, 10.0, BASE)


def test_cell_weights():
    k = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    np.testing.assert_allclose(cell_weights(k, 0.5, 0.6), [0.0, 0.7, 1.0, 0.7, 0.0])


def test_monotone_spectral_content():
    g = Grid()
    full = density_superposed(g.x, 0.3, SUPER)
    errs = [np.sqrt(integrate_trapezoid(RealField(g, (truncated_density(g, 0.3, k0, BASE).field.values - full) ** 2)))
            for k0 in (2.0, 6.0, 12.0, 17.0, 19.0, 21.0, 25.0, 35.0)]
    assert all(b <= a + 1e-9 for a, b in zip(errs, errs[1:]))


def test_transition_scan_plateaus():
    scan = transition_scan(0.5, 0.3, [float(k) for k in range(0, 41)], BASE)
    values = dict(scan)
    assert values[0.0] == 0.0
    for k0 in range(10, 18):
        assert abs(values[k0] / 0.0749317 - 1) < 0.02
    for k0 in range(35, 41):
        assert abs(values[k0] / 0.0378736 - 1) < 0.005


def test_transition_scan_requires_sorted():
    with pytest.raises(ValueError):
        transition_scan(0.5, 0.3, [3.0, 1.0], BASE)


def test_default_k0_values():
    ks = default_k0_values()
    assert ks[0] == 0.0 and ks[-1] == 40.0 and len(ks) == 161


def test_negative_cutoff_rejected():
    with pytest.raises(ValueError):
        truncated_density_at(0.0, 0.3, -1.0, BASE)
    with pytest.raises(ValueError):
        truncated_density(Grid(), 0.3, -1.0, BASE)


def test_precision_loss_falls_back_to_fft():
    g = Grid()
    res = truncated_density(g, 0.3, 20.0, BASE, min_digits=16.0)  # demands more digits than a double has
    assert res.used_fallback and len(res.fallback_indices) == g.n_points
    np.testing.assert_array_equal(res.field.values, truncated_density_fft(g, 0.3, 20.0, BASE).values)
    with pytest.raises(PrecisionLossError, match="k0=20"):
        truncated_density_at(0.5, 0.3, 20.0, BASE, min_digits=16.0)


def test_precision_loss_without_fallback_reports_location():
    with pytest.raises(PrecisionLossError, match="x=-5.*k0=20.*FFT fallback"):
        truncated_density(Grid(-5, 5, 101), 0.3, 20.0, BASE, min_digits=16.0)
