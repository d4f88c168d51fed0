"""Complex error function and overflow-safe sums of huge exponentials.

The truncated-Fourier and left/right-decomposition formulas multiply
error functions whose magnitude reaches ``exp(300)`` by prefactors of order
``exp(-300)``. Nothing in here ever forms such a number: terms travel as
``(log |term|, phase)`` pairs and are combined by factoring out the largest
magnitude, like a log-sum-exp with complex phases.

The Faddeeva function ``w(z) = exp(-z**2) erfc(-i z)`` is the single
primitive. In the upper half-plane it is bounded, so it is evaluated there
(Weideman's rational expansion for moderate ``|z|``, Laplace's continued
fraction further out) and everything else is reached by reflection.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "LogComplexTerm",
    "PrecisionLossError",
    "faddeeva",
    "log_faddeeva",
    "erf_complex",
    "erf_diff_scaled",
    "sum_log_terms",
]

EPS = np.finfo(float).eps
MAX_DIGITS = -math.log10(EPS)  # ~15.65 decimal digits in a double
MIN_DIGITS = 6.0
_LOG_MAX = math.log(np.finfo(float).max)
_SQRT_PI = math.sqrt(math.pi)

# Weideman expansion with N = 40 terms: ~1e-15 relative in the upper half-plane.
_WEIDEMAN_N = 40
# Beyond this radius the continued fraction is at machine precision with 20 levels.
_CF_RADIUS = 7.0
_CF_DEPTH = 20
# Maclaurin series radius for erf (avoids the 1 - (1 - small) cancellation).
_SERIES_RADIUS = 0.5


class PrecisionLossError(ArithmeticError):
    """Cancellation left fewer than ``MIN_DIGITS`` significant digits.

    ``mask`` flags the offending entries when the inputs were arrays.
    """

    def __init__(self, message: str, mask=None, digits=None):
        super().__init__(message)
        self.mask = mask
        self.digits = digits


class LogComplexTerm(NamedTuple):
    """The complex number ``exp(log_magnitude) * exp(1j * phase)``.

    Fields may be scalars or equally shaped arrays. A zero is represented by
    ``log_magnitude = -inf``.
    """

    log_magnitude: float
    phase: float

    def to_complex(self):
        lm = np.asarray(self.log_magnitude, dtype=float)
        ph = np.asarray(self.phase, dtype=float)
        with np.errstate(over="raise"):
            out = np.where(np.isneginf(lm), 0.0, np.exp(lm) * np.exp(1j * ph))
        return out[()] if out.ndim == 0 else out

    @classmethod
    def from_complex(cls, value) -> "LogComplexTerm":
        value = np.asarray(value, dtype=complex)
        with np.errstate(divide="ignore"):
            lm = np.log(np.abs(value))
        ph = np.angle(value)
        if value.ndim == 0:
            return cls(float(lm), float(ph))
        return cls(lm, ph)


def _weideman_coefficients(n: int) -> tuple[float, np.ndarray]:
    m = 2 * n
    k = np.arange(-m + 1, m)
    scale = math.sqrt(n / math.sqrt(2.0))
    t = scale * np.tan(k * math.pi / (2 * m))
    f = np.concatenate([[0.0], np.exp(-t * t) * (scale * scale + t * t)])
    a = np.real(np.fft.fft(np.fft.fftshift(f))) / (2 * m)
    return scale, a[1 : n + 1][::-1].copy()


_W_SCALE, _W_COEF = _weideman_coefficients(_WEIDEMAN_N)


def _w_weideman(z: np.ndarray) -> np.ndarray:
    lz = _W_SCALE - 1j * z
    poly = np.polyval(_W_COEF, (_W_SCALE + 1j * z) / lz)
    return 2.0 * poly / (lz * lz) + 1.0 / (_SQRT_PI * lz)


def _w_continued_fraction(z: np.ndarray) -> np.ndarray:
    r = np.zeros_like(z)
    for k in range(_CF_DEPTH, 0, -1):
        r = (0.5 * k) / (z - r)
    return (1j / _SQRT_PI) / (z - r)


def _w_upper(z: np.ndarray) -> np.ndarray:
    """w(z) for Im z >= 0 (bounded there by 1)."""
    out = np.empty_like(z)
    far = np.abs(z) >= _CF_RADIUS
    if np.any(far):
        out[far] = _w_continued_fraction(z[far])
    if not np.all(far):
        out[~far] = _w_weideman(z[~far])
    return out


def _as_complex_array(z) -> tuple[np.ndarray, bool]:
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("argument must be finite")
    return np.atleast_1d(arr).copy(), arr.ndim == 0


def _combine(log_mag: np.ndarray, phase: np.ndarray):
    """Sum terms stacked along axis 0.

    Returns ``(scale, s, digits)`` with the sum equal to ``exp(scale) * s``
    and ``digits`` the decimal digits surviving cancellation.
    """
    log_mag = np.asarray(log_mag, dtype=float)
    phase = np.asarray(phase, dtype=float)
    if np.any(np.isposinf(log_mag)) or np.any(np.isnan(log_mag)):
        raise OverflowError("log magnitude is not finite")
    present = np.isfinite(log_mag)
    top = np.max(log_mag, axis=0)
    scale = np.where(np.isfinite(top), top, 0.0)
    rel = np.where(present, log_mag - scale, -np.inf)
    terms = np.exp(rel) * np.exp(1j * np.where(present, phase, 0.0))
    s = terms.sum(axis=0)
    mag = np.abs(s)
    # top term has magnitude 1 after scaling
    floor = 4.0 * EPS * np.abs(terms).sum(axis=0)
    empty = ~np.isfinite(top)
    zero = (mag <= floor) | empty
    s = np.where(zero, 0.0, s)
    with np.errstate(divide="ignore"):
        digits = np.where(empty, np.inf, MAX_DIGITS + np.log10(np.where(zero, 0.0, mag)))
    return scale, s, digits


def sum_log_terms(terms: Sequence[LogComplexTerm]) -> LogComplexTerm:
    """Log-representation of ``sum(terms)``.

    The largest magnitude is factored out before exponentiating. A sum at or
    below the rounding floor of its terms is reported as an exact zero
    (``log_magnitude = -inf``).
    """
    if len(terms) == 0:
        raise ValueError("terms must be non-empty")
    lm = np.stack([np.asarray(t.log_magnitude, dtype=float) for t in terms])
    ph = np.stack([np.asarray(t.phase, dtype=float) for t in terms])
    scale, s, _ = _combine(lm, ph)
    with np.errstate(divide="ignore"):
        out_lm = np.where(s == 0, -np.inf, scale + np.log(np.abs(s)))
    out_ph = np.where(s == 0, 0.0, np.angle(s))
    if out_lm.ndim == 0:
        return LogComplexTerm(float(out_lm), float(out_ph))
    return LogComplexTerm(out_lm, out_ph)


def log_faddeeva(z) -> LogComplexTerm:
    """``w(z)`` as a :class:`LogComplexTerm`; valid in the whole plane.

    Below the real axis ``w(z) = 2 exp(-z**2) - w(-z)`` grows like
    ``exp(-Re z**2)`` and is kept in log form.
    """
    zz, scalar = _as_complex_array(z)
    lm = np.empty(zz.shape)
    ph = np.empty(zz.shape)
    upper = zz.imag >= 0
    if np.any(upper):
        w = _w_upper(zz[upper])
        lm[upper] = np.log(np.abs(w))
        ph[upper] = np.angle(w)
    lower = ~upper
    if np.any(lower):
        zl = zz[lower]
        wr = _w_upper(-zl)
        sq = zl * zl
        scale, s, _ = _combine(
            np.stack([math.log(2.0) - sq.real, np.log(np.abs(wr))]),
            np.stack([-sq.imag, np.angle(wr) + math.pi]),
        )
        with np.errstate(divide="ignore"):
            lm[lower] = np.where(s == 0, -np.inf, scale + np.log(np.abs(s)))
        ph[lower] = np.angle(s)
    if scalar:
        return LogComplexTerm(float(lm[0]), float(ph[0]))
    return LogComplexTerm(lm, ph)


def faddeeva(z):
    """Faddeeva function ``w(z) = exp(-z**2) erfc(-i z)``.

    Raises ``OverflowError`` where ``|w(z)|`` exceeds the double range (deep
    in the lower half-plane); use :func:`log_faddeeva` there.
    """
    zz, scalar = _as_complex_array(z)
    out = np.empty_like(zz)
    upper = zz.imag >= 0
    if np.any(upper):
        out[upper] = _w_upper(zz[upper])
    if np.any(~upper):
        lt = log_faddeeva(zz[~upper])
        if np.any(lt.log_magnitude > _LOG_MAX):
            raise OverflowError("w(z) exceeds double range; use log_faddeeva")
        out[~upper] = lt.to_complex()
    return out[0] if scalar else out


def _erf_series(z: np.ndarray) -> np.ndarray:
    z2 = z * z
    term = z.copy()
    total = z.copy()
    for n in range(1, 20):
        term = -term * z2 / n
        total = total + term / (2 * n + 1)
    return (2.0 / _SQRT_PI) * total


def _erf_first_quadrant(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    small = np.abs(z) < _SERIES_RADIUS
    if np.any(small):
        out[small] = _erf_series(z[small])
    big = ~small
    if np.any(big):
        zb = z[big]
        w = _w_upper(1j * zb)
        sq = zb * zb
        lm = -sq.real + np.log(np.abs(w))
        if np.any(lm > _LOG_MAX):
            bad = zb[lm > _LOG_MAX][0]
            raise OverflowError(
                f"erf({bad}) exceeds double range; combine it with its prefactor "
                "through erf_diff_scaled"
            )
        out[big] = 1.0 - np.exp(lm) * np.exp(1j * (np.angle(w) - sq.imag))
    return out


def erf_complex(z):
    """Error function of a complex argument.

    The argument is reflected into the first quadrant, where
    ``erf(z) = 1 - exp(-z**2) w(i z)``; odd symmetry and
    ``erf(conj z) = conj erf(z)`` then hold exactly.
    """
    zz, scalar = _as_complex_array(z)
    neg_re = zz.real < 0
    neg_im = zz.imag < 0
    val = _erf_first_quadrant(np.abs(zz.real) + 1j * np.abs(zz.imag))
    # erf maps both axes onto themselves; drop the rounding residue there
    val = np.where(zz.real == 0, 1j * val.imag, val)
    val = np.where(zz.imag == 0, val.real + 0j, val)
    # z = conj(zc), -conj(zc) or -zc depending on the quadrant
    val = np.where(neg_im, np.conj(val), val)
    val = np.where(neg_re, -np.conj(val), val)
    return val[0] if scalar else val


def _erf_diff_terms(a: np.ndarray, b: np.ndarray, pre_lm: np.ndarray, pre_ph: np.ndarray):
    """Log terms of ``exp(pre) * (erf(b) - erf(a))``.

    With ``s = sign(Re z)``, ``erf(z) = s - s exp(-z**2) w(i s z)`` and
    ``i s z`` always lies in the closed upper half-plane.
    """
    sa = np.where(a.real >= 0, 1.0, -1.0)
    sb = np.where(b.real >= 0, 1.0, -1.0)
    wa = _w_upper(1j * sa * a)
    wb = _w_upper(1j * sb * b)
    a2 = a * a
    b2 = b * b
    jump = sb - sa
    lm = np.stack([
        np.where(jump != 0, pre_lm + math.log(2.0), -np.inf),
        pre_lm - b2.real + np.log(np.abs(wb)),
        pre_lm - a2.real + np.log(np.abs(wa)),
    ])
    ph = np.stack([
        pre_ph + np.where(jump < 0, math.pi, 0.0),
        pre_ph - b2.imag + np.angle(wb) + np.where(sb > 0, math.pi, 0.0),
        pre_ph - a2.imag + np.angle(wa) + np.where(sa > 0, 0.0, math.pi),
    ])
    return lm, ph


def erf_diff_parts(a, b, log_prefactor: LogComplexTerm):
    """Vectorised core of :func:`erf_diff_scaled` that never raises on cancellation.

    Returns ``(value, digits)``; ``digits`` estimates the significant decimal
    digits left after cancellation (``inf`` for exact zeros).
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    pre_lm = np.asarray(log_prefactor.log_magnitude, dtype=float)
    pre_ph = np.asarray(log_prefactor.phase, dtype=float)
    a, b, pre_lm, pre_ph = np.broadcast_arrays(a, b, pre_lm, pre_ph)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("erf arguments must be finite")
    lm, ph = _erf_diff_terms(a, b, pre_lm, pre_ph)
    scale, s, digits = _combine(lm, ph)
    same = a == b
    digits = np.where(same, np.inf, digits)
    s = np.where(same, 0.0, s)
    if np.any(scale > _LOG_MAX):
        # exp(scale) overflows even though s may be small; go through logs
        with np.errstate(divide="ignore"):
            total = scale + np.log(np.abs(s))
        if np.any(total[s != 0] > _LOG_MAX):
            raise OverflowError("scaled erf difference exceeds double range")
        value = np.where(s == 0, 0.0, np.exp(np.where(s == 0, 0.0, total)) * np.exp(1j * np.angle(s)))
    else:
        value = np.exp(scale) * s
    return value, digits


def erf_diff_scaled(a, b, log_prefactor: LogComplexTerm = LogComplexTerm(0.0, 0.0),
                    min_digits: float = MIN_DIGITS):
    """``exp(log_prefactor) * (erf(b) - erf(a))`` without overflow.

    Raises
    ------
    PrecisionLossError
        If cancellation leaves fewer than ``min_digits`` significant digits.
    """
    value, digits = erf_diff_parts(a, b, log_prefactor)
    bad = digits < min_digits
    if np.any(bad):
        raise PrecisionLossError(
            f"erf difference lost precision: {np.count_nonzero(bad)} value(s) with "
            f"fewer than {min_digits:g} significant digits (min {np.min(digits):.2f})",
            mask=bad,
            digits=digits,
        )
    return value[()] if value.ndim == 0 else value
