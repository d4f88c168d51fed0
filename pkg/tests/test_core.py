import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qctrans.core import (ComplexField, Grid, ParameterError, PhysParams, RealField, correspondence,
                          integrate_trapezoid, validate_params)

EPS = np.finfo(float).eps
positive = st.floats(min_value=1e-3, max_value=1e3)


def test_reference_parameters_accepted():
    p = PhysParams(mass=1, hbar=1, sigma=1, sigma_x=1, sigma_v=0.5, x0=0, v0=10, d=10)
    assert validate_params(p) is p


@pytest.mark.parametrize(
    "changes, message",
    [
        ({"sigma": 0.0}, "sigma must be positive"),
        ({"sigma_v": -1.0}, "sigma_v must be positive"),
        ({"mass": -2.0}, "mass must be positive"),
        ({"hbar": 0.0}, "hbar must be positive"),
        ({"sigma_x": 0.0}, "sigma_x must be positive"),
        ({"d": -1.0}, "d must be non-negative"),
        ({"v0": math.nan}, "v0 must be finite"),
    ],
)
def test_validate_rejects(changes, message):
    bad = PhysParams.__new__(PhysParams)
    for k, v in {**PhysParams().__dict__, **changes}.items():
        object.__setattr__(bad, k, v)
    with pytest.raises(ParameterError, match=message):
        validate_params(bad)


def test_with_validates():
    with pytest.raises(ParameterError, match="sigma_v must be positive"):
        PhysParams().with_(sigma_v=-1.0)
    assert PhysParams().with_(x0=3.0).x0 == 3.0


@pytest.mark.parametrize(
    "sigma, mass, hbar, expected",
    [(1.0, 1.0, 1.0, (1.0, 0.5)), (1.0, 1.0, 2.0, (1.0, 1.0)), (2.0, 0.5, 1.0, (2.0, 0.5))],
)
def test_correspondence_examples(sigma, mass, hbar, expected):
    assert correspondence(sigma, mass, hbar) == expected


def test_correspondence_rejects_nonpositive():
    with pytest.raises(ParameterError, match="mass must be positive"):
        correspondence(1.0, 0.0, 1.0)


@given(positive, positive, positive)
def test_from_quantum_ties_spreads(sigma, mass, hbar):
    p = PhysParams.from_quantum(mass=mass, hbar=hbar, sigma=sigma)
    assert p.sigma_x == sigma
    assert abs(p.sigma_v * (2 * p.sigma * p.mass) / p.hbar - 1.0) <= 2 * EPS


def test_grid_basics():
    g = Grid(0.0, 1.0, 101)
    assert g.dx == pytest.approx(0.01, rel=1e-15)
    assert g.x[0] == 0.0 and g.x[-1] == 1.0
    assert g.length == 1.0
    default = Grid()
    assert (default.x_min, default.x_max, default.n_points) == (-25.0, 25.0, 8192)


@pytest.mark.parametrize("args", [(0.0, 1.0, 1), (1.0, 1.0, 10), (2.0, 1.0, 10), (0.0, math.inf, 10)])
def test_grid_rejects(args):
    with pytest.raises(ValueError):
        Grid(*args)


def test_fields_validate_shape_and_finiteness():
    g = Grid(0.0, 1.0, 5)
    with pytest.raises(ValueError):
        RealField(g, np.ones(4))
    with pytest.raises(ValueError):
        RealField(g, np.array([0, 1, np.nan, 1, 0]))
    with pytest.raises(ValueError):
        ComplexField(g, np.array([0, 1, np.inf, 1, 0], dtype=complex))
    f = ComplexField(g, np.full(5, 3 + 4j))
    np.testing.assert_allclose(f.density().values, 25.0)
    with pytest.raises(ValueError):
        f.values[0] = 1.0  # read-only


def test_trapezoid_constant():
    g = Grid(0.0, 1.0, 101)
    assert integrate_trapezoid(RealField(g, np.ones(101))) == pytest.approx(1.0, abs=1e-15)


def test_trapezoid_zeros():
    assert integrate_trapezoid(RealField(Grid(0.0, 1.0, 11), np.zeros(11))) == 0.0


def test_trapezoid_standard_normal():
    g = Grid(-10.0, 10.0, 4001)
    f = RealField(g, np.exp(-g.x**2 / 2) / math.sqrt(2 * math.pi))
    oracle = math.erf(10 / math.sqrt(2))
    assert abs(integrate_trapezoid(f) - oracle) < 1e-8


@settings(max_examples=50)
@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**32 - 1))
def test_trapezoid_linear(a, b, seed):
    rng = np.random.default_rng(seed)
    g = Grid(-1.0, 2.0, 64)
    f, h = rng.normal(size=64), rng.normal(size=64)
    lhs = integrate_trapezoid(RealField(g, a * f + b * h))
    rhs = a * integrate_trapezoid(RealField(g, f)) + b * integrate_trapezoid(RealField(g, h))
    scale = abs(a) * np.abs(f).sum() * g.dx + abs(b) * np.abs(h).sum() * g.dx
    assert abs(lhs - rhs) <= 1e-12 * max(scale, 1e-300)
