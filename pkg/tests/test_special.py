import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import hermite as H
from scipy import special as sps
from scipy.optimize import bisect

from btspec.special import airy_ai, airy_ai_prime, airy_zero, airy_zeros, hermite_fn


def oracle_zero(m):
    # bisection on scipy's Ai between consecutive scipy-independent brackets
    grid = np.linspace(0.5, 3 * (m + 1) ** (2 / 3) + 2, 4000)
    vals = sps.airy(-grid)[0]
    idx = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[m - 1]
    return bisect(lambda z: sps.airy(-z)[0], grid[idx], grid[idx + 1], xtol=1e-15, rtol=1e-15)


@pytest.mark.parametrize("m", [1, 2, 3, 7, 20])
def test_airy_zero_matches_bisection(m):
    assert abs(airy_zero(m) - oracle_zero(m)) < 1e-10


def test_airy_zero_values():
    assert airy_zero(1) == pytest.approx(2.338107410459767, abs=1e-12)
    assert airy_zero(2) == pytest.approx(4.087949444130970, abs=1e-12)


def test_airy_zeros_against_scipy():
    ref = -sps.ai_zeros(50)[0]
    assert np.max(np.abs(airy_zeros(50) - ref)) < 1e-10
    assert np.all(np.diff(airy_zeros(50)) > 0)


@pytest.mark.parametrize("m", [0, 51, 1.5])
def test_airy_zero_rejects_index(m):
    with pytest.raises(ValueError):
        airy_zero(m)


def test_airy_against_scipy_dense():
    x = np.linspace(-12, 12, 4801)
    ai, aip, _, _ = sps.airy(x)
    assert np.max(np.abs(airy_ai(x) - ai)) < 1e-11
    assert np.max(np.abs(airy_ai_prime(x) - aip)) < 1e-11


@pytest.mark.parametrize("x", [-7.5, -7.5 - 1e-12, -4.0, -4.0 + 1e-12, 5.5, 5.5 + 1e-12, 0.0])
def test_airy_branch_switches(x):
    ai, aip, _, _ = sps.airy(x)
    assert abs(airy_ai(x) - ai) < 1e-12
    assert abs(airy_ai_prime(x) - aip) < 1e-11


def test_airy_scalar_in_scalar_out():
    assert isinstance(airy_ai(1.0), float)
    assert airy_ai(np.zeros((2, 3))).shape == (2, 3)


def test_airy_rejects_nonfinite():
    with pytest.raises(ValueError):
        airy_ai(np.inf)


def test_airy_vanishes_at_zeros():
    for m in range(1, 6):
        assert abs(airy_ai(-airy_zero(m))) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(st.floats(-11, 11))
def test_airy_ode(x):
    # Ai'' = x Ai, with Ai'' taken from a central difference of Ai'
    e = 1e-4
    d2 = (airy_ai_prime(x + e) - airy_ai_prime(x - e)) / (2 * e)
    assert abs(d2 - x * airy_ai(x)) < 1e-6 * (1 + abs(x))


@settings(max_examples=60, deadline=None)
@given(st.floats(-10, 10))
def test_airy_wronskian(x):
    # W(Ai, Bi) = 1/pi; Bi from scipy
    _, _, bi, bip = sps.airy(x)
    w = airy_ai(x) * bip - airy_ai_prime(x) * bi
    assert abs(w - 1 / math.pi) < 1e-10 * max(1.0, abs(bi), abs(bip))


def oracle_hermite(n, x):
    k = n - 1
    c = np.zeros(k + 1)
    c[k] = 1
    return H.hermval(x, c) * np.exp(-x**2 / 2) / math.sqrt(2**k * math.factorial(k) * math.sqrt(math.pi))


@pytest.mark.parametrize("n", [1, 2, 3, 6, 12])
def test_hermite_against_polynomial_oracle(n):
    x = np.linspace(-6, 6, 301)
    assert np.max(np.abs(hermite_fn(n, x) - oracle_hermite(n, x))) < 1e-12


def test_hermite_complex_argument():
    z = np.linspace(-3, 3, 41) * np.exp(0.3j)
    assert np.max(np.abs(hermite_fn(3, z) - oracle_hermite(3, z))) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 5])
def test_hermite_normalized_and_eigen(n):
    x = np.linspace(-12, 12, 24001)
    f = hermite_fn(n, x)
    assert np.trapezoid(f**2, x) == pytest.approx(1.0, abs=1e-10)
    dx = x[1] - x[0]
    lap = (f[2:] - 2 * f[1:-1] + f[:-2]) / dx**2
    res = -lap + x[1:-1] ** 2 * f[1:-1] - (2 * n - 1) * f[1:-1]
    assert np.max(np.abs(res)) < 1e-4


def test_hermite_orthogonal():
    x = np.linspace(-12, 12, 24001)
    assert abs(np.trapezoid(hermite_fn(2, x) * hermite_fn(4, x), x)) < 1e-10


def test_hermite_rejects_index():
    with pytest.raises(ValueError):
        hermite_fn(0, 1.0)
