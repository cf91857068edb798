import cmath
import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import ai_zeros

from btspec.model import (ModelError, ModelParams, admissible_beta, count_N, default_R, halfplane_bound,
                          in_T, lattice_distance, lower_bound, mirrored_mu_n, model_spectrum, mu_n)

Z1, Z2 = -ai_zeros(2)[0]


def oracle_mu(h, alpha, kappa, m, n):
    z = (Z1, Z2)[m - 1]
    return z * h ** (2 / 3) * cmath.exp(2j * alpha / 3) + (2 * n - 1) * h * cmath.exp(0.5j * alpha) * math.sqrt(kappa / 2)


def test_mu_alpha0_value():
    mu = mu_n(ModelParams(0.01, 0.0), 1, 1)
    assert mu.imag == 0
    assert mu.real == pytest.approx(oracle_mu(0.01, 0, 1, 1, 1).real, abs=1e-14)
    assert mu.real == pytest.approx(0.1155964003, abs=1e-10)


def test_mu_alpha_half_pi_value():
    mu = mu_n(ModelParams(0.01, math.pi / 2), 1, 1)
    assert abs(mu - oracle_mu(0.01, math.pi / 2, 1, 1, 1)) < 1e-14
    assert mu.real == pytest.approx(0.059263, abs=1e-6)


def test_mu_matches_first_order_expansion():
    # z_1 h^{2/3} + (2n-1) h sqrt(kappa0/2) at alpha = 0
    for n in (1, 2, 3):
        mu = mu_n(ModelParams(0.02, 0.0, kappa0=1.5), 1, n)
        assert mu.real == pytest.approx(Z1 * 0.02 ** (2 / 3) + (2 * n - 1) * 0.02 * math.sqrt(0.75), rel=1e-14)


@settings(max_examples=80, deadline=None)
@given(st.floats(1e-3, 0.5), st.floats(0, math.pi), st.floats(0.1, 5), st.integers(1, 2), st.integers(1, 6))
def test_mu_against_oracle(h, alpha, kappa, m, n):
    assert abs(mu_n(ModelParams(h, alpha, kappa), m, n) - oracle_mu(h, alpha, kappa, m, n)) < 1e-13


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 0.3), st.floats(0, 3 * math.pi / 5 - 1e-6), st.floats(0.2, 3))
def test_leftmost_is_11(h, alpha, kappa):
    spec = model_spectrum(ModelParams(h, alpha, kappa), 10, 10)
    assert spec[0][:2] == (1, 1)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 0.5), st.floats(1e-3, 0.5))
def test_alpha0_real_and_monotone_in_h(h1, h2):
    a, b = mu_n(ModelParams(h1, 0.0)), mu_n(ModelParams(h2, 0.0))
    assert a.imag == 0 and b.imag == 0
    if h1 < h2:
        assert a.real < b.real


def test_params_validation():
    with pytest.raises(ModelError, match="h"):
        ModelParams(-0.1, 0.0)
    with pytest.raises(ModelError, match="alpha"):
        ModelParams(0.1, 4.0)
    with pytest.raises(ModelError):
        mu_n(ModelParams(0.1, 0.0, kappa0=0.0))
    with pytest.raises(ModelError):
        mu_n(ModelParams(0.1, 0.0), 0, 1)


def test_mirrored_at_pi_reduces_to_reflection():
    p = ModelParams(0.01, math.pi, kappa1=1.0, x1_max=2.0)
    v = mirrored_mu_n(p)
    assert abs(v.imag) < 1e-15
    assert v.real == pytest.approx(-2 + oracle_mu(0.01, 0, 1, 1, 1).real, abs=1e-14)


def test_mirrored_oracle_value():
    a = 0.55 * math.pi
    at = math.pi - a
    ref = cmath.exp(1j * a) * 3 + oracle_mu(0.05, at, 1.5, 1, 1).conjugate()
    v = mirrored_mu_n(ModelParams(0.05, a, kappa0=1.5, kappa1=1.5, x1_max=3.0))
    assert abs(v - ref) < 1e-14
    assert abs(v - complex(-0.249855, 2.678218)) < 1e-6


def test_mirrored_left_of_a0_on_ellipse():
    p = ModelParams(0.02, 0.55 * math.pi, kappa0=1.5, kappa1=1.5, x1_max=3.0)
    assert mirrored_mu_n(p).real < mu_n(p).real


def test_mirrored_rejects_small_alpha():
    with pytest.raises(ModelError):
        mirrored_mu_n(ModelParams(0.05, 0.3 * math.pi))


def test_lower_bound_values():
    assert lower_bound(ModelParams(0.01, 0.0)) == pytest.approx(Z1 * 0.01 ** (2 / 3), rel=1e-14)
    assert lower_bound(ModelParams(0.01, 0.0)) == pytest.approx(0.1085253325, abs=1e-10)
    # alpha -> 0 limit: Re mu_1 minus the harmonic term
    p = ModelParams(0.03, 0.0)
    assert lower_bound(p) == pytest.approx(mu_n(p).real - 0.03 * math.sqrt(0.5), rel=1e-13)
    with pytest.raises(ModelError):
        lower_bound(ModelParams(0.01, math.pi / 2))
    # the cos factor at alpha = pi/2 is 1/2
    assert math.cos(2 * (math.pi / 2) / 3) == pytest.approx(0.5)


def test_halfplane_values():
    p = ModelParams(0.05, 0.55 * math.pi)
    normal, off = halfplane_bound(p, math.pi / 10)
    assert normal == pytest.approx(cmath.exp(1j * math.pi / 10))
    assert off == pytest.approx(Z1 * 0.05 ** (2 / 3) * math.cos(2 * 0.55 * math.pi / 3 - math.pi / 10), rel=1e-14)
    q = ModelParams(0.05, 0.2)
    assert halfplane_bound(q, 0.0)[1] == pytest.approx(lower_bound(q), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 0.9), st.floats(1e-3, 0.9))
def test_halfplane_offset_monotone_in_h(h1, h2):
    a = 0.55 * math.pi
    o1 = halfplane_bound(ModelParams(h1, a), math.pi / 10)[1]
    o2 = halfplane_bound(ModelParams(h2, a), math.pi / 10)[1]
    assert (o1 - o2) * (h1 - h2) >= 0


def test_admissible_beta():
    assert admissible_beta(0.3 * math.pi) == 0
    assert admissible_beta(0.55 * math.pi) == pytest.approx(math.pi / 10)
    with pytest.raises(ModelError):
        admissible_beta(0.61 * math.pi)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 3 * math.pi / 5, exclude_max=True))
def test_admissible_beta_in_T(alpha):
    ok, why = in_T(alpha, admissible_beta(alpha))
    assert ok, why


def test_in_T_names_violation():
    ok, why = in_T(0.3, -1.5)
    assert not ok and "beta - 2 alpha/3" in why
    ok, why = in_T(0.1, 1.6)
    assert not ok and "beta + 2 alpha/3" in why


def test_halfplane_rejects_inadmissible():
    with pytest.raises(ModelError, match="violates"):
        halfplane_bound(ModelParams(0.05, 0.55 * math.pi), 0.0)


def test_count_N():
    w = math.sqrt(0.5)
    assert count_N(2.5, 1.0) == 2
    assert count_N(default_R(1.0), 1.0) == 1
    assert count_N(0.5 * w, 1.0) == 0
    with pytest.raises(ModelError, match="lattice"):
        count_N(3 * w, 1.0)
    assert lattice_distance(default_R(1.0), 1.0) == pytest.approx(0.5 * w)


@settings(max_examples=80, deadline=None)
@given(st.floats(0.05, 20), st.floats(0.1, 4))
def test_count_N_matches_enumeration(R, kappa):
    w = math.sqrt(kappa / 2)
    if lattice_distance(R, kappa) < 1e-6:
        return
    assert count_N(R, kappa) == sum(1 for n in range(1, 200) if (2 * n - 1) * w < R)
