import cmath
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial.legendre import leggauss
from scipy.special import eval_legendre

from coherentk.errors import RegimeError, SpecialFunctionDomainError
from coherentk.farfield import (
    FarFieldFunction, TruncationWarning, delta1, delta2, delta2_coupling, delta2_series,
    farfield_f, farfield_f_derivative, g_kappa_series, g_kappa_theta, g_series_tail_bound,
    legendre_coefficients, s_kappa_integral, s_kappa_series, sample_farfield,
)
from coherentk.tmatrix import TMatrixSet, fluid_sphere_demo, random_tmatrix


def t_from(orders, P=1):
    return TMatrixSet(np.asarray(orders, dtype=complex).reshape(-1, P, P), radius_a=1.0)


def pair_t(t1, t2, n_max=0):
    """P=2 set whose only non-zero entries are T_0^{01}=t1 and T_0^{10}=t2."""
    c = np.zeros((n_max + 1, 2, 2), dtype=complex)
    c[0, 0, 1], c[0, 1, 0] = t1, t2
    return TMatrixSet(c, radius_a=1.0)


def quiet(fn, *a, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        return fn(*a, **kw)


# -- f^{qp} ---------------------------------------------------------------------------------


def test_farfield_endpoints(rng):
    t = random_tmatrix(2, 7, rng)
    n = np.arange(8)
    w = (2 * n + 1) * t.coeffs[:, 1, 0]
    assert farfield_f(1, 0, 0.0, t) == pytest.approx(np.sum(w), rel=1e-14)
    assert farfield_f(1, 0, math.pi, t) == pytest.approx(np.sum((-1) ** n * w), rel=1e-13)
    ff = FarFieldFunction(1, 0, t)
    assert ff.forward == pytest.approx(np.sum(w), rel=1e-15)
    assert ff.backward == pytest.approx(np.sum((-1) ** n * w), rel=1e-15)


def test_single_monopole_is_constant():
    t = t_from([0.3 - 0.1j])
    th = np.linspace(0, math.pi, 9)
    assert np.allclose(farfield_f(0, 0, th, t), 0.3 - 0.1j, rtol=0, atol=1e-16)
    assert np.all(farfield_f_derivative(0, 0, th, t) == 0)


def test_farfield_against_scipy_legendre(rng):
    t = random_tmatrix(1, 9, rng)
    th = np.linspace(0, math.pi, 13)
    ref = sum((2 * n + 1) * t.coeffs[n, 0, 0] * eval_legendre(n, np.cos(th)) for n in range(10))
    assert np.max(np.abs(farfield_f(0, 0, th, t) - ref)) < 1e-14


def test_farfield_derivative_against_finite_difference(rng):
    t = random_tmatrix(1, 9, rng)
    th, h = np.linspace(0.1, 3.0, 7), 1e-6
    fd = (farfield_f(0, 0, th + h, t) - farfield_f(0, 0, th - h, t)) / (2 * h)
    assert np.max(np.abs(farfield_f_derivative(0, 0, th, t) - fd)) < 1e-7


def test_orthogonality_reconstruction(rng):
    t = random_tmatrix(2, 8, rng)
    ff = FarFieldFunction(0, 1, t)
    c = legendre_coefficients(ff, 10)
    n = np.arange(9)
    assert np.max(np.abs(c[:9] - (2 * n + 1) * t.coeffs[:, 0, 1])) < 1e-13
    assert np.max(np.abs(c[9:])) < 1e-13


def test_sample_farfield_grid(rng):
    t = random_tmatrix(1, 4, rng)
    th, f = sample_farfield(0, 0, t, 5)
    assert th[0] == 0 and th[-1] == math.pi and f.shape == (5,)
    with pytest.raises(ValueError):
        sample_farfield(0, 0, t, 1)


# -- g(kappa, theta) -----------------------------------------------------------------------


def test_g_examples():
    assert g_kappa_theta(0.0, 1.234) == 1.0
    for kappa in (0.3, 0.5 + 0.2j, -0.6):
        assert g_kappa_theta(kappa, 0.0) == pytest.approx((1 + kappa) / (1 - kappa) ** 2, rel=1e-14)
    assert abs(g_kappa_theta(0.5, math.pi / 2) - g_kappa_series(0.5, math.pi / 2, 200)) < 1e-12


def test_g_domain():
    with pytest.raises(SpecialFunctionDomainError):
        g_kappa_theta(1.0, 0.5)
    with pytest.raises(SpecialFunctionDomainError):
        g_kappa_theta(0.8 + 0.7j, 0.5)


@given(r=st.floats(0.0, 0.9), phi=st.floats(0, 2 * math.pi), theta=st.floats(0, math.pi),
       terms=st.integers(5, 80))
def test_g_tail_bound_holds(r, phi, theta, terms):
    kappa = r * cmath.exp(1j * phi)
    err = abs(g_kappa_theta(kappa, theta) - g_kappa_series(kappa, theta, terms))
    assert err <= g_series_tail_bound(kappa, terms) + 1e-11


# -- S(kappa) ---------------------------------------------------------------------------------


def test_s_monopole_pair():
    t = pair_t(0.2 + 0.1j, -0.3 + 0.05j)
    for kappa in (0.0, 0.7, 0.4 + 0.4j, 3.0):
        assert s_kappa_series(0, 1, kappa, t) == (0.2 + 0.1j) * (-0.3 + 0.05j)
    for kappa in (0.0, 0.7, 0.4 + 0.4j):
        assert s_kappa_integral(0, 1, kappa, t) == pytest.approx((0.2 + 0.1j) * (-0.3 + 0.05j), rel=1e-12)


def test_s_at_zero_against_quadrature_gaunt(rng):
    t = random_tmatrix(2, 6, rng)
    x, wq = leggauss(40)
    a = (2 * np.arange(7) + 1) * t.coeffs[:, 0, 1]
    c = (2 * np.arange(7) + 1) * t.coeffs[:, 1, 0]
    ref = sum(a[n] * c[n] * 0.5 * np.sum(wq * eval_legendre(n, x) ** 2) for n in range(7))
    assert quiet(s_kappa_series, 0, 1, 0.0, t) == pytest.approx(ref, rel=1e-12)
    assert s_kappa_integral(0, 1, 0.0, t) == pytest.approx(ref, rel=1e-11)


@pytest.mark.parametrize("r", [0.1, 0.5, 0.9])
@pytest.mark.parametrize("phase", [1.0, cmath.exp(1j * math.pi / 4)])
def test_s_series_equals_integral(rng, r, phase):
    for _ in range(5):
        t = random_tmatrix(2, 10, rng, decay=0.3)
        s = quiet(s_kappa_series, 0, 1, r * phase, t)
        i = s_kappa_integral(0, 1, r * phase, t)
        assert abs(s - i) <= 1e-8 * abs(s)


@settings(max_examples=40)
@given(seed=st.integers(0, 2**32 - 1), r=st.floats(0.0, 0.95), phi=st.floats(0, 2 * math.pi))
def test_s_identity_property(seed, r, phi):
    t = random_tmatrix(2, 10, np.random.default_rng(seed), decay=0.25)
    kappa = r * cmath.exp(1j * phi)
    s = quiet(s_kappa_series, 1, 0, kappa, t)
    i = s_kappa_integral(1, 0, kappa, t)
    assert abs(s - i) <= 1e-8 * abs(s)


def test_s_series_handles_slow_coupling_and_warns(rng):
    t = random_tmatrix(2, 4, rng, decay=0.5)
    with pytest.warns(TruncationWarning, match="under-truncated"):
        s = s_kappa_series(0, 1, 1.8 + 0.2j, t)
    assert np.isfinite(s)
    with pytest.raises(SpecialFunctionDomainError):
        s_kappa_integral(0, 1, 1.8, t)


def test_s_zero_without_coupling(rng):
    t = random_tmatrix(2, 4, rng, coupled=False)
    assert s_kappa_series(0, 1, 0.5, t) == 0
    assert s_kappa_integral(0, 1, 0.5, t) == 0


# -- Lloyd-Berry coefficients -------------------------------------------------------------------


def test_delta1_examples():
    k = 1.3 + 0.1j
    assert delta1(0, TMatrixSet.zero(1, 3, radius_a=1.0), k) == 0
    assert delta1(0, t_from([0.2 + 0.3j]), k) == pytest.approx(-4j * math.pi * (0.2 + 0.3j) / k, rel=1e-15)


def test_delta2_monopole_only_is_zero():
    assert delta2(0, t_from([0.2 + 0.3j, 0.0]), 1.0) == 0
    assert delta2(0, t_from([0.2 + 0.3j]), 1.0) == 0


def test_delta2_two_mode_against_series():
    t = t_from([0.1 + 0.05j, -0.03 + 0.02j])
    k = 0.8 + 0.05j
    d = delta2(0, t, k)
    s = delta2_series(0, t, k)
    # closed value: (n, nu) = (0, 1) and (1, 0) with l = 1, G = 1; (1, 1) with l = 2, G = 2/3
    w0, w1 = 0.1 + 0.05j, 3 * (-0.03 + 0.02j)
    closed = -8 * math.pi**2 / k**4 * (2 * w0 * w1 + w1 * w1 * 2 * (2 / 3))
    assert s == pytest.approx(closed, rel=1e-14)
    assert abs(d - s) <= 1e-8 * abs(s)


@pytest.mark.parametrize("ka", [0.05, 0.3, 1.0])
def test_delta2_fluid_sphere_against_series(ka):
    _, t = fluid_sphere_demo(ka=ka)
    k = ka / t.radius_a
    assert abs(delta2(0, t, k) - delta2_series(0, t, k)) <= 1e-9 * abs(delta2_series(0, t, k))


def test_delta2_real_for_real_data(rng):
    t = t_from(rng.uniform(-0.2, 0.2, 6) * 0.4 ** np.arange(6))
    d = delta2(0, t, 1.7)
    assert abs(d.imag) <= 1e-14 * abs(d)


def test_delta2_endpoint_stability(rng):
    t = random_tmatrix(1, 8, rng)
    ref = delta2(0, t, 1.1)
    a = delta2(0, t, 1.1, theta_min=2e-10)
    b = delta2(0, t, 1.1, theta_min=1e-10)
    assert abs(a - b) < 1e-9 * abs(ref)
    assert abs(b - ref) < 1e-9 * abs(ref)


# -- coupling term ------------------------------------------------------------------------------


K3 = np.array([1.0 + 0.01j, 1.6 + 0.1j, 2.3 + 0.3j])


def test_coupling_zero_without_offdiagonal(rng):
    t = random_tmatrix(3, 6, rng, coupled=False)
    assert delta2_coupling(0, t, K3) == 0
    assert delta2_coupling(0, t, K3, form="series") == 0


def test_coupling_monopole_pair_closed_form():
    t1, t2 = 0.2 + 0.1j, -0.3 + 0.05j
    kp, kq = K3[0], K3[1]
    expected = 16 * math.pi**2 * t1 * t2 / (kp * kq * (kq**2 - kp**2))
    t = pair_t(t1, t2)
    assert delta2_coupling(0, t, K3[:2]) == pytest.approx(expected, rel=1e-12)
    assert delta2_coupling(0, t, K3[:2], form="series") == pytest.approx(expected, rel=1e-14)


def test_coupling_forms_agree(rng):
    for _ in range(10):
        t = random_tmatrix(3, 10, rng, decay=0.3)
        a = delta2_coupling(0, t, K3)
        b = quiet(delta2_coupling, 0, t, K3, form="series")
        assert abs(a - b) <= 1e-8 * abs(b)


def test_coupling_rejects_slow_wave(rng):
    t = random_tmatrix(3, 4, rng)
    with pytest.raises(RegimeError, match="wavenumber_lowfreq_o2"):
        delta2_coupling(1, t, K3)


def test_coupling_ignores_uncoupled_faster_waves(rng):
    # wave 1 is coupled only to wave 2, so wave 0 being faster is irrelevant
    t = random_tmatrix(3, 4, rng)
    c = np.array(t.coeffs)
    c[:, 0, 1] = c[:, 1, 0] = 0
    t = TMatrixSet(c, radius_a=1.0)
    assert np.isfinite(quiet(delta2_coupling, 1, t, K3))
