import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial.legendre import leggauss
from scipy.special import eval_legendre

from coherentk import specfun
from coherentk.errors import SpecialFunctionDomainError, SpecialFunctionRangeError
from coherentk.specfun import (
    gaunt0, gaunt_orthonormal, gaunt_table, legendre_derivative_table, legendre_pn,
    legendre_table, spherical_h1n, spherical_h1n_array, spherical_h1n_prime, spherical_jn,
    spherical_jn_array, spherical_jn_prime, spherical_jn_with_derivative,
    spherical_h1n_with_derivative, threej000_squared,
)

mpmath.mp.dps = 40


def mp_jn(n, z):
    z = mpmath.mpc(z.real, z.imag)
    return complex(mpmath.sqrt(mpmath.pi / (2 * z)) * mpmath.besselj(n + mpmath.mpf(1) / 2, z))


def mp_h1n(n, z):
    z = mpmath.mpc(z.real, z.imag)
    pref = mpmath.sqrt(mpmath.pi / (2 * z))
    nu = n + mpmath.mpf(1) / 2
    return complex(pref * (mpmath.besselj(nu, z) + 1j * mpmath.bessely(nu, z)))


# -- closed forms -----------------------------------------------------------------


def test_j0_closed_form():
    assert spherical_jn(0, 1.0) == pytest.approx(math.sin(1.0), rel=1e-15)


def test_j1_closed_form():
    expected = math.sin(1) - math.cos(1)
    assert abs(spherical_jn(1, 1.0) - expected) < 1e-15
    assert abs(expected - 0.3011686789) < 1e-10


@pytest.mark.parametrize("n", [1, 2, 7, 30])
def test_j_vanishes_at_origin(n):
    assert spherical_jn(n, 0) == 0
    assert spherical_jn(0, 0) == 1


def test_h0_closed_form():
    z = 2.0
    assert abs(spherical_h1n(0, z) - (-1j * cmath.exp(2j) / 2)) < 1e-15


def test_j0_prime_is_minus_j1():
    z = 3 + 1j
    assert abs(spherical_jn_prime(0, z) + spherical_jn(1, z)) < 1e-15 * abs(spherical_jn(1, z))


def test_hankel_rejects_zero():
    with pytest.raises(SpecialFunctionDomainError):
        spherical_h1n(0, 0)
    with pytest.raises(SpecialFunctionDomainError):
        spherical_h1n_prime(3, 0j)


def test_negative_and_excessive_orders_rejected():
    with pytest.raises(SpecialFunctionDomainError):
        spherical_jn(-1, 1.0)
    with pytest.raises(SpecialFunctionDomainError):
        spherical_jn_array(specfun.MAX_ORDER + 1, 1.0)


def test_overflow_is_a_range_error():
    with pytest.raises(SpecialFunctionRangeError):
        spherical_jn(3, 5 + 800j)
    with pytest.raises(SpecialFunctionRangeError):
        spherical_h1n(3, 5 - 800j)


# -- arbitrary-precision oracle ------------------------------------------------------


GRID = [0.3, 1.0, 1.5 + 0.5j, 4 - 2j, 10 + 1j, 25 + 3j, 80 + 0.1j, 300 + 5j, 1000 + 2j]


@pytest.mark.parametrize("z", GRID)
def test_jn_matches_mpmath(z):
    vals = spherical_jn_array(100, z)
    for n in (0, 1, 2, 5, 17, 40, 100):
        ref = mp_jn(n, complex(z))
        assert abs(vals[n] - ref) <= 1e-12 * abs(ref) + 1e-300


@pytest.mark.parametrize("z", [0.3, 1.5 + 0.5j, 4 - 2j, 25 + 3j, 300 + 5j])
def test_h1n_matches_mpmath(z):
    vals = spherical_h1n_array(60, z)
    for n in (0, 1, 3, 12, 30, 60):
        ref = mp_h1n(n, complex(z))
        assert abs(vals[n] - ref) <= 1e-12 * abs(ref)


def test_upward_and_downward_agree_at_switchover():
    # upward recurrence is only stable for n below |z|
    for z in (20.0 + 0.5j, 35.0 - 1j):
        up = spherical_jn_array(15, z, method="upward")
        down = spherical_jn_array(15, z, method="downward")
        assert np.max(np.abs(up - down) / np.abs(down)) < 1e-10


def test_derivative_recurrence():
    z = 2.5 + 0.7j
    j, jd = spherical_jn_with_derivative(20, z)
    h, hd = spherical_h1n_with_derivative(20, z)
    for n in range(1, 21):
        assert abs(jd[n] - (j[n - 1] - (n + 1) / z * j[n])) <= 1e-12 * abs(jd[n])
        assert abs(hd[n] - (h[n - 1] - (n + 1) / z * h[n])) <= 1e-12 * abs(hd[n])


@given(
    r=st.floats(0.1, 50.0),
    phi=st.floats(0.0, 1.5),
)
def test_wronskian_property(r, phi):
    z = r * cmath.exp(1j * phi)
    j, jd = spherical_jn_with_derivative(20, z)
    h, hd = spherical_h1n_with_derivative(20, z)
    w = (j * hd - jd * h) * z * z
    assert np.max(np.abs(w - 1j)) < 1e-10


@pytest.mark.parametrize("phi", [-0.5, -0.25])
@pytest.mark.parametrize("r", [3.0, 12.0, 17.0, 28.0])
def test_hankel_lower_half_plane_accuracy(r, phi):
    # physical arguments have Im z >= 0; below the axis upward recurrence
    # loses a few digits, bounded here against arbitrary precision
    z = r * cmath.exp(1j * phi)
    h = spherical_h1n_array(20, z)
    for n in range(21):
        ref = mp_h1n(n, z)
        assert abs(h[n] - ref) <= 1e-9 * abs(ref)


def test_wronskian_example_point():
    z = 1.5 + 0.5j
    j, jd = spherical_jn_with_derivative(20, z)
    h, hd = spherical_h1n_with_derivative(20, z)
    assert np.max(np.abs(j * hd - jd * h - 1j / z**2)) < 1e-12


# -- Legendre ------------------------------------------------------------------------


def test_legendre_examples():
    assert legendre_pn(7, 1.0) == 1.0
    assert legendre_pn(2, 0.0) == -0.5
    assert legendre_pn(5, 0.3) == pytest.approx(eval_legendre(5, 0.3), abs=1e-15)


def test_legendre_domain():
    with pytest.raises(SpecialFunctionDomainError):
        legendre_pn(2, 1.0000001)


@given(x=st.floats(-1, 1), n=st.integers(0, 60))
def test_legendre_table_matches_scipy(x, n):
    assert legendre_table(n, x)[n] == pytest.approx(eval_legendre(n, x), abs=1e-12)


def test_legendre_derivative_endpoints():
    d = legendre_derivative_table(12, np.array([1.0, -1.0]))
    for n in range(13):
        assert d[n, 0] == n * (n + 1) / 2
        assert d[n, 1] == (-1) ** (n + 1) * n * (n + 1) / 2


def test_legendre_derivative_against_finite_difference():
    x, h = 0.37, 1e-6
    d = legendre_derivative_table(15, x)
    fd = (legendre_table(15, x + h) - legendre_table(15, x - h)) / (2 * h)
    assert np.max(np.abs(d - fd)) < 1e-6


# -- Gaunt coefficients ------------------------------------------------------------------


def quad_gaunt(n, nu, ell):
    x, w = leggauss(60)
    return (2 * ell + 1) / 2 * np.sum(w * eval_legendre(n, x) * eval_legendre(nu, x) * eval_legendre(ell, x))


def test_gaunt_examples():
    assert gaunt0(0, 0, 0) == 1.0
    assert gaunt0(1, 1, 0) == pytest.approx(1 / 3, abs=1e-16)
    assert gaunt0(1, 1, 2) == pytest.approx(2 / 3, abs=1e-16)
    assert gaunt0(1, 2, 2) == 0.0
    assert quad_gaunt(1, 1, 0) == pytest.approx(1 / 3, abs=1e-13)
    assert quad_gaunt(1, 1, 2) == pytest.approx(2 / 3, abs=1e-13)


def test_gaunt_quadrature_oracle():
    x, w = leggauss(60)
    P = np.array([eval_legendre(n, x) for n in range(31)])
    worst = 0.0
    for n in range(16):
        for nu in range(16):
            ref = (2 * np.arange(31) + 1) / 2 * (P * (w * P[n] * P[nu])).sum(axis=1)
            got = np.array([gaunt0(n, nu, ell) for ell in range(31)])
            worst = max(worst, float(np.max(np.abs(got - ref))))
    assert worst < 1e-10


def test_gaunt_sum_rule_and_parity():
    for n in range(26):
        for nu in range(26):
            ells = range(abs(n - nu), n + nu + 1)
            assert abs(math.fsum(gaunt0(n, nu, l) for l in ells) - 1) < 1e-12
            for l in range(0, n + nu + 3):
                if (n + nu + l) % 2:
                    assert gaunt0(n, nu, l) == 0.0


@given(n=st.integers(0, 30), nu=st.integers(0, 30), ell=st.integers(0, 70))
def test_gaunt_symmetric_and_supported(n, nu, ell):
    g = gaunt0(n, nu, ell)
    assert g == gaunt0(nu, n, ell)
    if ell < abs(n - nu) or ell > n + nu:
        assert g == 0.0
    assert g >= 0.0


def test_threej_is_exact_rational():
    assert threej000_squared(1, 1, 0) == Fraction(1, 3)
    assert threej000_squared(2, 2, 2) == Fraction(2, 35)


def test_orthonormal_conversion_matches_sympy():
    from sympy.physics.wigner import gaunt as sympy_gaunt

    for n, nu, ell in [(1, 1, 2), (2, 3, 3), (4, 2, 6), (5, 5, 0)]:
        ref = float(sympy_gaunt(n, nu, ell, 0, 0, 0))
        assert gaunt_orthonormal(n, nu, ell) == pytest.approx(ref, rel=1e-13)


def test_gaunt_negative_index_rejected():
    with pytest.raises(ValueError):
        gaunt0(-1, 0, 1)


def test_gaunt_table_is_shared_and_read_only():
    t = gaunt_table(6)
    assert gaunt_table(6) is t
    assert t(2, 3, 3) == gaunt0(2, 3, 3)
    assert t(2, 3, 2) == 0.0
    assert t.row_sum(4, 6) == pytest.approx(1.0, abs=1e-15)
    assert all(v > 0 and math.isfinite(v) for v in t.entries.values())
    with pytest.raises(ValueError):
        t.dense[0, 0, 0] = 2.0
