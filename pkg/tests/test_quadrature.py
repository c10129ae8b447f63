import numpy as np
import pytest
from scipy.integrate import quad

from coherentk.errors import ConvergenceError
from coherentk.quadrature import gauss_kronrod


import warnings


def scipy_complex(f, a, b):
    warnings.simplefilter("ignore")
    re = quad(lambda x: f(np.array([x]))[0].real, a, b, epsabs=0, epsrel=1e-13, limit=200)[0]
    im = quad(lambda x: f(np.array([x]))[0].imag, a, b, epsabs=0, epsrel=1e-13, limit=200)[0]
    return complex(re, im)


@pytest.mark.parametrize("f,a,b", [
    (lambda x: np.exp(1j * 5 * x) * np.cos(x) ** 2, 0.0, np.pi),
    (lambda x: np.exp(-200 * (x - 0.3) ** 2) + 0j, 0.0, 1.0),
    (lambda x: 1.0 / (1.0 + 25 * x**2) + 1j * np.sin(x), -1.0, 1.0),
    (lambda x: (1 - 0.8 * np.cos(x)) ** -1.5 + 0j, 0.0, np.pi),
])
def test_matches_scipy_quad(f, a, b):
    r = gauss_kronrod(f, a, b, epsrel=1e-12)
    ref = scipy_complex(f, a, b)
    assert abs(r.value - ref) <= 1e-11 * abs(ref)
    assert r.error <= 1e-12 * abs(r.value)


def test_polynomial_exact_on_single_panel():
    r = gauss_kronrod(lambda x: x**10 + 0j, -1.0, 1.0, epsrel=1e-15, initial_intervals=1)
    assert abs(r.value - 2 / 11) < 1e-15
    assert r.intervals == 1


def test_reports_non_convergence():
    with pytest.raises(ConvergenceError) as info:
        gauss_kronrod(lambda x: 1.0 / np.abs(x - 0.3) + 0j, 0.0, 1.0, epsrel=1e-14, max_levels=3)
    assert info.value.evaluations > 0
