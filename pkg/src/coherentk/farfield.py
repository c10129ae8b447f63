"""Far-field scattering functions and the Lloyd-Berry coefficients.

``f^{qp}(theta) = sum_n (2n+1) T_n^{qp} P_n(cos theta)`` is the angular
amplitude for conversion of wave ``p`` into wave ``q``.  The second-order
dispersion coefficients can be written either as Gaunt-weighted double series
in the T coefficients or as single integrals of products of far-field
functions; both routes are provided so they can check each other.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import RegimeError, SpecialFunctionDomainError
from .quadrature import QuadResult, gauss_kronrod
from .specfun import gaunt_table, legendre_derivative_table, legendre_table
from .tmatrix import TMatrixSet

QUAD_EPSREL = 1e-12
SERIES_TAIL_TOL = 1e-12


class TruncationWarning(UserWarning):
    """A truncated series may not have converged."""


def _theta_array(theta) -> np.ndarray:
    th = np.asarray(theta, dtype=float)
    if np.any(th < 0) or np.any(th > math.pi) or not np.all(np.isfinite(th)):
        raise ValueError("theta must lie in [0, pi]")
    return th


def _weights(t: TMatrixSet, q: int, p: int) -> np.ndarray:
    n = np.arange(t.n_max + 1)
    return (2 * n + 1) * t.coeffs[:, q, p]


def _series(w: np.ndarray, th: np.ndarray) -> np.ndarray:
    leg = legendre_table(w.size - 1, np.cos(th))
    return np.tensordot(w, leg, axes=(0, 0))


def _series_dtheta(w: np.ndarray, th: np.ndarray) -> np.ndarray:
    dleg = legendre_derivative_table(w.size - 1, np.cos(th))
    return -np.sin(th) * np.tensordot(w, dleg, axes=(0, 0))


def farfield_f(q: int, p: int, theta, t: TMatrixSet):
    """Far-field function ``f^{qp}`` at ``theta`` (scalar or array, radians)."""
    th = _theta_array(theta)
    out = _series(_weights(t, q, p), th)
    return complex(out) if out.ndim == 0 else out


def farfield_f_derivative(q: int, p: int, theta, t: TMatrixSet):
    """``d f^{qp} / d theta`` from the analytic Legendre derivative."""
    th = _theta_array(theta)
    out = _series_dtheta(_weights(t, q, p), th)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FarFieldFunction:
    """``f^{qp}`` bound to a T-matrix set."""

    q: int
    p: int
    tmatrix: TMatrixSet

    def __call__(self, theta):
        return farfield_f(self.q, self.p, theta, self.tmatrix)

    def derivative(self, theta):
        return farfield_f_derivative(self.q, self.p, theta, self.tmatrix)

    @property
    def forward(self) -> complex:
        return complex(np.sum(_weights(self.tmatrix, self.q, self.p)))

    @property
    def backward(self) -> complex:
        w = _weights(self.tmatrix, self.q, self.p)
        return complex(np.sum(w * (-1.0) ** np.arange(w.size)))


def legendre_coefficients(func, n_max: int, *, epsrel: float = QUAD_EPSREL) -> np.ndarray:
    """Project ``func(theta)`` on Legendre polynomials.

    Returns ``c_n = (2n+1)/2 int_0^pi func P_n(cos theta) sin theta dtheta`` for
    ``n = 0..n_max``; applied to ``f^{qp}`` this recovers ``(2n+1) T_n^{qp}``.
    Coefficients that vanish are resolved to ``epsrel`` times the scale
    ``int |func| sin theta dtheta`` rather than to relative accuracy.
    """
    scale = gauss_kronrod(lambda th: np.abs(func(th)) * np.sin(th), 0.0, math.pi, epsrel=1e-6).value
    epsabs = epsrel * abs(scale)
    out = np.empty(n_max + 1, dtype=complex)
    for n in range(n_max + 1):
        def integrand(th, n=n):
            return func(th) * legendre_table(n, np.cos(th))[n] * np.sin(th)

        res = gauss_kronrod(integrand, 0.0, math.pi, epsrel=epsrel, epsabs=epsabs)
        out[n] = (2 * n + 1) / 2 * res.value
    return out


# -- the coupling kernel ------------------------------------------------------


def _check_kappa(kappa) -> complex:
    kappa = complex(kappa)
    if not abs(kappa) < 1:
        raise SpecialFunctionDomainError(f"|kappa| must be < 1, got {abs(kappa):.6g}")
    return kappa


def _kernel_base(kappa: complex, th: np.ndarray) -> np.ndarray:
    return 1 - 2 * kappa * np.cos(th) + kappa * kappa


def g_kappa_theta(kappa, theta):
    """``sum_m kappa^m (2m+1) P_m(cos theta) = (1-kappa^2)(1-2 kappa cos theta+kappa^2)^(-3/2)``.

    The power uses the principal branch; for ``|kappa| < 1`` the base stays
    off the negative real axis so the result is continuous in ``theta``.
    """
    kappa = _check_kappa(kappa)
    th = np.asarray(theta, dtype=float)
    out = (1 - kappa * kappa) * np.asarray(_kernel_base(kappa, th), dtype=complex) ** -1.5
    return complex(out) if out.ndim == 0 else out


def g_kappa_series(kappa, theta, terms: int):
    """Partial sum of the defining series with ``m = 0..terms``."""
    kappa = complex(kappa)
    th = np.asarray(theta, dtype=float)
    m = np.arange(terms + 1)
    out = _series(kappa**m * (2 * m + 1), th)
    return complex(out) if out.ndim == 0 else out


def g_series_tail_bound(kappa, terms: int) -> float:
    """Bound on ``|g - g_series(terms)|``: ``|kappa|^(M+1)(2M+3)/(1-|kappa|)^3``."""
    r = abs(complex(kappa))
    if r >= 1:
        return math.inf
    return r ** (terms + 1) * (2 * terms + 3) / (1 - r) ** 3


# -- S(kappa) -------------------------------------------------------------------


def s_kappa_series(q: int, p: int, kappa, t: TMatrixSet, *, tail_tol: float = SERIES_TAIL_TOL) -> complex:
    """Gaunt series for the coupling sum ``S(kappa)``.

    Only Gaunt-supported ``l`` contribute, so the sum is finite for any
    ``kappa``, including ``|kappa| > 1``.  The outermost order shell is used as
    a tail estimate; a :class:`TruncationWarning` is issued when it exceeds
    ``tail_tol`` relative to the result.
    """
    kappa = complex(kappa)
    a = _weights(t, q, p)
    c = _weights(t, p, q)
    if not np.any(a) or not np.any(c):
        return 0j
    n_max = t.n_max
    g = gaunt_table(n_max).dense
    powers = kappa ** np.arange(2 * n_max + 1)
    kern = np.tensordot(g, powers, axes=([2], [0]))
    terms = a[:, None] * kern * c[None, :]
    total = complex(np.sum(terms))
    if n_max > 0:
        shell = abs(complex(np.sum(terms[-1, :]) + np.sum(terms[:-1, -1])))
        if shell > tail_tol * max(abs(total), np.finfo(float).tiny):
            warnings.warn(
                f"S(kappa) series for pair ({q},{p}) may be under-truncated: outer shell "
                f"n_max={n_max} contributes {shell:.2e} (|S| = {abs(total):.2e})",
                TruncationWarning,
                stacklevel=2,
            )
    return total


def s_kappa_integral(q: int, p: int, kappa, t: TMatrixSet, *, epsrel: float = QUAD_EPSREL,
                     epsabs: float = 0.0, full_output: bool = False):
    """``S(kappa) = (1-kappa^2)/2 int_0^pi f^{qp} f^{pq} (1-2 kappa cos theta+kappa^2)^(-3/2) sin theta dtheta``.

    Valid for ``|kappa| < 1``.  With ``full_output`` the :class:`QuadResult`
    is returned alongside the value.
    """
    kappa = _check_kappa(kappa)
    a = _weights(t, q, p)
    c = _weights(t, p, q)
    if not np.any(a) or not np.any(c):
        return (0j, QuadResult(0j, 0.0, 0, 0)) if full_output else 0j

    def integrand(th):
        base = np.asarray(_kernel_base(kappa, th), dtype=complex)
        return _series(a, th) * _series(c, th) * base**-1.5 * np.sin(th)

    res = gauss_kronrod(integrand, 0.0, math.pi, epsabs=epsabs, epsrel=epsrel)
    value = 0.5 * (1 - kappa * kappa) * res.value
    return (value, res) if full_output else value


# -- Lloyd-Berry coefficients ------------------------------------------------------


def delta1(p: int, t: TMatrixSet, k_p) -> complex:
    """First-order coefficient ``-4 i pi f^{pp}(0) / k_p``."""
    f0 = complex(np.sum(_weights(t, p, p)))
    return -4j * math.pi * f0 / complex(k_p)


def delta2_integrand(p: int, t: TMatrixSet):
    """``d(f^2)/dtheta / sin(theta/2)`` written without the removable singularity.

    Since ``sin theta / sin(theta/2) = 2 cos(theta/2)`` the integrand equals
    ``-4 cos(theta/2) f(theta) sum_n (2n+1) T_n P_n'(cos theta)``.
    """
    w = _weights(t, p, p)

    def integrand(th):
        x = np.cos(th)
        dleg = legendre_derivative_table(w.size - 1, x)
        return -4 * np.cos(th / 2) * _series(w, th) * np.tensordot(w, dleg, axes=(0, 0))

    return integrand


def delta2(p: int, t: TMatrixSet, k_p, *, theta_min: float = 0.0, epsrel: float = QUAD_EPSREL,
           epsabs: float = 0.0) -> complex:
    """Lloyd-Berry second-order coefficient::

        (4 pi^2 / k_p^4) { f(0)^2 - f(pi)^2 + int_0^pi [d f^2/dtheta] / sin(theta/2) dtheta }

    The integrand is bounded at ``theta = 0``, so no endpoint exclusion is
    needed; ``theta_min`` drops ``[0, theta_min)`` for stability studies.
    """
    w = _weights(t, p, p)
    if not np.any(w):
        return 0j
    f0 = complex(np.sum(w))
    fpi = complex(np.sum(w * (-1.0) ** np.arange(w.size)))
    integral = 0j
    if w.size > 1:
        integral = gauss_kronrod(delta2_integrand(p, t), float(theta_min), math.pi,
                                 epsabs=epsabs, epsrel=epsrel).value
    k_p = complex(k_p)
    return 4 * math.pi**2 / k_p**4 * (f0 * f0 - fpi * fpi + integral)


def delta2_series(p: int, t: TMatrixSet, k_p) -> complex:
    """Series form ``-(8 pi^2 / k_p^4) sum (2n+1)(2nu+1) G l T_n T_nu``."""
    w = _weights(t, p, p)
    if not np.any(w):
        return 0j
    g = gaunt_table(t.n_max).dense
    ells = np.arange(2 * t.n_max + 1, dtype=float)
    total = complex(w @ np.tensordot(g, ells, axes=([2], [0])) @ w)
    return -8 * math.pi**2 / complex(k_p) ** 4 * total


def _coupled(t: TMatrixSet, q: int, p: int) -> bool:
    return bool(np.any(t.coeffs[:, q, p])) and bool(np.any(t.coeffs[:, p, q]))


def check_fast_wave(p: int, t: TMatrixSet, k) -> None:
    """Raise :class:`RegimeError` unless ``|k_p / k_q| < 1`` for every wave coupled to ``p``."""
    k = np.asarray(k, dtype=complex)
    for q in range(k.size):
        if q != p and _coupled(t, q, p) and not abs(k[p] / k[q]) < 1:
            raise RegimeError(
                f"wave {p} is not faster than wave {q} (|k_p/k_q| = {abs(k[p] / k[q]):.4g} >= 1); "
                "the far-field coupling integral does not apply, use wavenumber_lowfreq_o2"
            )


def delta2_coupling(p: int, t: TMatrixSet, k, *, form: str = "integral",
                    epsrel: float = QUAD_EPSREL) -> complex:
    """Coupling correction to the second-order coefficient.

    ``form="series"``: ``sum_{q!=p} 16 pi^2 / (k_p k_q (k_q^2 - k_p^2)) S(k_p/k_q)``.

    ``form="integral"``: ``sum_{q!=p} (8 pi^2 / k_p) int f^{qp} f^{pq} sin theta / D_q^3 dtheta``
    with ``D_q^3 = k_q^3 (1 - 2 kappa cos theta + kappa^2)^(3/2)``, principal branch.

    ``k`` holds the host wavenumbers of all waves.  Only waves actually coupled
    to ``p`` enter, and each of them must be slower than ``p``.
    """
    if form not in ("integral", "series"):
        raise ValueError(f"form must be 'integral' or 'series', got {form!r}")
    k = np.asarray(k, dtype=complex).reshape(-1)
    if k.size != t.P:
        raise ValueError(f"{k.size} wavenumbers for a P={t.P} T-matrix")
    check_fast_wave(p, t, k)
    kp = complex(k[p])
    total = 0j
    for q in range(t.P):
        if q == p or not _coupled(t, q, p):
            continue
        kq = complex(k[q])
        kappa = kp / kq
        if form == "series":
            s = s_kappa_series(q, p, kappa, t)
            total += 16 * math.pi**2 / (kp * kq * (kq * kq - kp * kp)) * s
        else:
            a = _weights(t, q, p)
            c = _weights(t, p, q)

            def integrand(th, a=a, c=c, kappa=kappa):
                base = np.asarray(_kernel_base(kappa, th), dtype=complex)
                return _series(a, th) * _series(c, th) * np.sin(th) * base**-1.5

            val = gauss_kronrod(integrand, 0.0, math.pi, epsrel=epsrel).value
            total += 8 * math.pi**2 / kp * val / kq**3
    return total


def sample_farfield(q: int, p: int, t: TMatrixSet, samples: int) -> np.ndarray:
    """``(theta, f)`` on ``samples`` equispaced angles covering ``[0, pi]``."""
    if samples < 2:
        raise ValueError("need at least 2 samples")
    th = np.linspace(0.0, math.pi, samples)
    return th, _series(_weights(t, q, p), th)


__all__ = [
    "FarFieldFunction",
    "TruncationWarning",
    "check_fast_wave",
    "delta1",
    "delta2",
    "delta2_coupling",
    "delta2_integrand",
    "delta2_series",
    "farfield_f",
    "farfield_f_derivative",
    "g_kappa_series",
    "g_kappa_theta",
    "g_series_tail_bound",
    "legendre_coefficients",
    "s_kappa_integral",
    "s_kappa_series",
    "sample_farfield",
]
