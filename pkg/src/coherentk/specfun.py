"""Special functions: spherical Bessel/Hankel at complex argument, Legendre
polynomials and the m = 0 Gaunt coefficients.

Bessel values are produced as whole order sequences (``j_0 .. j_N``) because
every caller needs a contiguous range of orders at one argument.  ``j_n`` uses
upward recurrence when ``|z| >= N`` and Miller's downward recurrence otherwise;
``h_n^(1)`` always uses upward recurrence.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import SpecialFunctionDomainError, SpecialFunctionRangeError

MAX_ORDER = 400

# |Im z| beyond which exp(|Im z|) overflows a double
_IM_LIMIT = 700.0


def _as_complex(z) -> complex:
    return complex(z)


def _check_order(n: int) -> None:
    if n < 0:
        raise SpecialFunctionDomainError(f"order must be non-negative, got {n}")
    if n > MAX_ORDER:
        raise SpecialFunctionDomainError(f"order {n} exceeds MAX_ORDER={MAX_ORDER}")


def _check_range(values: np.ndarray, what: str, z: complex) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise SpecialFunctionRangeError(f"{what} overflows at z={z!r}")
    return values


def _j_series(n: int, z: complex) -> complex:
    """Power series of j_n, used for |z| <= 1 where closed forms cancel."""
    term = complex(1.0)
    for k in range(1, n + 1):
        term *= z / (2 * k + 1)
    total = term
    w = -0.5 * z * z
    k = 0
    while True:
        k += 1
        term *= w / (k * (2 * n + 2 * k + 1))
        total += term
        if abs(term) <= 1e-18 * abs(total) or k > 60:
            return total


def _j01(z: complex) -> tuple[complex, complex]:
    if abs(z.imag) > _IM_LIMIT:
        raise SpecialFunctionRangeError(f"spherical Bessel j overflows at z={z!r}")
    if abs(z) <= 1.0:
        return _j_series(0, z), _j_series(1, z)
    s, c = cmath.sin(z), cmath.cos(z)
    return s / z, s / (z * z) - c / z


def _jn_upward(nmax: int, z: complex) -> np.ndarray:
    out = np.empty(nmax + 1, dtype=complex)
    j0, j1 = _j01(z)
    out[0] = j0
    if nmax >= 1:
        out[1] = j1
    for n in range(1, nmax):
        out[n + 1] = (2 * n + 1) / z * out[n] - out[n - 1]
    return out


def _miller_start(nmax: int, z: complex) -> int:
    big = max(nmax, abs(z))
    return int(big + 12 + math.sqrt(80.0 * big)) + 1


def _jn_downward(nmax: int, z: complex) -> np.ndarray:
    start = _miller_start(nmax, z)
    out = np.zeros(nmax + 1, dtype=complex)
    f_up, f = 0j, 1e-30 + 0j
    for m in range(start, 0, -1):
        f_down = (2 * m + 1) / z * f - f_up
        f_up, f = f, f_down
        if m - 1 <= nmax:
            out[m - 1] = f
        if abs(f) > 1e250:
            f *= 1e-250
            f_up *= 1e-250
            out[m - 1 :] *= 1e-250
    j0, j1 = _j01(z)
    # normalise on whichever of the two low orders is better conditioned
    if nmax >= 1 and abs(out[1]) > abs(out[0]):
        scale = j1 / out[1]
    else:
        scale = j0 / out[0]
    out *= scale
    # closed forms stay accurate near zeros of j_0, j_1
    out[0] = j0
    if nmax >= 1:
        out[1] = j1
    return out


def spherical_jn_array(nmax: int, z, method: str = "auto") -> np.ndarray:
    """Return ``[j_0(z), ..., j_nmax(z)]`` for complex ``z``.

    ``method`` may force ``"upward"`` or ``"downward"`` recurrence; the
    default switches on ``|z| < nmax``.
    """
    _check_order(nmax)
    z = _as_complex(z)
    if z == 0:
        out = np.zeros(nmax + 1, dtype=complex)
        out[0] = 1.0
        return out
    if method == "auto":
        method = "upward" if abs(z) >= nmax else "downward"
    if method == "upward":
        out = _jn_upward(nmax, z)
    elif method == "downward":
        out = _jn_downward(nmax, z)
    else:
        raise ValueError(f"unknown recurrence {method!r}")
    return _check_range(out, "spherical Bessel j", z)


def spherical_h1n_array(nmax: int, z) -> np.ndarray:
    """Return ``[h^(1)_0(z), ..., h^(1)_nmax(z)]`` by upward recurrence."""
    _check_order(nmax)
    z = _as_complex(z)
    if z == 0:
        raise SpecialFunctionDomainError("spherical Hankel function undefined at z=0")
    if z.imag < -_IM_LIMIT:
        raise SpecialFunctionRangeError(f"spherical Hankel h1 overflows at z={z!r}")
    e = cmath.exp(1j * z)
    out = np.empty(nmax + 1, dtype=complex)
    out[0] = -1j * e / z
    if nmax >= 1:
        out[1] = -e * (z + 1j) / (z * z)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, nmax):
            out[n + 1] = (2 * n + 1) / z * out[n] - out[n - 1]
    return _check_range(out, "spherical Hankel h1", z)


def derivative_from_sequence(values: np.ndarray, z: complex) -> np.ndarray:
    """Derivatives of orders ``0..len(values)-2`` from a sequence ``f_0..f_{N+1}``.

    Uses ``f_0' = -f_1`` and ``f_n' = f_{n-1} - (n+1)/z f_n``.
    """
    z = _as_complex(z)
    n_out = len(values) - 1
    d = np.empty(n_out, dtype=complex)
    d[0] = -values[1]
    if n_out > 1:
        n = np.arange(1, n_out)
        d[1:] = values[:-2][: n_out - 1] - (n + 1) / z * values[1:n_out]
    return d


def spherical_jn_with_derivative(nmax: int, z) -> tuple[np.ndarray, np.ndarray]:
    """``(j_n(z), j_n'(z))`` for ``n = 0..nmax``."""
    z = _as_complex(z)
    vals = spherical_jn_array(nmax + 1, z)
    if z == 0:
        d = np.zeros(nmax + 1, dtype=complex)
        if nmax >= 1:
            d[1] = 1.0 / 3.0
        return vals[: nmax + 1], d
    return vals[: nmax + 1], derivative_from_sequence(vals, z)


def spherical_h1n_with_derivative(nmax: int, z) -> tuple[np.ndarray, np.ndarray]:
    """``(h^(1)_n(z), h^(1)_n'(z))`` for ``n = 0..nmax``."""
    z = _as_complex(z)
    vals = spherical_h1n_array(nmax + 1, z)
    return vals[: nmax + 1], derivative_from_sequence(vals, z)


def spherical_jn(n: int, z) -> complex:
    """Spherical Bessel function of the first kind, ``j_n(z)``."""
    return complex(spherical_jn_array(n, z)[n])


def spherical_jn_prime(n: int, z) -> complex:
    return complex(spherical_jn_with_derivative(n, z)[1][n])


def spherical_h1n(n: int, z) -> complex:
    """Spherical Hankel function of the first kind, ``h_n^(1)(z) = j_n + i y_n``."""
    return complex(spherical_h1n_array(n, z)[n])


def spherical_h1n_prime(n: int, z) -> complex:
    return complex(spherical_h1n_with_derivative(n, z)[1][n])


# -- Legendre polynomials ---------------------------------------------------


def legendre_table(nmax: int, x) -> np.ndarray:
    """``P_0(x) .. P_nmax(x)`` stacked along the first axis (no domain check)."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = x
    for n in range(1, nmax):
        out[n + 1] = ((2 * n + 1) * x * out[n] - n * out[n - 1]) / (n + 1)
    return out


def legendre_derivative_table(nmax: int, x, values: np.ndarray | None = None) -> np.ndarray:
    """``dP_n/dx`` for ``n = 0..nmax`` via ``P'_{n+1} = P'_{n-1} + (2n+1) P_n``.

    This form has no ``1 - x^2`` division, so it is exact at ``x = +-1``.
    """
    x = np.asarray(x, dtype=float)
    if values is None:
        values = legendre_table(nmax, x)
    out = np.zeros((nmax + 1,) + x.shape)
    if nmax >= 1:
        out[1] = 1.0
    for n in range(1, nmax):
        out[n + 1] = out[n - 1] + (2 * n + 1) * values[n]
    return out


def legendre_pn(n: int, x: float) -> float:
    """Legendre polynomial ``P_n(x)`` for ``|x| <= 1``."""
    if n < 0:
        raise SpecialFunctionDomainError(f"order must be non-negative, got {n}")
    if not abs(x) <= 1.0:
        raise SpecialFunctionDomainError(f"Legendre argument must satisfy |x| <= 1, got {x}")
    return float(legendre_table(n, x)[n])


# -- Gaunt coefficients -------------------------------------------------------


@lru_cache(maxsize=None)
def _factorial(k: int) -> int:
    return math.factorial(k)


def threej000_squared(a: int, b: int, c: int) -> Fraction:
    """Square of the Wigner 3j symbol ``(a b c; 0 0 0)`` as an exact rational."""
    J = a + b + c
    if J % 2 or c < abs(a - b) or c > a + b:
        return Fraction(0)
    g = J // 2
    num = _factorial(J - 2 * a) * _factorial(J - 2 * b) * _factorial(J - 2 * c)
    ratio = Fraction(_factorial(g), _factorial(g - a) * _factorial(g - b) * _factorial(g - c))
    return Fraction(num, _factorial(J + 1)) * ratio * ratio


@lru_cache(maxsize=None)
def gaunt0(n: int, nu: int, ell: int) -> float:
    """Coefficient of ``P_ell`` in the expansion of ``P_n * P_nu``.

    Equal to ``(2 ell + 1) (3j(n nu ell; 0 0 0))^2``; zero outside
    ``|n - nu| <= ell <= n + nu`` and whenever ``n + nu + ell`` is odd.
    """
    if n < 0 or nu < 0 or ell < 0:
        raise ValueError(f"Gaunt indices must be non-negative, got {(n, nu, ell)}")
    return float((2 * ell + 1) * threej000_squared(n, nu, ell))


def gaunt_orthonormal_factor(n: int, nu: int, ell: int) -> float:
    """Factor converting ``gaunt0`` to the orthonormal-harmonic convention.

    ``G_orth(n, nu, ell) = gaunt0(n, nu, ell) * factor`` with
    ``factor = sqrt((2n+1)(2nu+1) / (4 pi (2 ell + 1)))``, i.e. the integral
    of three ``Y_l^0`` over the sphere.
    """
    return math.sqrt((2 * n + 1) * (2 * nu + 1) / (4.0 * math.pi * (2 * ell + 1)))


def gaunt_orthonormal(n: int, nu: int, ell: int) -> float:
    return gaunt0(n, nu, ell) * gaunt_orthonormal_factor(n, nu, ell)


@dataclass(frozen=True)
class GauntTable:
    """Read-only table of ``gaunt0(n, nu, ell)`` for ``n, nu <= max_n``.

    ``entries`` holds only admissible triples; ``dense`` is the same data as a
    ``(max_n+1, max_n+1, 2*max_n+1)`` array with zeros elsewhere, which is
    what the modal assembly contracts against.
    """

    max_n: int
    entries: dict = field(repr=False)
    dense: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, max_n: int) -> "GauntTable":
        entries = {}
        dense = np.zeros((max_n + 1, max_n + 1, 2 * max_n + 1))
        for n in range(max_n + 1):
            for nu in range(n, max_n + 1):
                for ell in range(nu - n, n + nu + 1, 2):
                    val = gaunt0(n, nu, ell)
                    entries[(n, nu, ell)] = entries[(nu, n, ell)] = val
                    dense[n, nu, ell] = dense[nu, n, ell] = val
        dense.setflags(write=False)
        return cls(max_n=max_n, entries=entries, dense=dense)

    def __call__(self, n: int, nu: int, ell: int) -> float:
        return self.entries.get((n, nu, ell), 0.0)

    def row(self, n: int, nu: int) -> tuple[np.ndarray, np.ndarray]:
        """Admissible ``ell`` values and coefficients for one ``(n, nu)`` pair."""
        ells = np.arange(abs(n - nu), n + nu + 1, 2)
        return ells, np.array([self.entries[(n, nu, int(l))] for l in ells])

    def row_sum(self, n: int, nu: int) -> float:
        return math.fsum(self.row(n, nu)[1])


@lru_cache(maxsize=16)
def gaunt_table(max_n: int) -> GauntTable:
    """Shared, cached :class:`GauntTable` for a given maximum order."""
    return GauntTable.build(max_n)
