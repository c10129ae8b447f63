"""Building blocks of the dispersion relation.

``Q^(p)(xi)`` is the hole-corrected propagator block of wave ``p``::

    Q^(p)_{n nu}(xi) = pi / (k_p y_p) * [i k_p b sum_l N_l^(p)(xi) G(n, nu, l) - 1] * (-1)^(n+nu)

with ``y_p = xi^2 - k_p^2`` and ``N_l^(p)`` the boundary kernel of
:func:`n_ell`.  Because ``N_l^(p)(k_p) = -i/(k_p b)`` for every ``l`` and the
Gaunt coefficients of a fixed ``(n, nu)`` sum to one, the bracket vanishes at
``xi = k_p`` and the block is analytic there.  Close to ``k_p`` it is therefore
evaluated as ``i pi b sum_l G [N_l(xi) - N_l(k_p)] / (xi^2 - k_p^2)`` with the
difference quotient taken from a Taylor series, which avoids the cancellation
in the first form.

Matrix elements ``M_qp`` are ``pi / sqrt(k_q k_p) * <e| [T (I - eps Qbar T)^{-1}]_{qp} |e>``
with ``e_n = (-1)^n``; at ``eps = 0`` this is the order-0 element
``pi / sqrt(k_q k_p) sum_n (2n+1) T_n^{qp}``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from .errors import ConditioningError, DegeneracyError, SpecializationRequired
from .specfun import (
    GauntTable,
    gaunt_table,
    spherical_h1n_with_derivative,
    spherical_jn_with_derivative,
)
from .tmatrix import HostMedium, MixtureSpec, TMatrixSet, default_truncation

TAU_DEG = 1e-8
RCOND_MIN = 1e-13
# relative distance |xi - k_p| b / min(1, |k_p b|) below which the Taylor route is used
TAYLOR_RADIUS = 0.25


@dataclass(frozen=True)
class ModalSystem:
    """Everything needed to assemble the modal equations at one frequency.

    ``k`` holds the host wavenumbers (1/m) in wave order; ``tmatrix`` is
    already truncated to ``n_max``.
    """

    k: np.ndarray
    tmatrix: TMatrixSet
    mixture: MixtureSpec
    n_max: int
    gaunt: GauntTable = field(repr=False)
    omega: float | None = None
    tau_deg: float = TAU_DEG
    rcond_min: float = RCOND_MIN
    warnings: tuple = ()

    @classmethod
    def from_wavenumbers(cls, k, tmatrix: TMatrixSet, mixture: MixtureSpec,
                         n_max: int | None = None, omega: float | None = None,
                         **kw) -> "ModalSystem":
        k = np.array(k, dtype=complex).reshape(-1)
        k.setflags(write=False)
        if k.size != tmatrix.P:
            raise ValueError(f"{k.size} host wavenumbers for a P={tmatrix.P} T-matrix")
        if np.any(k == 0):
            raise ValueError("host wavenumbers must be non-zero")
        warnings = []
        if tmatrix.under_truncated:
            warnings.append(
                f"T-matrix under-truncated: max |T_n| at n_max={tmatrix.n_max} is "
                f"{np.max(np.abs(tmatrix.coeffs[-1])):.2e} >= floor {tmatrix.floor:.0e}"
            )
        if n_max is None:
            n_max = default_truncation(tmatrix)
        t = tmatrix.truncated(n_max)
        return cls(k, t, mixture, n_max, gaunt_table(n_max), omega, warnings=tuple(warnings), **kw)

    @classmethod
    def build(cls, host: HostMedium, tmatrix: TMatrixSet, mixture: MixtureSpec, omega: float,
              n_max: int | None = None, **kw) -> "ModalSystem":
        return cls.from_wavenumbers(host.wavenumbers(omega), tmatrix, mixture, n_max, omega, **kw)

    @property
    def P(self) -> int:
        return self.k.size

    @property
    def b(self) -> float:
        return self.mixture.hole_b

    @property
    def epsilon(self) -> complex:
        return self.mixture.epsilon

    def y(self, xi) -> np.ndarray:
        return complex(xi) ** 2 - self.k**2

    def with_mixture(self, mixture: MixtureSpec) -> "ModalSystem":
        return ModalSystem(self.k, self.tmatrix, mixture, self.n_max, self.gaunt, self.omega,
                           self.tau_deg, self.rcond_min, self.warnings)

    def select(self, waves) -> "ModalSystem":
        """Subsystem restricted to some wave types (used for decoupled T)."""
        waves = list(waves)
        k = self.k[waves].copy()
        k.setflags(write=False)
        return ModalSystem(k, self.tmatrix.select(waves), self.mixture, self.n_max, self.gaunt,
                           self.omega, self.tau_deg, self.rcond_min, self.warnings)

    def check_distinct(self, p: int, q: int) -> None:
        gap = abs(self.k[p] ** 2 - self.k[q] ** 2)
        scale = float(np.max(np.abs(self.k) ** 2))
        if gap < self.tau_deg * scale:
            raise DegeneracyError(
                f"host wavenumbers of waves {p} and {q} nearly coincide: "
                f"|k_p^2 - k_q^2| = {gap:.3e} < {self.tau_deg:.0e} * {scale:.3e}"
            )

    def sign_outer(self) -> np.ndarray:
        e = (-1.0) ** np.arange(self.n_max + 1)
        return np.outer(e, e)

    def gaunt_sum(self, weights: np.ndarray) -> np.ndarray:
        """``sum_l G(n, nu, l) weights[l]`` for all ``n, nu``."""
        return np.tensordot(self.gaunt.dense, weights, axes=([2], [0]))


# -- boundary kernel N_l ----------------------------------------------------


@lru_cache(maxsize=256)
def _hankel_pair(lmax: int, z: complex):
    return spherical_h1n_with_derivative(lmax, z)


def n_ell_array(lmax: int, xi, k_p, b: float) -> np.ndarray:
    """``N_l(xi) = xi b j_l'(xi b) h_l(k_p b) - k_p b j_l(xi b) h_l'(k_p b)`` for ``l <= lmax``."""
    xi, k_p = complex(xi), complex(k_p)
    if b <= 0:
        raise ValueError(f"hole radius must be positive, got {b}")
    w, z = xi * b, k_p * b
    j, jd = spherical_jn_with_derivative(lmax, w)
    h, hd = _hankel_pair(lmax, z)
    return w * jd * h - z * j * hd


def n_ell(ell: int, xi, k_p, b: float) -> complex:
    """Boundary kernel ``N_l^(p)(xi)`` (cross product of regular and outgoing waves at ``r = b``)."""
    return complex(n_ell_array(ell, xi, k_p, b)[ell])


def _j_taylor_coeffs(lmax: int, z: complex, terms: int) -> np.ndarray:
    """Taylor coefficients ``c[m, l]`` of ``j_l(z + t) = sum_m c[m, l] t^m``.

    From the Bessel equation expanded about ``z``::

        z^2 (m+1)(m+2) c_{m+2} = -[2 (m+1)^2 z c_{m+1}
                                   + (m(m+1) + z^2 - l(l+1)) c_m
                                   + 2 z c_{m-1} + c_{m-2}]
    """
    L = np.arange(lmax + 1) * (np.arange(lmax + 1) + 1.0)
    j, jd = spherical_jn_with_derivative(lmax, z)
    c = np.zeros((terms + 1, lmax + 1), dtype=complex)
    c[0], c[1] = j, jd
    z2 = z * z
    for m in range(terms - 1):
        acc = 2 * (m + 1) ** 2 * z * c[m + 1] + (m * (m + 1) + z2 - L) * c[m]
        if m >= 1:
            acc += 2 * z * c[m - 1]
        if m >= 2:
            acc += c[m - 2]
        c[m + 2] = -acc / (z2 * (m + 1) * (m + 2))
    return c


def n_ell_difference_quotient(lmax: int, xi, k_p, b: float, terms: int = 60) -> np.ndarray:
    """``[N_l(xi) - N_l(k_p)] / (xi - k_p)`` without cancellation, for xi near k_p.

    Exact limit ``dN_l/dxi`` at ``xi = k_p``.  Intended for
    ``|xi - k_p| b`` small against ``min(1, |k_p b|)``.
    """
    xi, k_p = complex(xi), complex(k_p)
    z = k_p * b
    delta = (xi - k_p) * b
    c = _j_taylor_coeffs(lmax, z, terms + 1)
    h, hd = _hankel_pair(lmax, z)
    total = np.zeros(lmax + 1, dtype=complex)
    power = complex(1.0)
    small = 0
    for m in range(1, terms + 1):
        term = (h * z * (m + 1) * c[m + 1] + (m * h - z * hd) * c[m]) * power
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
        power *= delta
    return b * total


# -- Qbar blocks ---------------------------------------------------------------


def _use_taylor(xi: complex, k_p: complex, b: float) -> bool:
    return abs(xi - k_p) * b <= TAYLOR_RADIUS * min(1.0, abs(k_p * b))


def qbar_block(p: int, xi, system: ModalSystem) -> np.ndarray:
    """``Qbar^(p)(xi)`` as an ``(n_max+1, n_max+1)`` matrix, valid at any xi including ``k_p``."""
    xi = complex(xi)
    k = complex(system.k[p])
    b = system.b
    L = 2 * system.n_max
    if _use_taylor(xi, k, b):
        d = n_ell_difference_quotient(L, xi, k, b)
        s = system.gaunt_sum(d)
        q = 1j * math.pi * b * s / (xi + k)
    else:
        y = xi * xi - k * k
        s = system.gaunt_sum(n_ell_array(L, xi, k, b))
        q = math.pi / (k * y) * (1j * k * b * s - 1.0)
    return q * system.sign_outer()


def qbar_general_matrix(p: int, xi, system: ModalSystem, y_floor: float = 1e-14) -> np.ndarray:
    """``Qbar^(p)(xi)`` for ``xi^2 != k_p^2``.

    Raises :class:`SpecializationRequired` when ``|xi^2 - k_p^2| <= y_floor |k_p|^2``;
    the at-``k_p`` forms cover that point.
    """
    xi = complex(xi)
    k = complex(system.k[p])
    if abs(xi * xi - k * k) <= y_floor * abs(k) ** 2:
        raise SpecializationRequired(
            f"xi^2 is within {y_floor:.0e} |k_p|^2 of k_p^2 for wave {p}; use the at-k_p form"
        )
    return qbar_block(p, xi, system)


def qbar_general(n: int, nu: int, p: int, xi, system: ModalSystem, y_floor: float = 1e-14) -> complex:
    return complex(qbar_general_matrix(p, xi, system, y_floor)[n, nu])


def qbar_at_kp_offdiag_matrix(q: int, p: int, system: ModalSystem) -> np.ndarray:
    """``Qbar^(q)(k_p)`` for ``q != p``::

        i pi b / (k_p^2 - k_q^2) (-1)^(n+nu) { i/(k_q b) + sum_l G [k_p b j_l'(k_p b) h_l(k_q b)
                                                              - k_q b j_l(k_p b) h_l'(k_q b)] }
    """
    if q == p:
        raise ValueError("off-diagonal form needs q != p")
    system.check_distinct(p, q)
    kp, kq = complex(system.k[p]), complex(system.k[q])
    b = system.b
    s = system.gaunt_sum(n_ell_array(2 * system.n_max, kp, kq, b))
    return 1j * math.pi * b / (kp * kp - kq * kq) * (1j / (kq * b) + s) * system.sign_outer()


def qbar_at_kp_offdiag(n: int, nu: int, q: int, p: int, system: ModalSystem) -> complex:
    return complex(qbar_at_kp_offdiag_matrix(q, p, system)[n, nu])


def qbar_at_kp_diag_matrix(p: int, system: ModalSystem) -> np.ndarray:
    """``Qbar^(p)(k_p)``, the removable-singularity value::

        -i pi b^2 / (2 k_p) (-1)^(n+nu) sum_l G { j_l'(z) [h_l(z) + z h_l'(z)]
                                                  + (z^2 - l(l+1)) / z  j_l(z) h_l(z) },  z = k_p b
    """
    k = complex(system.k[p])
    b = system.b
    z = k * b
    L = 2 * system.n_max
    j, jd = spherical_jn_with_derivative(L, z)
    h, hd = _hankel_pair(L, z)
    ell = np.arange(L + 1)
    w = jd * (h + z * hd) + (z * z - ell * (ell + 1)) / z * j * h
    return -1j * math.pi * b * b / (2 * k) * system.gaunt_sum(w) * system.sign_outer()


def qbar_at_kp_diag(n: int, nu: int, p: int, system: ModalSystem) -> complex:
    return complex(qbar_at_kp_diag_matrix(p, system)[n, nu])


def qbar_lowfreq_offdiag_matrix(q: int, p: int, system: ModalSystem) -> np.ndarray:
    """Long-wavelength limit of :func:`qbar_at_kp_offdiag_matrix`::

        pi / (k_q (k_p^2 - k_q^2)) (-1)^(n+nu) sum_l G [(k_p/k_q)^l - 1]
    """
    if q == p:
        raise ValueError("off-diagonal form needs q != p")
    system.check_distinct(p, q)
    kp, kq = complex(system.k[p]), complex(system.k[q])
    ell = np.arange(2 * system.n_max + 1)
    s = system.gaunt_sum((kp / kq) ** ell - 1.0)
    return math.pi / (kq * (kp * kp - kq * kq)) * s * system.sign_outer()


def qbar_lowfreq_offdiag(n: int, nu: int, q: int, p: int, system: ModalSystem) -> complex:
    return complex(qbar_lowfreq_offdiag_matrix(q, p, system)[n, nu])


def qbar_lowfreq_diag_matrix(p: int, system: ModalSystem) -> np.ndarray:
    """Long-wavelength limit ``pi / (2 k_p^3) (-1)^(n+nu) sum_l l G(n, nu, l)``."""
    k = complex(system.k[p])
    ell = np.arange(2 * system.n_max + 1, dtype=float)
    return math.pi / (2 * k**3) * system.gaunt_sum(ell) * system.sign_outer()


def qbar_lowfreq_diag(n: int, nu: int, p: int, system: ModalSystem) -> complex:
    return complex(qbar_lowfreq_diag_matrix(p, system)[n, nu])


# -- matrix elements -------------------------------------------------------------


def _weighted(t: TMatrixSet, q: int, p: int) -> np.ndarray:
    n = np.arange(t.n_max + 1)
    return (2 * n + 1) * t.coeffs[:, q, p]


def m_order0(q: int, p: int, system: ModalSystem) -> complex:
    """``pi / sqrt(k_q k_p) sum_n (2n+1) T_n^{qp}`` (principal square root of the product)."""
    kq, kp = complex(system.k[q]), complex(system.k[p])
    return math.pi / cmath.sqrt(kq * kp) * complex(np.sum(_weighted(system.tmatrix, q, p)))


def m_order1_diag(p: int, system: ModalSystem, regime: str = "general") -> complex:
    """First-order diagonal element at ``xi = k_p``::

        (pi / k_p) sum_q sum_{n,nu} (-1)^(n+nu) (2n+1)(2nu+1) T_n^{qp} Qbar^(q)_{n nu}(k_p) T_nu^{pq}

    ``regime="general"`` uses the exact at-``k_p`` blocks, ``"lowfreq"`` their
    ``k b -> 0`` limits.
    """
    if regime not in ("general", "lowfreq"):
        raise ValueError(f"regime must be 'general' or 'lowfreq', got {regime!r}")
    t = system.tmatrix
    e = (-1.0) ** np.arange(system.n_max + 1)
    total = 0j
    for q in range(system.P):
        a = e * _weighted(t, q, p)
        c = e * _weighted(t, p, q)
        if not np.any(a) or not np.any(c):
            continue
        if q == p:
            qb = qbar_at_kp_diag_matrix(p, system) if regime == "general" else qbar_lowfreq_diag_matrix(p, system)
        elif regime == "general":
            qb = qbar_at_kp_offdiag_matrix(q, p, system)
        else:
            qb = qbar_lowfreq_offdiag_matrix(q, p, system)
        total += a @ qb @ c
    return math.pi / complex(system.k[p]) * total


@dataclass(frozen=True)
class AssembledSystem:
    """Truncated operators at one trial wavenumber.

    ``qbar`` is block diagonal and ``tblock`` has block ``(r, s)`` equal to
    ``diag((2n+1) T_n^{rs})``; both are ``P (n_max+1)`` square.
    """

    xi: complex
    qbar: np.ndarray
    tblock: np.ndarray


def t_block_matrix(system: ModalSystem) -> np.ndarray:
    size = system.n_max + 1
    P = system.P
    out = np.zeros((P * size, P * size), dtype=complex)
    for r in range(P):
        for s in range(P):
            out[r * size:(r + 1) * size, s * size:(s + 1) * size] = np.diag(_weighted(system.tmatrix, r, s))
    return out


def assemble(xi, system: ModalSystem) -> AssembledSystem:
    size = system.n_max + 1
    P = system.P
    qbar = np.zeros((P * size, P * size), dtype=complex)
    for p in range(P):
        qbar[p * size:(p + 1) * size, p * size:(p + 1) * size] = qbar_block(p, xi, system)
    return AssembledSystem(complex(xi), qbar, t_block_matrix(system))


def m_full_matrix(xi, system: ModalSystem) -> tuple[np.ndarray, float]:
    """All ``M_qp(xi)`` from the truncated resolvent, plus its reciprocal condition number.

    ``M_qp = pi / sqrt(k_q k_p) <e| [T (I - eps Qbar T)^{-1}]_{qp} |e>``, solved with one
    LU factorisation for all P right-hand sides.
    """
    P = system.P
    size = system.n_max + 1
    eps = system.epsilon
    kk = np.sqrt(np.outer(system.k, system.k).astype(complex))
    tb = t_block_matrix(system)
    e = (-1.0) ** np.arange(size)
    rhs = np.zeros((P * size, P), dtype=complex)
    for p in range(P):
        rhs[p * size:(p + 1) * size, p] = e
    if eps == 0 or not np.any(tb):
        m = np.array([[m_order0(q, p, system) for p in range(P)] for q in range(P)])
        return m, 1.0
    asm = assemble(xi, system)
    a = np.eye(P * size) - eps * asm.qbar @ tb
    if not np.all(np.isfinite(a)):
        raise ConditioningError(f"resolvent matrix not finite at xi={complex(xi)!r}", 0.0)
    lu, piv = sla.lu_factor(a, check_finite=False)
    anorm = np.linalg.norm(a, 1)
    rcond, info = sla.lapack.zgecon(lu, anorm, norm="1")
    if info != 0 or not rcond >= system.rcond_min:
        raise ConditioningError(
            f"I - eps Qbar T is ill-conditioned at xi={complex(xi)!r} (rcond={rcond:.2e})",
            float(rcond),
        )
    x = sla.lu_solve((lu, piv), rhs, check_finite=False)
    r = tb @ x
    m = np.empty((P, P), dtype=complex)
    for q in range(P):
        m[q] = e @ r[q * size:(q + 1) * size]
    return math.pi / kk * m, float(rcond)


def m_full(q: int, p: int, xi, system: ModalSystem) -> complex:
    """Single element of :func:`m_full_matrix`."""
    return complex(m_full_matrix(xi, system)[0][q, p])
