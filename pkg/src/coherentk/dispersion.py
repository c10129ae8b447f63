"""Effective wavenumbers of the coherent waves.

Three routes are offered for each host wave ``p``:

* ``asymptotic_o2``: second order in ``eps`` at general frequency, using the
  first-order matrix elements evaluated exactly at ``xi = k_p``;
* ``lowfreq_o2`` / ``lloyd_berry``: the ``k b -> 0`` limit, written either as
  Gaunt series in the T coefficients or through far-field integrals;
* ``determinant``: a root of ``det[y_q delta_qp - eps M_qp(xi)] = 0`` near
  ``k_p``, found in the variable ``u = xi^2 - k_p^2``.

All routes return ``xi = k_p`` exactly when there are no scatterers.
"""

from __future__ import annotations

import cmath
import math
import warnings as _warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import farfield
from .errors import ConvergenceError
from .modal import ModalSystem, m_full_matrix, m_order0, m_order1_diag
from .tmatrix import is_decoupled

METHODS = ("asymptotic_o2", "lowfreq_o2", "lloyd_berry", "determinant")
PHI_WARN = 0.1
KB_WARN = 0.1
BRANCH_CHECK = 0.1
ROOT_TOL = 1e-12
MAX_ITER = 50
DIFF_STEP = 1e-6
COLLISION_TOL = 1e-8


class BranchWarning(UserWarning):
    """The square root branch is not the one continuous with ``k_p``."""


@dataclass(frozen=True)
class EffectiveWavenumber:
    """Effective wavenumber of the coherent wave descended from host wave ``wave``.

    ``order`` is the concentration order of the approximation (2 for the
    expansions, 0 for the non-perturbative determinant root).
    """

    wave: int
    xi: complex
    xi_squared: complex
    method: str
    order: int
    n_max: int
    residual: float = math.nan
    iterations: int = 0
    warnings: tuple = ()

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class DispersionResult:
    """Per-wave results for each requested method at one frequency."""

    omega: float | None
    results: dict
    n0: float
    radius_a: float
    hole_b: float
    n_max: int
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        P = self.provenance.get("P")
        for m, rows in self.results.items():
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
            if P is not None and len(rows) != P:
                raise ValueError(f"method {m} has {len(rows)} entries, expected {P}")

    def __getitem__(self, method: str) -> tuple:
        return self.results[method]


# -- branch selection -------------------------------------------------------------


def _root_with_branch(u: complex, k_p: complex) -> tuple[complex, list]:
    """``xi`` with ``xi^2 = k_p^2 + u``, ``Im xi >= 0`` (``Re xi > 0`` on the real axis)."""
    k_p = complex(k_p)
    notes = []
    xi = k_p * cmath.sqrt(1 + u / (k_p * k_p))
    if xi.imag < 0 or (xi.imag == 0 and xi.real < 0):
        xi = -xi
    if abs(u) < BRANCH_CHECK * abs(k_p * k_p) and abs(xi - k_p) > abs(xi + k_p):
        msg = (f"branch rule picked xi={xi!r}, not the root continuous with k_p={k_p!r}; "
               "the host wave may be amplified")
        _warnings.warn(msg, BranchWarning, stacklevel=3)
        notes.append(msg)
    return xi, notes


def xi_from_square(xi_sq, k_p) -> complex:
    """Square root of ``xi_sq`` with ``Im xi >= 0``, or ``Re xi > 0`` when real.

    Computed as ``k_p sqrt(1 + (xi_sq - k_p^2)/k_p^2)`` so that ``xi_sq = k_p^2``
    returns ``k_p`` itself.  A :class:`BranchWarning` is issued when ``xi_sq``
    is close to ``k_p^2`` but the selected root is not the one nearest ``k_p``.
    """
    xi_sq = complex(xi_sq)
    if xi_sq == 0:
        raise ValueError("xi_sq must be non-zero")
    k_p = complex(k_p)
    if k_p == 0:
        raise ValueError("k_p must be non-zero")
    return _root_with_branch(xi_sq - k_p * k_p, k_p)[0]


# -- helpers ----------------------------------------------------------------------


def _coupled(system: ModalSystem, q: int, p: int) -> bool:
    t = system.tmatrix.coeffs
    return bool(np.any(t[:, q, p])) and bool(np.any(t[:, p, q]))


def _trivial(system: ModalSystem) -> bool:
    return system.epsilon == 0 or not np.any(system.tmatrix.coeffs)


def _base_warnings(system: ModalSystem) -> list:
    out = list(system.warnings)
    phi = system.mixture.volume_fraction
    if phi > PHI_WARN:
        out.append(f"volume fraction {phi:.3g} exceeds {PHI_WARN}; low-concentration expansion may be inaccurate")
    return out


def _make(p: int, u: complex, system: ModalSystem, method: str, order: int, notes: list,
          **extra) -> EffectiveWavenumber:
    k_p = complex(system.k[p])
    if u == 0:
        xi, branch = k_p, []
    else:
        xi, branch = _root_with_branch(u, k_p)
    return EffectiveWavenumber(p, xi, xi * xi, method, order, system.n_max,
                               warnings=tuple(notes + branch), **extra)


# -- second-order asymptotics -------------------------------------------------


def asymptotic_coefficients(p: int, system: ModalSystem) -> tuple[complex, complex]:
    """``(y1, y2)`` with ``xi_p^2 = k_p^2 + eps y1 + eps^2 y2 + O(eps^3)``.

    ``y1 = M0_pp`` and ``y2 = M1_pp + sum_{q!=p} M0_pq M0_qp / (k_p^2 - k_q^2)``;
    only waves coupled to ``p`` enter the sum, so only they are checked for
    degeneracy with ``k_p``.
    """
    k = system.k
    y1 = m_order0(p, p, system)
    y2 = m_order1_diag(p, system, "general")
    for q in range(system.P):
        if q == p or not _coupled(system, q, p):
            continue
        system.check_distinct(p, q)
        y2 += m_order0(p, q, system) * m_order0(q, p, system) / (k[p] ** 2 - k[q] ** 2)
    return complex(y1), complex(y2)


def wavenumber_asymptotic_o2(p: int, system: ModalSystem) -> EffectiveWavenumber:
    """Second-order low-concentration wavenumber at general frequency."""
    notes = _base_warnings(system)
    if _trivial(system):
        return _make(p, 0j, system, "asymptotic_o2", 2, notes)
    eps = system.epsilon
    y1, y2 = asymptotic_coefficients(p, system)
    return _make(p, eps * y1 + eps * eps * y2, system, "asymptotic_o2", 2, notes)


def leading_order_matrix(p: int, system: ModalSystem, y1: complex) -> np.ndarray:
    """Leading-order determinant matrix in the ``eps`` expansion.

    Row/column ``p`` holds ``y1 - M0_pp`` on the diagonal and ``-M0_pq`` below
    it; the other diagonal entries are ``k_p^2 - k_q^2``.
    """
    P = system.P
    k = system.k
    a = np.zeros((P, P), dtype=complex)
    for q in range(P):
        if q == p:
            a[p, p] = y1 - m_order0(p, p, system)
        else:
            a[q, p] = -m_order0(p, q, system)
            a[q, q] = k[p] ** 2 - k[q] ** 2
    return a


def second_order_matrix(p: int, system: ModalSystem, y2: complex) -> np.ndarray:
    """Second-order determinant matrix; singular exactly when ``y2`` is correct."""
    a = leading_order_matrix(p, system, 0j)
    a[p, p] = y2 - m_order1_diag(p, system, "general")
    for q in range(system.P):
        if q != p:
            a[p, q] = -m_order0(q, p, system)
    return a


def lowfreq_coefficients(p: int, system: ModalSystem) -> tuple[complex, complex, complex]:
    """``(c1, c2, c2_coupling)`` with ``xi^2 - k_p^2 = c1 n0 + (c2 + c2_coupling) n0^2``."""
    t = system.tmatrix
    k = system.k
    kp = complex(k[p])
    n = np.arange(system.n_max + 1)
    g = system.gaunt.dense
    ells = np.arange(2 * system.n_max + 1)
    a_pp = (2 * n + 1) * t.coeffs[:, p, p]
    c1 = -4j * math.pi / kp * complex(np.sum(a_pp))
    c2 = -8 * math.pi**2 / kp**4 * complex(a_pp @ system.gaunt_sum(ells.astype(float)) @ a_pp)
    cc = 0j
    for q in range(system.P):
        if q == p or not _coupled(system, q, p):
            continue
        system.check_distinct(p, q)
        kq = complex(k[q])
        a = (2 * n + 1) * t.coeffs[:, q, p]
        c = (2 * n + 1) * t.coeffs[:, p, q]
        s = complex(a @ np.tensordot(g, (kp / kq) ** ells, axes=([2], [0])) @ c)
        cc += 2 * kp**3 / (kq * (kp * kp - kq * kq)) * s
    cc *= -8 * math.pi**2 / kp**4
    return c1, c2, cc


def wavenumber_lowfreq_o2(p: int, system: ModalSystem) -> EffectiveWavenumber:
    """Explicit low-frequency second-order wavenumber (Gaunt series form).

    A warning is attached when ``|k_p| b > 0.1``; the result is still returned.
    """
    notes = _base_warnings(system)
    kb = abs(system.k[p]) * system.b
    if kb > KB_WARN:
        notes.append(f"|k_p| b = {kb:.3g} exceeds {KB_WARN}; low-frequency formula outside its regime")
    if _trivial(system):
        return _make(p, 0j, system, "lowfreq_o2", 2, notes)
    n0 = system.mixture.n0
    c1, c2, cc = lowfreq_coefficients(p, system)
    return _make(p, c1 * n0 + (c2 + cc) * n0 * n0, system, "lowfreq_o2", 2, notes)


def lloyd_berry_coefficients(p: int, system: ModalSystem, *,
                             epsrel: float = farfield.QUAD_EPSREL) -> tuple[complex, complex, complex]:
    """``(delta1, delta2, delta2_coupling)`` from far-field quadratures."""
    t = system.tmatrix
    kp = complex(system.k[p])
    return (farfield.delta1(p, t, kp), farfield.delta2(p, t, kp, epsrel=epsrel),
            farfield.delta2_coupling(p, t, system.k, epsrel=epsrel))


def wavenumber_lloyd_berry(p: int, system: ModalSystem, *,
                           epsrel: float = farfield.QUAD_EPSREL) -> EffectiveWavenumber:
    """Lloyd-Berry form extended with the mode-coupling term.

    Requires ``p`` to be faster than every wave it couples to; otherwise
    :class:`~coherentk.errors.RegimeError` points to :func:`wavenumber_lowfreq_o2`.
    """
    notes = _base_warnings(system)
    if _trivial(system):
        # exact for any wave ordering, so the regime check does not apply
        return _make(p, 0j, system, "lloyd_berry", 2, notes)
    farfield.check_fast_wave(p, system.tmatrix, system.k)
    n0 = system.mixture.n0
    d1, d2, dc = lloyd_berry_coefficients(p, system, epsrel=epsrel)
    return _make(p, d1 * n0 + (d2 + dc) * n0 * n0, system, "lloyd_berry", 2, notes)


# -- determinant root ------------------------------------------------------------------


def determinant_matrix(u: complex, p: int, system: ModalSystem) -> np.ndarray:
    """``D_qs = y_q delta_qs - eps M_qs(xi)`` at ``xi^2 = k_p^2 + u``.

    ``xi`` is the root continuous with ``k_p``, so ``D`` is analytic in ``u``
    near zero.  ``y_q`` is formed as ``u + (k_p^2 - k_q^2)`` to keep full
    relative precision when ``u`` is small.
    """
    kp = complex(system.k[p])
    xi = kp * cmath.sqrt(1 + u / (kp * kp))
    m, _ = m_full_matrix(xi, system)
    y = u + (kp * kp - system.k**2)
    y[p] = u
    return np.diag(y) - system.epsilon * m


def determinant(u: complex, p: int, system: ModalSystem) -> complex:
    return complex(np.linalg.det(determinant_matrix(u, p, system)))


def _muller(f, x0: complex, x1: complex, x2: complex, tol: float, scale: float, max_iter: int):
    f0, f1, f2 = f(x0), f(x1), f(x2)
    for it in range(1, max_iter + 1):
        h1, h2 = x1 - x0, x2 - x1
        d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        disc = cmath.sqrt(b * b - 4 * f2 * a)
        den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
        if den == 0:
            raise ConvergenceError("Muller iteration hit a zero denominator", iterations=it)
        step = -2 * f2 / den
        x0, x1, x2 = x1, x2, x2 + step
        f0, f1, f2 = f1, f2, f(x2)
        if abs(step) < tol * scale:
            return x2, it
    raise ConvergenceError(f"Muller iteration did not converge in {max_iter} steps", iterations=max_iter)


def find_root(p: int, system: ModalSystem, seed_u: complex, *, tol: float = ROOT_TOL,
              max_iter: int = MAX_ITER) -> tuple[complex, int, str]:
    """Newton iteration on ``det D(u)`` with a Muller fallback on stagnation.

    The derivative is a central difference with step ``1e-6 |k_p^2|``;
    iteration stops when ``|step| < tol |k_p^2|``.  Returns ``(u, iterations,
    solver)``.
    """
    kp2 = abs(complex(system.k[p]) ** 2)
    h = DIFF_STEP * kp2

    def f(u):
        return determinant(u, p, system)

    u = complex(seed_u)
    fu = f(u)
    history = [u]
    stall = 0
    for it in range(1, max_iter + 1):
        deriv = (f(u + h) - f(u - h)) / (2 * h)
        if deriv == 0 or not np.isfinite(deriv):
            break
        step = -fu / deriv
        u_new = u + step
        f_new = f(u_new)
        history.append(u_new)
        if abs(step) < tol * kp2:
            return u_new, it, "newton"
        stall = stall + 1 if abs(f_new) >= abs(fu) else 0
        u, fu = u_new, f_new
        if stall >= 2:
            break
    pts = history[-3:] if len(history) >= 3 else [u - h, u + h, u]
    root, its = _muller(f, *pts, tol=tol, scale=kp2, max_iter=max_iter)
    return root, len(history) - 1 + its, "muller"


def solve_determinant(p: int, system: ModalSystem, seed: complex | None = None, *,
                      force_coupled: bool = False, tol: float = ROOT_TOL,
                      max_iter: int = MAX_ITER) -> EffectiveWavenumber:
    """Root of the truncated determinant closest to the seed.

    ``seed`` is a trial ``xi``; by default the second-order asymptotic value.
    A decoupled T-matrix is solved wave by wave on its own ``1 x 1`` block
    unless ``force_coupled`` is set.
    """
    notes = _base_warnings(system)
    kp = complex(system.k[p])
    if _trivial(system):
        return _make(p, 0j, system, "determinant", 0, notes, residual=0.0)
    if system.P > 1 and not force_coupled and is_decoupled(system.tmatrix):
        sub = system.select([p])
        res = solve_determinant(0, sub, seed, tol=tol, max_iter=max_iter)
        return replace(res, wave=p)
    if seed is None:
        y1, y2 = asymptotic_coefficients(p, system)
        eps = system.epsilon
        seed_u = eps * y1 + eps * eps * y2
    else:
        seed_u = complex(seed) ** 2 - kp * kp
    u, its, solver = find_root(p, system, seed_u, tol=tol, max_iter=max_iter)
    if solver != "newton":
        notes.append(f"Newton stagnated; root polished by {solver}")
    residual = abs(determinant(u, p, system))
    return _make(p, u, system, "determinant", 0, notes, residual=residual, iterations=its)


def flag_collisions(results: list, tol: float = COLLISION_TOL) -> list:
    """Attach a warning to any two roots that coincide within ``tol`` relative."""
    out = list(results)
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            a, b = out[i], out[j]
            if abs(a.xi - b.xi) <= tol * max(abs(a.xi), abs(b.xi)):
                msg = f"root collision: waves {a.wave} and {b.wave} converged to the same xi={a.xi!r}"
                out[i] = replace(a, warnings=a.warnings + (msg,))
                out[j] = replace(out[j], warnings=out[j].warnings + (msg,))
    return out


_DISPATCH = {
    "asymptotic_o2": wavenumber_asymptotic_o2,
    "lowfreq_o2": wavenumber_lowfreq_o2,
    "lloyd_berry": wavenumber_lloyd_berry,
    "determinant": solve_determinant,
}


def compute(method: str, p: int, system: ModalSystem, *, root_tol: float = ROOT_TOL,
            max_iter: int = MAX_ITER, quad_epsrel: float = farfield.QUAD_EPSREL) -> EffectiveWavenumber:
    """Run one method for wave ``p``; tolerances apply to the methods that use them."""
    if method not in _DISPATCH:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if method == "determinant":
        return solve_determinant(p, system, tol=root_tol, max_iter=max_iter)
    if method == "lloyd_berry":
        return wavenumber_lloyd_berry(p, system, epsrel=quad_epsrel)
    return _DISPATCH[method](p, system)


def dispersion(system: ModalSystem, methods=METHODS, **tolerances) -> DispersionResult:
    """Every requested method for every wave of ``system``."""
    results = {}
    for m in methods:
        rows = [compute(m, p, system, **tolerances) for p in range(system.P)]
        if m == "determinant":
            rows = flag_collisions(rows)
        results[m] = tuple(rows)
    mix = system.mixture
    prov = {"P": system.P, "labels": tuple(system.tmatrix.labels),
            "epsilon": system.epsilon, "k": tuple(complex(x) for x in system.k)}
    return DispersionResult(system.omega, results, mix.n0, mix.radius_a, mix.hole_b,
                            system.n_max, prov)


__all__ = [
    "METHODS",
    "BranchWarning",
    "DispersionResult",
    "EffectiveWavenumber",
    "asymptotic_coefficients",
    "compute",
    "determinant",
    "determinant_matrix",
    "dispersion",
    "find_root",
    "flag_collisions",
    "leading_order_matrix",
    "lloyd_berry_coefficients",
    "lowfreq_coefficients",
    "second_order_matrix",
    "solve_determinant",
    "wavenumber_asymptotic_o2",
    "wavenumber_lloyd_berry",
    "wavenumber_lowfreq_o2",
    "xi_from_square",
]
