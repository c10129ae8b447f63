"""Identity checks runnable from the command line.

Each suite returns a list of :class:`Check` records holding the measured error
and the tolerance it was held to.  ``tol_scale`` multiplies every tolerance;
a check passes only when ``error < tolerance``, so ``tol_scale=0`` fails all.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from . import specfun
from .dispersion import METHODS, compute, lowfreq_coefficients, lloyd_berry_coefficients, \
    solve_determinant, wavenumber_asymptotic_o2
from .farfield import s_kappa_integral, s_kappa_series
from .modal import ModalSystem
from .tmatrix import MixtureSpec, fluid_sphere_demo, random_tmatrix

SUITES = ("gaunt", "bessel", "s_identity", "decoupling", "asymptotic_scaling", "lloyd_berry_p1")
SEED = 20240607


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    error: float
    tolerance: float
    passed: bool
    detail: str = ""


def _check(suite, name, error, tol, scale, detail="") -> Check:
    tol = tol * scale
    error = float(error)
    return Check(suite, name, error, tol, bool(error < tol), detail)


def suite_gaunt(scale: float = 1.0, n_max: int = 25) -> list:
    """Sum rule over ``l`` and parity zeros of the Gaunt coefficients."""
    worst, where = 0.0, None
    parity = 0.0
    for n in range(n_max + 1):
        for nu in range(n_max + 1):
            total = 0.0
            for ell in range(abs(n - nu), n + nu + 1):
                g = specfun.gaunt0(n, nu, ell)
                if (n + nu + ell) % 2:
                    parity = max(parity, abs(g))
                else:
                    total += g
            err = abs(total - 1.0)
            if err > worst:
                worst, where = err, (n, nu)
    detail = f"worst at (n, nu)={where}" if where else ""
    out = [_check("gaunt", "Gaunt sum rule: sum_l G(n, nu, l) = 1", worst, 1e-12, scale, detail)]
    out.append(_check("gaunt", "Gaunt parity zeros: G = 0 for odd n + nu + l", parity,
                      np.finfo(float).tiny, scale))
    return out


def suite_bessel(scale: float = 1.0) -> list:
    """Wronskian ``j h' - j' h = i / z^2`` on a complex grid, ``n <= 20``."""
    rng = np.random.default_rng(SEED)
    zs = (rng.uniform(0.05, 30, 100) * np.exp(1j * rng.uniform(-0.3, 1.5, 100)))
    worst = 0.0
    for z in zs:
        j, jd = specfun.spherical_jn_with_derivative(20, z)
        h, hd = specfun.spherical_h1n_with_derivative(20, z)
        worst = max(worst, float(np.max(np.abs((j * hd - jd * h) * z * z - 1j))))
    return [_check("bessel", "Wronskian j h' - j' h = i/z^2 (scaled by |z|^2)", worst, 1e-10, scale)]


def suite_s_identity(scale: float = 1.0, samples: int = 50) -> list:
    """Gaunt series against the far-field integral for ``S(kappa)``."""
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(samples):
        t = random_tmatrix(2, 8, rng, decay=0.3)
        for r in (0.1, 0.5, 0.9):
            for phase in (1.0, np.exp(1j * math.pi / 4)):
                kappa = r * phase
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    s = s_kappa_series(0, 1, kappa, t)
                i = s_kappa_integral(0, 1, kappa, t)
                worst = max(worst, abs(s - i) / abs(s))
    return [_check("s_identity", "S(kappa) series equals integral", worst, 1e-8, scale)]


def _decoupled_case():
    rng = np.random.default_rng(SEED + 1)
    t = random_tmatrix(3, 10, rng, amplitude=0.05, decay=0.1, coupled=False, radius_a=0.1)
    k = np.array([1 + 0.01j, 1.6 + 0.1j, 2.3 + 0.3j])
    return t, k, MixtureSpec(0.03, 0.1, 0.21)


def suite_decoupling(scale: float = 1.0) -> list:
    """Block-diagonal P=3 against three independent P=1 computations."""
    t, k, mix = _decoupled_case()
    full = ModalSystem.from_wavenumbers(k, t, mix, n_max=t.n_max)
    out = []
    for method in METHODS:
        worst = 0.0
        for p in range(3):
            single = ModalSystem.from_wavenumbers(k[[p]], t.select([p]), mix, n_max=t.n_max)
            a = compute(method, p, full).xi
            b = compute(method, 0, single).xi
            worst = max(worst, abs(a - b) / abs(b))
        out.append(_check("decoupling", f"decoupled P=3 equals P=1 ({method})", worst, 1e-10, scale))
    worst = 0.0
    for p in range(3):
        single = ModalSystem.from_wavenumbers(k[[p]], t.select([p]), mix, n_max=t.n_max)
        a = solve_determinant(p, full, force_coupled=True).xi
        b = solve_determinant(0, single).xi
        worst = max(worst, abs(a - b) / abs(b))
    out.append(_check("decoupling", "coupled determinant route on decoupled T equals P=1", worst, 1e-10, scale))
    return out


FACTORS = (1.0, 0.5, 0.25, 0.125)


def scaling_slope(system: ModalSystem, p: int, factors=FACTORS) -> tuple[float, list]:
    """Log-log slope of ``|xi^2_det - xi^2_asym|`` against the concentration factor."""
    defects = []
    for f in factors:
        s = system.with_mixture(system.mixture.with_n0(system.mixture.n0 * f))
        a = wavenumber_asymptotic_o2(p, s)
        d = solve_determinant(p, s)
        defects.append(abs(a.xi_squared - d.xi_squared))
    slope = np.polyfit(np.log(factors), np.log(defects), 1)[0]
    return float(slope), defects


def scaling_cases():
    """P=1 fluid-sphere demo and a synthetic P=3 case with decaying T."""
    host, t = fluid_sphere_demo(ka=0.3)
    a = t.radius_a
    s1 = ModalSystem.build(host, t, MixtureSpec.from_volume_fraction(0.05, a, 2.0001 * a), t.omega)
    rng = np.random.default_rng(SEED + 2)
    t3 = random_tmatrix(3, 12, rng, amplitude=0.05, decay=0.1, radius_a=0.1)
    s3 = ModalSystem.from_wavenumbers([1 + 0.01j, 1.6 + 0.1j, 2.3 + 0.3j], t3, MixtureSpec(0.03, 0.1, 0.21))
    return s1, s3


def suite_asymptotic_scaling(scale: float = 1.0) -> list:
    """Cubic remainder between the determinant root and the second-order expansion."""
    out = []
    s1, s3 = scaling_cases()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for name, system in (("P=1 fluid sphere", s1), ("P=3 synthetic", s3)):
            for p in range(system.P):
                slope, _ = scaling_slope(system, p)
                # pass when slope >= 2.7, expressed as an error below a tolerance
                out.append(_check("asymptotic_scaling", f"{name} wave {p}: slope >= 2.7",
                                  max(0.0, 3.0 - slope), 0.3 + 1e-12, scale, f"slope={slope:.4f}"))
    return out


def suite_lloyd_berry_p1(scale: float = 1.0) -> list:
    """Far-field quadrature coefficients against the Gaunt series for a fluid sphere."""
    out = []
    for ka in (0.05, 0.1, 0.3):
        host, t = fluid_sphere_demo(ka=ka)
        a = t.radius_a
        s = ModalSystem.build(host, t, MixtureSpec(1.0, a, 2.0001 * a), t.omega)
        c1, c2, _ = lowfreq_coefficients(0, s)
        d1, d2, _ = lloyd_berry_coefficients(0, s)
        out.append(_check("lloyd_berry_p1", f"delta1 at ka={ka}", abs(d1 - c1) / abs(c1), 1e-8, scale))
        out.append(_check("lloyd_berry_p1", f"delta2 at ka={ka}", abs(d2 - c2) / abs(c2), 1e-8, scale))
    return out


_SUITES = {
    "gaunt": suite_gaunt,
    "bessel": suite_bessel,
    "s_identity": suite_s_identity,
    "decoupling": suite_decoupling,
    "asymptotic_scaling": suite_asymptotic_scaling,
    "lloyd_berry_p1": suite_lloyd_berry_p1,
}


def run_validate(suite: str = "all", tol_scale: float = 1.0) -> dict:
    """Run one suite (or ``"all"``) and return a JSON-ready report."""
    names = SUITES if suite == "all" else (suite,)
    for name in names:
        if name not in _SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {SUITES + ('all',)}")
    checks = []
    for name in names:
        try:
            checks += _SUITES[name](tol_scale)
        except Exception as exc:  # noqa: BLE001 - a crash is a failed check
            checks.append(Check(name, f"{name} suite raised", math.inf, 0.0, False,
                                f"{type(exc).__name__}: {exc}"))
    return {
        "suite": suite,
        "tol_scale": tol_scale,
        "passed": all(c.passed for c in checks),
        "checks": [asdict(c) for c in checks],
    }
