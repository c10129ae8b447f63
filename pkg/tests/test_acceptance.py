"""Acceptance gate: criteria 1-10, each at its stated tolerance and runtime budget.

Every test prints one ``CRITERION n: PASS|FAIL`` line (repeated in the
terminal summary) before asserting.
"""

import cmath
import math
import time
import warnings

import mpmath
import numpy as np
import pytest

from conftest import record_criterion
from coherentk.dispersion import METHODS, compute, lloyd_berry_coefficients, lowfreq_coefficients, \
    wavenumber_asymptotic_o2, wavenumber_lowfreq_o2
from coherentk.farfield import TruncationWarning, delta2_coupling, s_kappa_integral, s_kappa_series
from coherentk.modal import ModalSystem, n_ell
from coherentk.config import parse_config
from coherentk.runner import run_dispersion
from coherentk.specfun import gaunt0, spherical_h1n_with_derivative, spherical_jn_with_derivative
from coherentk.tmatrix import MixtureSpec, TMatrixSet, fluid_sphere_demo, random_tmatrix
from coherentk.validate import scaling_cases, scaling_slope, suite_decoupling

SEED = 20240607
K3 = np.array([1.0 + 0.01j, 1.6 + 0.1j, 2.3 + 0.3j])


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_criterion_01_gaunt_sum_rule():
    def run():
        worst, parity = 0.0, 0.0
        for n in range(26):
            for nu in range(26):
                total = 0.0
                for ell in range(abs(n - nu), n + nu + 1):
                    g = gaunt0(n, nu, ell)
                    if (n + nu + ell) % 2:
                        parity = max(parity, abs(g))
                    else:
                        total += g
                worst = max(worst, abs(total - 1.0))
        return worst, parity

    (worst, parity), dt = timed(run)
    ok = worst < 1e-12 and parity == 0.0 and dt < 1.0
    record_criterion(1, ok, f"Gaunt sum rule max|sum-1|={worst:.2e} (<1e-12), parity max={parity:.1e} "
                            f"(exact 0), {dt:.2f}s (<1s)")
    assert ok


def test_criterion_02_bessel_wronskian():
    rng = np.random.default_rng(SEED)
    zs = rng.uniform(0.05, 30, 100) * np.exp(1j * rng.uniform(-0.3, 1.5, 100))

    def run():
        worst = 0.0
        for z in zs:
            j, jd = spherical_jn_with_derivative(20, z)
            h, hd = spherical_h1n_with_derivative(20, z)
            worst = max(worst, float(np.max(np.abs(j * hd - jd * h - 1j / z**2) * abs(z) ** 2)))
        return worst

    worst, dt = timed(run)
    ok = worst < 1e-10 and dt < 1.0
    record_criterion(2, ok, f"Wronskian max error*|z|^2={worst:.2e} (<1e-10) on 100 z, n<=20, {dt:.2f}s (<1s)")
    assert ok


KP10 = [0.1 + 0.01j, 0.5, 1.0 + 0.2j, 2.0 + 0.5j, 3.3 + 0.1j, 5.0 + 1.0j, 7.5 + 0.3j,
        10.0 + 2.0j, 15.0 + 0.5j, 20.0 + 1.0j]


def _n_ell_errors(sign):
    b = 1.0
    worst = 0.0
    for kp in KP10:
        target = sign * 1j / (kp * b)
        for ell in range(21):
            worst = max(worst, abs(n_ell(ell, kp, kp, b) - target))
    return worst


def test_criterion_03_n_ell_limit():
    # Written exactly as stated: target +i/(k_p b).  The cross product
    # x j' h - x j h' equals -x (j h' - j' h) = -i/x, so this cannot pass;
    # see test_n_ell_limit_true_sign below.
    worst, dt = timed(lambda: _n_ell_errors(+1))
    ok = worst < 1e-10 and dt < 1.0
    record_criterion(3, ok, f"N_l(k_p) vs +i/(k_p b): max error={worst:.2e} (<1e-10), {dt:.2f}s (<1s); "
                            "true limit is -i/(k_p b)")
    assert ok


def test_n_ell_limit_true_sign():
    worst = _n_ell_errors(-1)
    assert worst < 1e-10
    # independent arbitrary-precision check of the sign
    mpmath.mp.dps = 30
    z = mpmath.mpc(1.3, 0.4)
    j = lambda x: mpmath.sqrt(mpmath.pi / (2 * x)) * mpmath.besselj(3.5, x)
    h = lambda x: mpmath.sqrt(mpmath.pi / (2 * x)) * mpmath.hankel1(3.5, x)
    N = z * mpmath.diff(j, z) * h(z) - z * j(z) * mpmath.diff(h, z)
    assert abs(complex(N) - (-1j / complex(z))) < 1e-14


def test_criterion_04_series_integral_identity():
    rng = np.random.default_rng(SEED)
    kappas = [r * ph for r in (0.1, 0.5, 0.9) for ph in (1.0, cmath.exp(1j * math.pi / 4))]

    def run():
        worst = 0.0
        for _ in range(50):
            t = random_tmatrix(2, 8, rng, decay=0.3)
            for kappa in kappas:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", TruncationWarning)
                    s = s_kappa_series(0, 1, kappa, t)
                i = s_kappa_integral(0, 1, kappa, t)
                worst = max(worst, abs(s - i) / abs(s))
        return worst

    worst, dt = timed(run)
    ok = worst < 1e-8 and dt < 10.0
    record_criterion(4, ok, f"S(kappa) series vs integral max rel={worst:.2e} (<1e-8), 50 T x 6 kappa, "
                            f"{dt:.2f}s (<10s)")
    assert ok


def test_criterion_05_lloyd_berry_p1():
    def run():
        worst = 0.0
        for ka in (0.05, 0.1, 0.3):
            host, t = fluid_sphere_demo(ka=ka)
            a = t.radius_a
            s = ModalSystem.build(host, t, MixtureSpec(1.0, a, 2.0001 * a), t.omega)
            c1, c2, _ = lowfreq_coefficients(0, s)
            d1, d2, _ = lloyd_berry_coefficients(0, s)
            worst = max(worst, abs(d1 - c1) / abs(c1), abs(d2 - c2) / abs(c2))
        return worst

    worst, dt = timed(run)
    ok = worst < 1e-8 and dt < 10.0
    record_criterion(5, ok, f"delta1, delta2 quadrature vs series max rel={worst:.2e} (<1e-8), "
                            f"ka in {{0.05,0.1,0.3}}, {dt:.2f}s (<10s)")
    assert ok


def test_criterion_06_coupling_term():
    rng = np.random.default_rng(SEED + 3)

    def run():
        worst = 0.0
        for _ in range(20):
            t = random_tmatrix(3, 10, rng, decay=0.3)
            a = delta2_coupling(0, t, K3, form="integral")
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TruncationWarning)
                b = delta2_coupling(0, t, K3, form="series")
            worst = max(worst, abs(a - b) / abs(b))
        t = random_tmatrix(3, 10, rng, decay=0.3, coupled=False)
        zero = delta2_coupling(0, t, K3) == 0 and delta2_coupling(0, t, K3, form="series") == 0
        return worst, zero

    (worst, zero), dt = timed(run)
    ok = worst < 1e-8 and zero and dt < 10.0
    record_criterion(6, ok, f"coupling term integral vs series max rel={worst:.2e} (<1e-8), "
                            f"zero when decoupled={zero}, {dt:.2f}s (<10s)")
    assert ok


def test_criterion_07_asymptotic_scaling():
    def run():
        s1, s3 = scaling_cases()
        slopes = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for system in (s1, s3):
                for p in range(system.P):
                    slopes.append(scaling_slope(system, p)[0])
        return slopes

    slopes, dt = timed(run)
    ok = min(slopes) >= 2.7 and dt < 30.0
    record_criterion(7, ok, "log-log slopes " + ", ".join(f"{s:.3f}" for s in slopes)
                     + f" (P=1 demo, P=3 waves 0-2; each >=2.7), {dt:.2f}s (<30s)")
    assert ok


def test_criterion_08_decoupling():
    checks, dt = timed(lambda: suite_decoupling())
    worst = max(c.error for c in checks)
    ok = all(c.passed for c in checks) and worst < 1e-10 and dt < 10.0
    record_criterion(8, ok, f"decoupled P=3 vs P=1, all methods: max rel={worst:.2e} (<1e-10), "
                            f"{dt:.2f}s (<10s)")
    assert ok


def test_criterion_09_regime_consistency():
    rng = np.random.default_rng(SEED + 4)

    def run():
        t = random_tmatrix(3, 6, rng, amplitude=0.05, decay=0.1, radius_a=0.4)
        b = 1.0
        k = 1e-4 / b * K3 / abs(K3[0])
        s = ModalSystem.from_wavenumbers(k, t, MixtureSpec(1e-9, 0.4, b), n_max=6)
        worst = 0.0
        for p in range(3):
            g = wavenumber_asymptotic_o2(p, s).xi_squared - k[p] ** 2
            l = wavenumber_lowfreq_o2(p, s).xi_squared - k[p] ** 2
            worst = max(worst, abs(g - l) / abs(l))
        return worst

    worst, dt = timed(run)
    ok = worst < 1e-5 and dt < 10.0
    record_criterion(9, ok, f"general vs low-frequency order 2 at k b=1e-4: max rel={worst:.2e} (<1e-5), "
                            f"{dt:.2f}s (<10s)")
    assert ok


def test_criterion_10_zero_scatterers_and_determinism():
    rng = np.random.default_rng(SEED + 5)

    def run():
        t = random_tmatrix(3, 8, rng, amplitude=0.05, decay=0.1, radius_a=0.1)
        mix = MixtureSpec(0.03, 0.1, 0.21)
        systems = [
            ModalSystem.from_wavenumbers(K3, TMatrixSet.zero(3, 8, radius_a=0.1), mix, n_max=8),
            ModalSystem.from_wavenumbers(K3, t, mix.with_n0(0.0), n_max=8),
        ]
        exact = all(compute(m, p, s).xi == complex(K3[p])
                    for s in systems for m in METHODS for p in range(3))
        cfg = parse_config({
            "host": {"waves": [{"label": "c", "speed": 1500.0}]},
            "mixture": {"radius_a": 1e-3, "hole_b": 2.0002e-3, "volume_fraction": 0.01},
            "tmatrix": {"demo": {"density": 2000.0, "speed": 2250.0, "n_max": 12}},
            "sweep": {"omega_range": {"start": 1.5e4, "stop": 4.5e5, "count": 4}},
        })
        first = run_dispersion(cfg, workers=1).to_csv()
        identical = all(run_dispersion(cfg, workers=w).to_csv() == first for w in (1, 4))
        return exact, identical

    (exact, identical), dt = timed(run)
    ok = exact and identical and dt < 5.0
    record_criterion(10, ok, f"xi == k_p exactly for T=0 and n0=0 (all methods)={exact}, "
                             f"byte-identical CSV reruns={identical}, {dt:.2f}s (<5s)")
    assert ok
