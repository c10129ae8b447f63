"""``coherent-k`` command line interface.

Exit codes: 0 success, 1 validation failure, 2 configuration or input error,
3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config
from .errors import CoherentKError, ConfigError, TMatrixFormatError
from .farfield import sample_farfield
from .runner import run_dispersion
from .specfun import gaunt0
from .tmatrix import (default_truncation, fluid_sphere_demo, is_decoupled, load_tmatrix,
                      save_tmatrix, tmatrix_to_dict)
from .validate import SUITES, run_validate

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


def cmd_disperse(args) -> int:
    cfg = load_config(args.config)
    out = run_dispersion(cfg, workers=args.workers)
    csv_path = args.out or cfg.output.csv
    json_path = args.json or cfg.output.json
    if csv_path:
        Path(csv_path).write_text(out.to_csv())
    else:
        sys.stdout.write(out.to_csv())
    if json_path:
        Path(json_path).write_text(out.to_json())
    if out.failures:
        print(f"{out.failures} of {len(out.rows)} rows failed; see the status column", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    report = run_validate(args.suite, args.tol_scale)
    for c in report["checks"]:
        mark = "PASS" if c["passed"] else "FAIL"
        extra = f"  [{c['detail']}]" if c["detail"] else ""
        print(f"{mark}  {c['suite']:<18} {c['name']}: error {c['error']:.3e} < tol {c['tolerance']:.1e}{extra}")
    print("all checks passed" if report["passed"] else "validation FAILED")
    if args.json:
        Path(args.json).write_text(json.dumps(_finite(report), indent=1) + "\n")
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def cmd_gaunt(args) -> int:
    n, nu = args.n, args.nu
    if n < 0 or nu < 0:
        raise ConfigError("gaunt: orders must be non-negative")
    top = n + nu if args.max_l is None else min(n + nu, args.max_l)
    rows = [(ell, gaunt0(n, nu, ell)) for ell in range(abs(n - nu), top + 1)
            if (n + nu + ell) % 2 == 0]
    total = sum(g for _, g in rows)
    if args.json:
        doc = {"n": n, "nu": nu, "coefficients": [{"ell": ell, "G": g} for ell, g in rows],
               "sum": total}
        print(json.dumps(doc, indent=1))
    else:
        for ell, g in rows:
            print(f"G(0,{nu};0,{n};{ell}) = {g!r}")
        print(f"sum = {total!r}")
    return EXIT_OK


def cmd_tmatrix_inspect(args) -> int:
    t = load_tmatrix(args.file)
    print(f"P = {t.P}  labels = {', '.join(t.labels)}  convention stored as {t.convention}")
    print(f"n_max = {t.n_max}  suggested truncation = {default_truncation(t)}  "
          f"under-truncated = {t.under_truncated}  decoupled = {is_decoupled(t)}")
    print(f"radius_a = {t.radius_a} m" + (f"  omega = {t.omega} rad/s" if t.omega is not None else ""))
    n = np.arange(t.n_max + 1)
    for q in range(t.P):
        for p in range(t.P):
            f0 = complex(np.sum((2 * n + 1) * t.coeffs[:, q, p]))
            print(f"f^{q}{p}(0) = {f0.real:.6e} {f0.imag:+.6e}i")
    return EXIT_OK


def cmd_tmatrix_demo(args) -> int:
    host, t = fluid_sphere_demo(args.density / args.host_density, args.speed / args.host_speed,
                                args.ka, args.n_max, args.host_speed, args.host_density, args.radius)
    if args.out:
        save_tmatrix(t, args.out)
        print(f"wrote {args.out} (omega = {t.omega!r} rad/s)", file=sys.stderr)
    else:
        sys.stdout.write(json.dumps(tmatrix_to_dict(t), indent=1) + "\n")
    return EXIT_OK


def cmd_farfield(args) -> int:
    t = load_tmatrix(args.tmatrix)
    try:
        q, p = (int(x) for x in args.pair.split(","))
    except ValueError:
        raise ConfigError(f"--pair expects 'q,p', got {args.pair!r}") from None
    if not (0 <= q < t.P and 0 <= p < t.P):
        raise ConfigError(f"--pair {q},{p} out of range for P={t.P}")
    if args.samples < 2:
        raise ConfigError("--samples must be at least 2")
    th, f = sample_farfield(q, p, t, args.samples)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["theta", "f_re", "f_im"])
    for a, v in zip(th, f):
        w.writerow([repr(float(a)), repr(float(v.real)), repr(float(v.imag))])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coherent-k", description=(
        "Effective wavenumbers of coherent waves in dilute suspensions of spheres."))
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log per-point failures")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("disperse", help="run a configured frequency / concentration sweep")
    d.add_argument("--config", required=True, help="YAML run configuration")
    d.add_argument("--out", help="CSV output path (default: config output.csv or stdout)")
    d.add_argument("--json", help="also write the rows as JSON")
    d.add_argument("--workers", type=int, default=None, help="thread pool size")
    d.set_defaults(func=cmd_disperse)

    v = sub.add_parser("validate", help="run the identity checks")
    v.add_argument("--suite", default="all", choices=SUITES + ("all",))
    v.add_argument("--json", help="write the machine-readable report here")
    v.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance")
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("gaunt", help="print the non-zero G(0,nu;0,n;l) and their sum")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--nu", type=int, required=True)
    g.add_argument("--max-l", type=int, help="largest l to print (default n + nu)")
    g.add_argument("--json", action="store_true", help="emit JSON instead of text")
    g.set_defaults(func=cmd_gaunt)

    t = sub.add_parser("tmatrix", help="T-matrix file utilities")
    tsub = t.add_subparsers(dest="tcommand", required=True)
    ti = tsub.add_parser("inspect", help="summarise a T-matrix JSON file")
    ti.add_argument("file")
    ti.set_defaults(func=cmd_tmatrix_inspect)
    td = tsub.add_parser("demo-fluid-sphere", help="write the built-in fluid sphere T-matrix")
    td.add_argument("--ka", type=float, default=0.3)
    td.add_argument("--density", type=float, default=2000.0, help="sphere density (kg/m^3)")
    td.add_argument("--speed", type=float, default=2250.0, help="sphere sound speed (m/s)")
    td.add_argument("--n-max", type=int, default=20)
    td.add_argument("--host-speed", type=float, default=1500.0, help="m/s")
    td.add_argument("--host-density", type=float, default=1000.0, help="kg/m^3")
    td.add_argument("--radius", type=float, default=1e-3, help="sphere radius a (m)")
    td.add_argument("-o", "--out", help="output JSON path (default stdout)")
    td.set_defaults(func=cmd_tmatrix_demo)

    f = sub.add_parser("farfield", help="sample f^{qp}(theta) on [0, pi] as CSV")
    f.add_argument("--tmatrix", required=True)
    f.add_argument("--pair", required=True, help="q,p")
    f.add_argument("--samples", type=int, default=181)
    f.set_defaults(func=cmd_farfield)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, TMatrixFormatError, FileNotFoundError) as exc:
        print(f"coherent-k: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CoherentKError, ArithmeticError, ValueError, OSError) as exc:
        print(f"coherent-k: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
