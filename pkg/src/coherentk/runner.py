"""Parameter sweeps over frequency and number density.

Each sweep point ``(omega, n0)`` builds the host wavenumbers and T-matrix,
runs every requested method for every wave and yields one row per
``(omega, n0, method, wave)``.  A failure at any stage becomes NaN-valued rows
carrying the reason, so the sweep always completes.  Points are dispatched
to a thread pool and reassembled in input order.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields

from .config import RunConfig
from .dispersion import compute
from .modal import ModalSystem
from .tmatrix import TMatrixSet, fluid_sphere_tmatrix, load_tmatrix

log = logging.getLogger(__name__)

WARNING_SEP = " | "


@dataclass(frozen=True)
class SweepRow:
    """One output row.  Units: omega rad/s, n0 1/m^3, xi 1/m, phase velocity m/s."""

    omega: float
    n0: float
    method: str
    wave: int
    label: str
    xi_re: float
    xi_im: float
    phase_velocity: float
    attenuation: float
    residual: float
    n_max: int
    status: str
    warnings: tuple


CSV_COLUMNS = tuple(f.name for f in fields(SweepRow))


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return WARNING_SEP.join(value)
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, tuple):
        return list(value)
    return value


@dataclass(frozen=True)
class SweepOutput:
    rows: tuple
    columns: tuple = CSV_COLUMNS

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in astuple(row)])
        return buf.getvalue()

    def to_records(self) -> list:
        return [{c: _json_value(v) for c, v in zip(self.columns, astuple(row))} for row in self.rows]

    def to_json(self) -> str:
        return json.dumps({"columns": list(self.columns), "rows": self.to_records()}, indent=1) + "\n"

    @property
    def failures(self) -> int:
        return sum(1 for r in self.rows if r.status != "ok")


def _load_source(cfg: RunConfig):
    if cfg.tmatrix.file is not None:
        return load_tmatrix(cfg.tmatrix.file)
    return None


def _tmatrix_at(cfg: RunConfig, host, omega: float, fixed: TMatrixSet | None) -> TMatrixSet:
    if fixed is not None:
        return fixed
    d = cfg.tmatrix.demo
    return fluid_sphere_tmatrix(host, d.density, d.speed, cfg.mixture.radius_a, omega, d.n_max)


def _failed_rows(omega, n0, methods, labels, reason, n_max=-1) -> list:
    nan = math.nan
    return [SweepRow(omega, n0, m, p, labels[p], nan, nan, nan, nan, nan, n_max, reason, ())
            for m in methods for p in range(len(labels))]


def _reason(exc: Exception) -> str:
    return f"error: {type(exc).__name__}: {exc}"


def _run_point(cfg: RunConfig, omega: float, n0: float | None, fixed: TMatrixSet | None) -> list:
    host = cfg.host.to_medium()
    labels = host.labels
    mixture = cfg.mixture.spec(n0)
    try:
        t = _tmatrix_at(cfg, host, omega, fixed)
        if t.P != host.P:
            raise ValueError(f"T-matrix has P={t.P} but the host has {host.P} waves")
        system = ModalSystem.build(host, t, mixture, omega, n_max=cfg.n_max)
    except Exception as exc:  # noqa: BLE001 - recorded per row
        log.warning("omega=%g n0=%g: %s", omega, mixture.n0, exc)
        return _failed_rows(omega, mixture.n0, cfg.methods, labels, _reason(exc))
    tol = cfg.tolerances
    rows = []
    for method in cfg.methods:
        for p in range(host.P):
            try:
                r = compute(method, p, system, root_tol=tol.root, max_iter=tol.max_iter,
                            quad_epsrel=tol.quad_epsrel)
            except Exception as exc:  # noqa: BLE001 - recorded per row
                log.warning("omega=%g n0=%g %s wave %d: %s", omega, mixture.n0, method, p, exc)
                rows += _failed_rows(omega, mixture.n0, (method,), labels, _reason(exc), system.n_max)[p:p + 1]
                continue
            xi = r.xi
            vp = omega / xi.real if xi.real != 0 else math.nan
            rows.append(SweepRow(omega, mixture.n0, method, p, labels[p], xi.real, xi.imag, vp,
                                 xi.imag, float(r.residual), r.n_max, "ok", tuple(r.warnings)))
    return rows


def sweep_points(cfg: RunConfig) -> list:
    n0s = cfg.sweep.n0 if cfg.sweep.n0 is not None else (None,)
    return [(w, n) for w in cfg.sweep.omegas() for n in n0s]


def run_dispersion(cfg: RunConfig, workers: int | None = None) -> SweepOutput:
    """Run the sweep described by ``cfg``.  Output order is ``(omega, n0, method, wave)``."""
    fixed = _load_source(cfg)
    points = sweep_points(cfg)
    workers = workers or cfg.workers
    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda pt: _run_point(cfg, pt[0], pt[1], fixed), points))
    else:
        chunks = [_run_point(cfg, w, n, fixed) for w, n in points]
    return SweepOutput(tuple(row for chunk in chunks for row in chunk))
