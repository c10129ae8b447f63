"""Run configuration: YAML in, frozen dataclasses out, and back.

All quantities are SI.  Angular frequency ``omega`` is in rad/s, wavenumbers
in 1/m, attenuation in Np/m, lengths in m, densities in kg/m^3 and number
densities in 1/m^3.  Complex numbers are written as ``[re, im]`` pairs.

Example::

    host:
      density: 1000.0              # kg/m^3
      waves:
        - {label: c, speed: 1500.0, attenuation: 0.0}
    mixture:
      radius_a: 1.0e-3             # m
      hole_b: 2.0002e-3            # m, must exceed 2 a
      volume_fraction: 0.01        # or n0 (1/m^3)
    tmatrix:
      demo: {density: 2000.0, speed: 2250.0, n_max: 20}
    sweep:
      omega: [1.0e5, 2.0e5]        # rad/s, or omega_range: {start, stop, count}
    methods: [asymptotic_o2, determinant]
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .dispersion import METHODS
from .errors import ConfigError
from .tmatrix import HostMedium, HostWave, MixtureSpec


def _coerce(value):
    # YAML 1.1 reads "1.0e15" (no exponent sign) as a string
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return value
    return value


def _cx(value, where: str) -> complex:
    value = _coerce(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        try:
            return complex(float(_coerce(value[0])), float(_coerce(value[1])))
        except (TypeError, ValueError):
            pass
    elif isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    raise ConfigError(f"{where}: expected a number or [re, im] pair, got {value!r}")


def _num(value, where: str, *, positive: bool = False, allow_zero: bool = True) -> float:
    value = _coerce(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{where}: must be finite")
    if positive and (value < 0 or (value == 0 and not allow_zero)):
        raise ConfigError(f"{where}: must be {'>= 0' if allow_zero else '> 0'}, got {value}")
    return value


def _keys(doc, allowed: set, where: str) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(doc).__name__}")
    extra = set(doc) - allowed
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")
    return doc


@dataclass(frozen=True)
class WaveConfig:
    label: str
    wavenumber: complex | None = None
    speed: float | None = None
    attenuation: float = 0.0
    table_omega: tuple | None = None
    table_k: tuple | None = None

    def to_host_wave(self) -> HostWave:
        return HostWave(self.label, self.wavenumber, self.speed, self.attenuation,
                        self.table_omega, self.table_k)


@dataclass(frozen=True)
class HostConfig:
    waves: tuple
    density: float = 1000.0

    def to_medium(self) -> HostMedium:
        return HostMedium(tuple(w.to_host_wave() for w in self.waves), self.density)


@dataclass(frozen=True)
class MixtureConfig:
    """Exactly one of ``n0`` and ``volume_fraction`` is set."""

    radius_a: float
    hole_b: float
    n0: float | None = None
    volume_fraction: float | None = None

    def spec(self, n0: float | None = None) -> MixtureSpec:
        if n0 is not None:
            return MixtureSpec(n0, self.radius_a, self.hole_b)
        if self.n0 is not None:
            return MixtureSpec(self.n0, self.radius_a, self.hole_b)
        return MixtureSpec.from_volume_fraction(self.volume_fraction, self.radius_a, self.hole_b)


@dataclass(frozen=True)
class DemoSphere:
    """Fluid sphere of given density (kg/m^3) and sound speed (m/s)."""

    density: float
    speed: float
    n_max: int = 20


@dataclass(frozen=True)
class TMatrixSource:
    file: str | None = None
    demo: DemoSphere | None = None


@dataclass(frozen=True)
class SweepConfig:
    """Frequencies as an explicit list or as ``(start, stop, count)``; optional ``n0`` list."""

    omega: tuple | None = None
    omega_range: tuple | None = None
    n0: tuple | None = None

    def omegas(self) -> tuple:
        if self.omega is not None:
            return self.omega
        start, stop, count = self.omega_range
        return tuple(float(x) for x in np.linspace(start, stop, int(count)))


@dataclass(frozen=True)
class Tolerances:
    root: float = 1e-12
    max_iter: int = 50
    quad_epsrel: float = 1e-12


@dataclass(frozen=True)
class OutputConfig:
    csv: str | None = None
    json: str | None = None


@dataclass(frozen=True)
class RunConfig:
    host: HostConfig
    mixture: MixtureConfig
    tmatrix: TMatrixSource
    sweep: SweepConfig
    methods: tuple = METHODS
    n_max: int | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: OutputConfig = field(default_factory=OutputConfig)
    workers: int = 1


# -- parsing ----------------------------------------------------------------------


def _parse_wave(doc, i: int) -> WaveConfig:
    where = f"host.waves[{i}]"
    _keys(doc, {"label", "wavenumber", "speed", "attenuation", "table"}, where)
    label = str(doc.get("label", ("c", "s", "th")[i] if i < 3 else f"w{i}"))
    forms = [k for k in ("wavenumber", "speed", "table") if k in doc]
    if len(forms) != 1:
        raise ConfigError(f"{where}: give exactly one of wavenumber, speed, table (got {forms})")
    kw = {}
    if "wavenumber" in doc:
        kw["wavenumber"] = _cx(doc["wavenumber"], f"{where}.wavenumber")
    if "speed" in doc:
        kw["speed"] = _num(doc["speed"], f"{where}.speed", positive=True, allow_zero=False)
        kw["attenuation"] = _num(doc.get("attenuation", 0.0), f"{where}.attenuation", positive=True)
    elif "attenuation" in doc:
        raise ConfigError(f"{where}: attenuation only applies with speed")
    if "table" in doc:
        tab = _keys(doc["table"], {"omega", "k"}, f"{where}.table")
        if "omega" not in tab or "k" not in tab:
            raise ConfigError(f"{where}.table: needs omega and k lists")
        kw["table_omega"] = tuple(_num(x, f"{where}.table.omega") for x in tab["omega"])
        kw["table_k"] = tuple(_cx(x, f"{where}.table.k") for x in tab["k"])
    cfg = WaveConfig(label, **kw)
    try:
        cfg.to_host_wave()
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    return cfg


def parse_config(doc: dict) -> RunConfig:
    """Validate a plain mapping and build a :class:`RunConfig`."""
    _keys(doc, {"host", "mixture", "tmatrix", "sweep", "methods", "n_max", "tolerances",
                "output", "workers"}, "config")
    for key in ("host", "mixture", "tmatrix", "sweep"):
        if key not in doc:
            raise ConfigError(f"config: missing section {key!r}")

    h = _keys(doc["host"], {"waves", "density"}, "host")
    waves = h.get("waves")
    if not isinstance(waves, list) or not 1 <= len(waves) <= 3:
        raise ConfigError("host.waves: need a list of 1 to 3 wave entries")
    host = HostConfig(tuple(_parse_wave(w, i) for i, w in enumerate(waves)),
                      _num(h.get("density", 1000.0), "host.density", positive=True, allow_zero=False))

    m = _keys(doc["mixture"], {"radius_a", "hole_b", "n0", "volume_fraction"}, "mixture")
    for key in ("radius_a", "hole_b"):
        if key not in m:
            raise ConfigError(f"mixture: missing {key}")
    a = _num(m["radius_a"], "mixture.radius_a", positive=True, allow_zero=False)
    b = _num(m["hole_b"], "mixture.hole_b", positive=True, allow_zero=False)
    if not b > 2 * a:
        raise ConfigError(f"mixture: hole_b={b} must exceed 2 * radius_a = {2 * a}")
    has_n0, has_phi = "n0" in m, "volume_fraction" in m
    if has_n0 == has_phi:
        raise ConfigError("mixture: give exactly one of n0 and volume_fraction")
    mixture = MixtureConfig(
        a, b,
        n0=_num(m["n0"], "mixture.n0", positive=True) if has_n0 else None,
        volume_fraction=_num(m["volume_fraction"], "mixture.volume_fraction", positive=True) if has_phi else None,
    )

    t = _keys(doc["tmatrix"], {"file", "demo"}, "tmatrix")
    if ("file" in t) == ("demo" in t):
        raise ConfigError("tmatrix: give exactly one source, file or demo")
    if "file" in t:
        if not isinstance(t["file"], str):
            raise ConfigError("tmatrix.file: expected a path string")
        source = TMatrixSource(file=t["file"])
    else:
        d = _keys(t["demo"], {"density", "speed", "n_max"}, "tmatrix.demo")
        for key in ("density", "speed"):
            if key not in d:
                raise ConfigError(f"tmatrix.demo: missing {key}")
        n_max = d.get("n_max", 20)
        if isinstance(n_max, bool) or not isinstance(n_max, int) or n_max < 0:
            raise ConfigError(f"tmatrix.demo.n_max: expected a non-negative integer, got {n_max!r}")
        if host.waves and len(host.waves) != 1:
            raise ConfigError("tmatrix.demo: the fluid sphere model needs a single host wave")
        source = TMatrixSource(demo=DemoSphere(
            _num(d["density"], "tmatrix.demo.density", positive=True, allow_zero=False),
            _num(d["speed"], "tmatrix.demo.speed", positive=True, allow_zero=False),
            n_max,
        ))

    s = _keys(doc["sweep"], {"omega", "omega_range", "n0"}, "sweep")
    if ("omega" in s) == ("omega_range" in s):
        raise ConfigError("sweep: give exactly one of omega and omega_range")
    omega = omega_range = n0s = None
    if "omega" in s:
        vals = s["omega"] if isinstance(s["omega"], list) else [s["omega"]]
        omega = tuple(_num(x, "sweep.omega", positive=True, allow_zero=False) for x in vals)
        if not omega:
            raise ConfigError("sweep.omega: empty")
    else:
        r = _keys(s["omega_range"], {"start", "stop", "count"}, "sweep.omega_range")
        if set(r) != {"start", "stop", "count"}:
            raise ConfigError("sweep.omega_range: needs start, stop, count")
        count = r["count"]
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            raise ConfigError(f"sweep.omega_range.count: expected a positive integer, got {count!r}")
        omega_range = (_num(r["start"], "sweep.omega_range.start", positive=True, allow_zero=False),
                       _num(r["stop"], "sweep.omega_range.stop", positive=True, allow_zero=False),
                       count)
    if "n0" in s and s["n0"] is not None:
        vals = s["n0"] if isinstance(s["n0"], list) else [s["n0"]]
        n0s = tuple(_num(x, "sweep.n0", positive=True) for x in vals)
        if not n0s:
            raise ConfigError("sweep.n0: empty")
    sweep = SweepConfig(omega, omega_range, n0s)

    methods = doc.get("methods", list(METHODS))
    if isinstance(methods, str):
        methods = [methods]
    if not isinstance(methods, list) or not methods:
        raise ConfigError("methods: expected a non-empty list")
    bad = [x for x in methods if x not in METHODS]
    if bad:
        raise ConfigError(f"methods: unknown {bad}; choose from {list(METHODS)}")

    n_max = doc.get("n_max")
    if n_max is not None and (isinstance(n_max, bool) or not isinstance(n_max, int) or n_max < 0):
        raise ConfigError(f"n_max: expected a non-negative integer, got {n_max!r}")

    tol = _keys(doc.get("tolerances") or {}, {"root", "max_iter", "quad_epsrel"}, "tolerances")
    max_iter = tol.get("max_iter", 50)
    if isinstance(max_iter, bool) or not isinstance(max_iter, int) or max_iter < 1:
        raise ConfigError(f"tolerances.max_iter: expected a positive integer, got {max_iter!r}")
    tolerances = Tolerances(
        _num(tol.get("root", 1e-12), "tolerances.root", positive=True, allow_zero=False),
        max_iter,
        _num(tol.get("quad_epsrel", 1e-12), "tolerances.quad_epsrel", positive=True, allow_zero=False),
    )

    out = _keys(doc.get("output") or {}, {"csv", "json"}, "output")
    output = OutputConfig(out.get("csv"), out.get("json"))

    workers = doc.get("workers", 1)
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise ConfigError(f"workers: expected a positive integer, got {workers!r}")

    return RunConfig(host, mixture, source, sweep, tuple(methods), n_max, tolerances, output, workers)


def _pair(z: complex) -> list:
    return [z.real, z.imag]


def render_config(cfg: RunConfig) -> dict:
    """Plain mapping that :func:`parse_config` maps back to ``cfg``."""
    waves = []
    for w in cfg.host.waves:
        d = {"label": w.label}
        if w.wavenumber is not None:
            d["wavenumber"] = _pair(w.wavenumber)
        elif w.speed is not None:
            d["speed"] = w.speed
            d["attenuation"] = w.attenuation
        else:
            d["table"] = {"omega": list(w.table_omega), "k": [_pair(k) for k in w.table_k]}
        waves.append(d)
    mix = {"radius_a": cfg.mixture.radius_a, "hole_b": cfg.mixture.hole_b}
    if cfg.mixture.n0 is not None:
        mix["n0"] = cfg.mixture.n0
    else:
        mix["volume_fraction"] = cfg.mixture.volume_fraction
    if cfg.tmatrix.file is not None:
        tm = {"file": cfg.tmatrix.file}
    else:
        tm = {"demo": asdict(cfg.tmatrix.demo)}
    sweep = {}
    if cfg.sweep.omega is not None:
        sweep["omega"] = list(cfg.sweep.omega)
    else:
        start, stop, count = cfg.sweep.omega_range
        sweep["omega_range"] = {"start": start, "stop": stop, "count": count}
    if cfg.sweep.n0 is not None:
        sweep["n0"] = list(cfg.sweep.n0)
    doc = {
        "host": {"density": cfg.host.density, "waves": waves},
        "mixture": mix,
        "tmatrix": tm,
        "sweep": sweep,
        "methods": list(cfg.methods),
        "tolerances": asdict(cfg.tolerances),
        "workers": cfg.workers,
    }
    if cfg.n_max is not None:
        doc["n_max"] = cfg.n_max
    out = {k: v for k, v in asdict(cfg.output).items() if v is not None}
    if out:
        doc["output"] = out
    return doc


def load_config(path) -> RunConfig:
    """Read a YAML config; a relative T-matrix path is taken relative to the file."""
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if doc is None:
        raise ConfigError(f"{path}: empty config")
    cfg = parse_config(doc)
    if cfg.tmatrix.file is not None and not Path(cfg.tmatrix.file).is_absolute():
        resolved = str((path.parent / cfg.tmatrix.file).resolve())
        cfg = RunConfig(cfg.host, cfg.mixture, TMatrixSource(file=resolved), cfg.sweep, cfg.methods,
                        cfg.n_max, cfg.tolerances, cfg.output, cfg.workers)
    return cfg


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(render_config(cfg), sort_keys=False)
