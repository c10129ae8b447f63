"""Single-sphere transition coefficients, host media and mixture parameters.

Wave types are indexed from 0 in code, ordered compressional, shear,
thermal (labels ``c``, ``s``, ``th``).  ``TMatrixSet.coeffs[n, q, p]`` is
``T_n^{qp}``: the outgoing wave of type ``q`` produced at order ``n`` by an
incident regular wave of type ``p``.  No symmetry between ``T^{qp}`` and
``T^{pq}`` is assumed or enforced.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConditioningError, TMatrixFormatError
from .specfun import spherical_h1n_with_derivative, spherical_jn_with_derivative

DEFAULT_LABELS = ("c", "s", "th")
CONVENTIONS = ("paper", "linton-martin")


@dataclass(frozen=True)
class TMatrixSet:
    """Modal scattering coefficients for orders ``n = 0..n_max``.

    Parameters
    ----------
    coeffs : array, shape (n_max + 1, P, P)
        ``coeffs[n, q, p] = T_n^{qp}``.
    labels : tuple of str
        Wave labels, length P.
    radius_a : float
        Sphere radius in metres.
    omega : float or None
        Angular frequency (rad/s) the coefficients belong to, if known.
    convention : str
        Sign convention of the source the set was read from (file token
        ``"paper"`` for the native one, ``"linton-martin"`` for the negated
        one).  Entries are always stored natively and only converted back
        on save.
    floor : float
        Decay floor used by :attr:`under_truncated`.
    """

    coeffs: np.ndarray
    labels: tuple = ()
    radius_a: float = float("nan")
    omega: float | None = None
    convention: str = "paper"
    floor: float = 1e-14

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[1] != c.shape[2] or c.shape[0] < 1:
            raise TMatrixFormatError(f"coefficients must have shape (n_max+1, P, P), got {c.shape}")
        if c.shape[1] not in (1, 2, 3):
            raise TMatrixFormatError(f"P must be 1, 2 or 3, got {c.shape[1]}")
        if not np.all(np.isfinite(c)):
            bad = int(np.argwhere(~np.isfinite(c))[0][0])
            raise TMatrixFormatError(f"non-finite T-matrix entry at order n={bad}")
        if self.convention not in CONVENTIONS:
            raise TMatrixFormatError(f"unknown convention {self.convention!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        labels = tuple(self.labels) or DEFAULT_LABELS[: c.shape[1]]
        if len(labels) != c.shape[1]:
            raise TMatrixFormatError(f"{len(labels)} labels given for P={c.shape[1]}")
        object.__setattr__(self, "labels", labels)

    @property
    def P(self) -> int:
        return self.coeffs.shape[1]

    @property
    def n_max(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def under_truncated(self) -> bool:
        """True when the last stored order has not decayed below ``floor``."""
        return bool(np.max(np.abs(self.coeffs[-1])) >= self.floor)

    def truncated(self, n_max: int) -> "TMatrixSet":
        """Copy keeping orders ``0..n_max`` (zero-padded if ``n_max`` is larger)."""
        if n_max <= self.n_max:
            c = self.coeffs[: n_max + 1]
        else:
            c = np.zeros((n_max + 1, self.P, self.P), dtype=complex)
            c[: self.n_max + 1] = self.coeffs
        return TMatrixSet(c, self.labels, self.radius_a, self.omega, self.convention, self.floor)

    def select(self, waves: Sequence[int]) -> "TMatrixSet":
        """Sub-set restricted to the given wave indices."""
        idx = np.asarray(waves)
        c = self.coeffs[:, idx][:, :, idx]
        return TMatrixSet(c, tuple(self.labels[i] for i in idx), self.radius_a, self.omega,
                          self.convention, self.floor)

    @classmethod
    def zero(cls, P: int, n_max: int, **kw) -> "TMatrixSet":
        return cls(np.zeros((n_max + 1, P, P), dtype=complex), **kw)


def default_truncation(t: TMatrixSet, floor: float = 1e-12, cap: int = 64) -> int:
    """Highest order carrying any ``|T_n^{qp}| >= floor``, capped at ``cap``."""
    significant = np.nonzero(np.max(np.abs(t.coeffs), axis=(1, 2)) >= floor)[0]
    n = int(significant[-1]) if significant.size else 0
    return min(n, cap)


def is_decoupled(t: TMatrixSet, tol: float = 0.0) -> bool:
    """True iff every off-diagonal ``|T_n^{qp}|`` (``q != p``) is ``<= tol``."""
    off = t.coeffs * (1 - np.eye(t.P))[None, :, :]
    return bool(np.all(np.abs(off) <= tol))


# -- file format -------------------------------------------------------------


def tmatrix_to_dict(t: TMatrixSet) -> dict:
    sign = -1.0 if t.convention == "linton-martin" else 1.0
    orders = []
    for n in range(t.n_max + 1):
        block = sign * t.coeffs[n]
        orders.append([[[float(v.real), float(v.imag)] for v in row] for row in block])
    doc = {
        "P": t.P,
        "labels": list(t.labels),
        "radius_a": t.radius_a,
        "convention": t.convention,
        "orders": orders,
    }
    if t.omega is not None:
        doc["omega"] = t.omega
    return doc


def _require(doc: dict, key: str):
    if key not in doc:
        raise TMatrixFormatError(f"T-matrix document missing field {key!r}")
    return doc[key]


def tmatrix_from_dict(doc: dict, floor: float = 1e-14) -> TMatrixSet:
    if not isinstance(doc, dict):
        raise TMatrixFormatError("T-matrix document must be a mapping")
    P = _require(doc, "P")
    if not isinstance(P, int) or P not in (1, 2, 3):
        raise TMatrixFormatError(f"P must be 1, 2 or 3, got {P!r}")
    labels = list(doc.get("labels", DEFAULT_LABELS[:P]))
    if len(labels) != P:
        raise TMatrixFormatError(f"{len(labels)} labels given for P={P}")
    convention = doc.get("convention", "paper")
    if convention not in CONVENTIONS:
        raise TMatrixFormatError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    radius = float(_require(doc, "radius_a"))
    orders = _require(doc, "orders")
    if not isinstance(orders, list) or not orders:
        raise TMatrixFormatError("'orders' must be a non-empty list")
    coeffs = np.empty((len(orders), P, P), dtype=complex)
    for n, block in enumerate(orders):
        if not isinstance(block, list) or len(block) != P or any(
            not isinstance(row, list) or len(row) != P for row in block
        ):
            raise TMatrixFormatError(f"order n={n}: expected a {P}x{P} matrix")
        for q, row in enumerate(block):
            for p, pair in enumerate(row):
                if not isinstance(pair, list) or len(pair) != 2:
                    raise TMatrixFormatError(f"order n={n}, entry ({q},{p}): expected [re, im]")
                try:
                    v = complex(float(pair[0]), float(pair[1]))
                except (TypeError, ValueError) as exc:
                    raise TMatrixFormatError(f"order n={n}, entry ({q},{p}): {exc}") from None
                if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                    raise TMatrixFormatError(f"order n={n}, entry ({q},{p}) is not finite")
                coeffs[n, q, p] = v
    if convention == "linton-martin":
        coeffs = -coeffs
    omega = doc.get("omega")
    return TMatrixSet(coeffs, tuple(labels), radius, None if omega is None else float(omega),
                      convention, floor)


def load_tmatrix(path, floor: float = 1e-14) -> TMatrixSet:
    """Read and validate a T-matrix JSON document."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise TMatrixFormatError(f"{path}: not valid JSON ({exc})") from None
    return tmatrix_from_dict(doc, floor=floor)


def save_tmatrix(t: TMatrixSet, path) -> None:
    Path(path).write_text(json.dumps(tmatrix_to_dict(t), indent=1) + "\n")


# -- host medium and mixture ------------------------------------------------


@dataclass(frozen=True)
class HostWave:
    """Wavenumber law for one host wave type.

    Exactly one of the three forms is used: a fixed complex ``wavenumber``;
    ``speed`` (m/s) with ``attenuation`` (Np/m), giving
    ``k = omega / speed + i attenuation``; or a table ``(table_omega,
    table_k)`` interpolated piecewise-linearly in real and imaginary parts.
    """

    label: str = "c"
    wavenumber: complex | None = None
    speed: float | None = None
    attenuation: float = 0.0
    table_omega: tuple | None = None
    table_k: tuple | None = None

    def __post_init__(self):
        forms = [self.wavenumber is not None, self.speed is not None, self.table_omega is not None]
        if sum(forms) != 1:
            raise ValueError(f"wave {self.label!r}: give exactly one of wavenumber, speed, table")
        if self.wavenumber is not None:
            k = complex(self.wavenumber)
            if k.imag < 0:
                raise ValueError(f"wave {self.label!r}: Im k must be >= 0, got {k}")
            object.__setattr__(self, "wavenumber", k)
        if self.speed is not None and (self.speed <= 0 or self.attenuation < 0):
            raise ValueError(f"wave {self.label!r}: need speed > 0 and attenuation >= 0")
        if self.table_omega is not None:
            w = tuple(float(x) for x in self.table_omega)
            k = tuple(complex(x) for x in self.table_k)
            if len(w) != len(k) or len(w) < 2 or any(b <= a for a, b in zip(w, w[1:])):
                raise ValueError(f"wave {self.label!r}: table needs >= 2 strictly increasing omegas")
            if any(x.imag < 0 for x in k):
                raise ValueError(f"wave {self.label!r}: tabulated Im k must be >= 0")
            object.__setattr__(self, "table_omega", w)
            object.__setattr__(self, "table_k", k)

    def __call__(self, omega: float) -> complex:
        if self.wavenumber is not None:
            return self.wavenumber
        if self.speed is not None:
            return complex(omega / self.speed, self.attenuation)
        w = self.table_omega
        if not w[0] <= omega <= w[-1]:
            raise ValueError(
                f"wave {self.label!r}: omega={omega} outside tabulated range [{w[0]}, {w[-1]}]"
            )
        k = np.asarray(self.table_k)
        return complex(np.interp(omega, w, k.real), np.interp(omega, w, k.imag))


@dataclass(frozen=True)
class HostMedium:
    """The P wave types supported by the host, plus its mass density."""

    waves: tuple
    density: float = 1000.0

    def __post_init__(self):
        object.__setattr__(self, "waves", tuple(self.waves))
        if not 1 <= len(self.waves) <= 3:
            raise ValueError(f"host must carry 1 to 3 wave types, got {len(self.waves)}")

    @property
    def P(self) -> int:
        return len(self.waves)

    @property
    def labels(self) -> tuple:
        return tuple(w.label for w in self.waves)

    def wavenumbers(self, omega: float) -> np.ndarray:
        return np.array([w(omega) for w in self.waves], dtype=complex)

    @classmethod
    def from_wavenumbers(cls, ks: Sequence[complex], labels: Sequence[str] | None = None,
                         density: float = 1000.0) -> "HostMedium":
        labels = labels or DEFAULT_LABELS[: len(ks)]
        return cls(tuple(HostWave(l, wavenumber=k) for l, k in zip(labels, ks)), density)


@dataclass(frozen=True)
class MixtureSpec:
    """Number density ``n0`` (1/m^3), sphere radius ``radius_a`` and hole radius ``hole_b`` (m).

    ``hole_b`` must exceed ``2 * radius_a`` strictly; a value slightly above
    it (e.g. ``2.0001 * radius_a``) is the usual choice.
    """

    n0: float
    radius_a: float
    hole_b: float

    def __post_init__(self):
        if not self.n0 >= 0:
            raise ValueError(f"number density must be >= 0, got {self.n0}")
        if not self.radius_a > 0:
            raise ValueError(f"sphere radius must be > 0, got {self.radius_a}")
        if not self.hole_b > 2 * self.radius_a:
            raise ValueError(
                f"hole radius b={self.hole_b} must exceed 2a={2 * self.radius_a}"
            )

    @property
    def epsilon(self) -> complex:
        return -4j * self.n0

    @property
    def volume_fraction(self) -> float:
        return 4.0 / 3.0 * math.pi * self.radius_a**3 * self.n0

    @classmethod
    def from_volume_fraction(cls, phi: float, radius_a: float, hole_b: float) -> "MixtureSpec":
        return cls(phi / (4.0 / 3.0 * math.pi * radius_a**3), radius_a, hole_b)

    def with_n0(self, n0: float) -> "MixtureSpec":
        return MixtureSpec(n0, self.radius_a, self.hole_b)


# -- built-in fluid sphere ---------------------------------------------------


def fluid_sphere_tmatrix(host: HostMedium, sphere_density: float, sphere_speed: float,
                         radius_a: float, omega: float, n_max: int = 20,
                         floor: float = 1e-14) -> TMatrixSet:
    """T-matrix of a fluid sphere in a fluid host (P = 1).

    Pressure and normal displacement are continuous at ``r = a``.  With
    displacement potentials ``j_n(kr) + T_n h_n(kr)`` outside and
    ``B_n j_n(k1 r)`` inside, each order gives the 2x2 system

        rho h_n(ka) T - rho1 j_n(k1 a) B = -rho j_n(ka)
        k h_n'(ka)  T - k1 j_n'(k1 a)  B = -k j_n'(ka)
    """
    if host.P != 1:
        raise ValueError(f"fluid sphere model needs a P=1 host, got P={host.P}")
    if min(sphere_density, sphere_speed, radius_a, omega) <= 0:
        raise ValueError("sphere density, speed, radius and omega must be positive")
    k = complex(host.wavenumbers(omega)[0])
    k1 = omega / sphere_speed
    rho, rho1 = host.density, sphere_density
    j, jd = spherical_jn_with_derivative(n_max, k * radius_a)
    h, hd = spherical_h1n_with_derivative(n_max, k * radius_a)
    j1, j1d = spherical_jn_with_derivative(n_max, k1 * radius_a)
    coeffs = np.zeros((n_max + 1, 1, 1), dtype=complex)
    for n in range(n_max + 1):
        a = np.array([[rho * h[n], -rho1 * j1[n]], [k * hd[n], -k1 * j1d[n]]])
        rhs = np.array([-rho * j[n], -k * jd[n]])
        # scale columns so the condition number reflects the physics, not magnitudes
        col = np.max(np.abs(a), axis=0)
        if np.any(col == 0):
            raise ConditioningError(f"boundary system singular at order n={n}", 0.0)
        a_s = a / col
        cond = np.linalg.cond(a_s)
        if not np.isfinite(cond) or cond > 1e13:
            raise ConditioningError(
                f"boundary system ill-conditioned at order n={n} (cond={cond:.2e})", 1.0 / cond
            )
        coeffs[n, 0, 0] = np.linalg.solve(a_s, rhs)[0] / col[0]
    return TMatrixSet(coeffs, host.labels, radius_a, omega, "paper", floor)


def fluid_sphere_demo(density_ratio: float = 2.0, speed_ratio: float = 1.5, ka: float = 0.3,
                      n_max: int = 20, host_speed: float = 1500.0, host_density: float = 1000.0,
                      radius_a: float = 1e-3) -> tuple[HostMedium, TMatrixSet]:
    """Lossless host plus fluid sphere described by contrast ratios and ``k a``."""
    host = HostMedium((HostWave("c", speed=host_speed),), density=host_density)
    omega = ka * host_speed / radius_a
    t = fluid_sphere_tmatrix(host, density_ratio * host_density, speed_ratio * host_speed,
                             radius_a, omega, n_max)
    return host, t


def random_tmatrix(P: int, n_max: int, rng: np.random.Generator, *, amplitude: float = 0.2,
                   decay: float = 0.35, coupled: bool = True, radius_a: float = 1.0) -> TMatrixSet:
    """Synthetic T-matrix with geometric decay ``amplitude * decay**n`` and random phases."""
    shape = (n_max + 1, P, P)
    mag = amplitude * decay ** np.arange(n_max + 1)[:, None, None] * rng.uniform(0.5, 1.0, shape)
    coeffs = mag * np.exp(2j * np.pi * rng.uniform(size=shape))
    if not coupled:
        coeffs = coeffs * np.eye(P)[None]
    return TMatrixSet(coeffs, DEFAULT_LABELS[:P], radius_a)
