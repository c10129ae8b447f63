"""Coherent wave numbers in dilute random suspensions of spheres.

The host medium may carry up to three bulk wave types (compressional, shear,
thermal); each spawns a coherent wave whose effective wavenumber is computed
from the scatterer T-matrix under a hole-corrected pair closure.
"""

__version__ = "0.1.0"

from .dispersion import (
    METHODS,
    DispersionResult,
    EffectiveWavenumber,
    dispersion,
    solve_determinant,
    wavenumber_asymptotic_o2,
    wavenumber_lloyd_berry,
    wavenumber_lowfreq_o2,
    xi_from_square,
)
from .modal import ModalSystem
from .tmatrix import (
    HostMedium,
    HostWave,
    MixtureSpec,
    TMatrixSet,
    fluid_sphere_demo,
    fluid_sphere_tmatrix,
    load_tmatrix,
    save_tmatrix,
)

__all__ = [
    "METHODS",
    "DispersionResult",
    "EffectiveWavenumber",
    "HostMedium",
    "HostWave",
    "MixtureSpec",
    "ModalSystem",
    "TMatrixSet",
    "dispersion",
    "fluid_sphere_demo",
    "fluid_sphere_tmatrix",
    "load_tmatrix",
    "save_tmatrix",
    "solve_determinant",
    "wavenumber_asymptotic_o2",
    "wavenumber_lloyd_berry",
    "wavenumber_lowfreq_o2",
    "xi_from_square",
]
