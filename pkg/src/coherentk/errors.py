"""Exception types raised across the package."""


class CoherentKError(Exception):
    """Base class for all package errors."""


class SpecialFunctionDomainError(CoherentKError, ValueError):
    """Argument outside the domain of a special function (e.g. Hankel at zero)."""


class SpecialFunctionRangeError(CoherentKError, OverflowError):
    """Result not representable in double precision."""


class TMatrixFormatError(CoherentKError, ValueError):
    """Malformed or inconsistent T-matrix file or array."""


class ConfigError(CoherentKError, ValueError):
    """Invalid run configuration."""


class ConditioningError(CoherentKError, ArithmeticError):
    """A linear system is singular or too ill-conditioned to trust.

    The reciprocal condition estimate is kept on ``rcond``.
    """

    def __init__(self, message, rcond=float("nan")):
        super().__init__(message)
        self.rcond = rcond


class DegeneracyError(CoherentKError, ArithmeticError):
    """Two host wavenumbers are too close, ``|k_p^2 - k_q^2|`` below threshold."""


class SpecializationRequired(CoherentKError, ArithmeticError):
    """Trial wavenumber sits on ``xi^2 = k_p^2``; use the at-``k_p`` form."""


class RegimeError(CoherentKError, ValueError):
    """Method requested outside the regime where it is defined."""


class ConvergenceError(CoherentKError, ArithmeticError):
    """Iterative procedure (root finder, quadrature) did not converge."""

    def __init__(self, message, iterations=None, evaluations=None):
        super().__init__(message)
        self.iterations = iterations
        self.evaluations = evaluations
