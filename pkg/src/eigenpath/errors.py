"""Exception and warning types shared across the package."""


class EigenpathError(Exception):
    """Base class for all package errors."""


class PathDomainError(EigenpathError, ValueError):
    """A parameter lies outside the domain an operation accepts."""


class DegenerateGroundState(EigenpathError, ArithmeticError):
    """The ground state is (numerically) degenerate, so the eigenpath is undefined."""

    def __init__(self, message, s=None, gap=None):
        super().__init__(message)
        self.s = s
        self.gap = gap


class NotFrustrationFree(EigenpathError):
    """A path flagged frustration-free has a nonzero ground energy."""


class NotPSD(EigenpathError, ValueError):
    """A matrix that must be positive semidefinite has a negative eigenvalue."""


class ConfigError(EigenpathError, ValueError):
    """A configuration document could not be interpreted."""


class NegativeIntegrandWarning(RuntimeWarning):
    """The curvature integrand <psi|H''|psi> - E'' came out negative and was clipped."""
