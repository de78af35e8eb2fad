"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class SlimError(Exception):
    """Base class for every error raised by slimkms."""


class InputError(SlimError, ValueError):
    """Invalid argument: wrong dimension, non-positive scale, bad grid."""


class QuadratureError(SlimError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, estimate: float):
        super().__init__(f"{message} (achieved error estimate {estimate:.3e})")
        self.estimate = estimate


class DegenerateInputError(SlimError):
    """The distribution pairs to zero against every probe."""


class NotScaledError(SlimError):
    """Pairings do not follow a power law in the scale parameter."""

    def __init__(self, message: str, rms: float):
        super().__init__(message)
        self.rms = rms


class NoScalingLimitError(SlimError):
    """The sequence N(lam) <u, phi_lam> diverges as lam -> 0."""


class DomainError(SlimError):
    """A scaled support leaves the region, or a chart is not invertible."""

    def __init__(self, message: str, lam: float | None = None):
        super().__init__(message)
        self.lam = lam


class NotConicallyRegularError(SlimError):
    """No cone with apex at the point fits inside the region."""


class NotL1Error(SlimError):
    """Correlation function fails the integrability hypothesis."""


class RegularizationError(SlimError):
    """The eps -> 0 extrapolation of a regularized kernel did not settle."""


class CoincidentOrbitError(InputError):
    """Both points sit on the same boost orbit (gamma = 0)."""


class OracleGateError(SlimError):
    """A physics cross-check failed; downstream numbers are untrustworthy."""
