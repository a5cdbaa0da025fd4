"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class OQSError(Exception):
    """Base class for all library errors."""


class ConfigError(OQSError, ValueError):
    """Invalid physical parameters, grids or configuration documents."""


class LightConeSingularity(OQSError, ValueError):
    """A time-domain field kernel was requested too close to the light cone."""


class SingularAtFrequency(OQSError, ArithmeticError):
    """The response matrix cannot be inverted at a real frequency."""

    def __init__(self, kappa: float, cond: float):
        super().__init__(f"response matrix singular at kappa={kappa!r} (cond={cond:.3e})")
        self.kappa = kappa
        self.cond = cond


class UnstableSpec(OQSError):
    """The oscillator network has no late-time equilibrium state."""


class NotConverged(OQSError, ArithmeticError):
    """A quadrature or iterative solve missed its tolerance."""


class StepTooLarge(NotConverged):
    """A finite-difference step failed its Richardson self-check."""


class PoleArgument(OQSError, ValueError):
    """A special function was evaluated at one of its poles."""


class SpectralNotPSD(OQSError, ArithmeticError):
    """A noise spectral matrix has a significantly negative eigenvalue."""


class StepUnstable(OQSError, ArithmeticError):
    """A time integration blew past the overflow guard."""


class NotPositiveDefiniteWarning(UserWarning):
    """The bare frequency matrix is not positive definite."""
