"""Exception types shared across the package.

Numeric failures are hard errors: nothing retries silently or substitutes
a fallback value.  Callers that aggregate many trials (the Monte Carlo
driver) catch :class:`PassiveGlrtError` per detector and report the
failure instead of aborting the whole run.
"""


class PassiveGlrtError(Exception):
    """Base class for all package-specific errors."""


class NotPositiveDefinite(PassiveGlrtError):
    """A matrix required to be positive definite has a non-positive pivot."""


class ConvergenceFailure(PassiveGlrtError):
    """An iterative eigenvalue routine did not converge."""


class ZeroVector(PassiveGlrtError):
    """A vector argument that must be nonzero is (numerically) zero."""


class InvalidRolloff(PassiveGlrtError):
    """Pulse rolloff factor outside [0, 1]."""


class ZeroSignal(PassiveGlrtError):
    """A synthesized transmit signal has zero energy."""


class DegenerateDraw(PassiveGlrtError):
    """A random draw that must be nonzero came out zero."""


class NegativeResidual(PassiveGlrtError):
    """A residual energy term that must be nonnegative is negative."""


class DegenerateDenominator(PassiveGlrtError):
    """A ratio statistic's denominator is too close to zero."""


class SearchSpaceTooLarge(PassiveGlrtError):
    """Exhaustive symbol enumeration would exceed the configured cap."""


class ConfigError(PassiveGlrtError):
    """A run configuration file violates the schema."""


class InterchangeError(PassiveGlrtError):
    """An observation interchange file is malformed."""
