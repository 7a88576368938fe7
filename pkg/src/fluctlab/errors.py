"""Exception hierarchy shared by all fluctlab modules.

Exit-code mapping used by the CLI lives in ``fluctlab.cli``; library code
raises these and never calls ``sys.exit`` itself.
"""

from __future__ import annotations


class FluctlabError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(FluctlabError, ValueError):
    """An argument violates a documented precondition."""


class OrderRangeError(InvalidArgumentError):
    """Correlator order outside the supported range."""


class IncompleteTableError(FluctlabError):
    """A moment/cumulant table is missing a required entry."""


class NormalizationError(FluctlabError):
    """First moments are expected to vanish and do not."""


class ModelValidationError(FluctlabError):
    """A model state violates hermiticity/positivity/integrability checks."""


class NumericalAccuracyError(FluctlabError):
    """A quadrature accuracy certificate failed.

    Carries the offending bound so callers can report it.
    """

    def __init__(self, message: str, bound: float | None = None):
        super().__init__(message)
        self.bound = bound


class UnsupportedModeError(FluctlabError):
    """Requested computation mode is not available for these inputs."""


class InvalidLimitStateError(FluctlabError):
    """Assembled limit covariance violates its structural invariants."""


class InvalidTestConfigurationError(FluctlabError):
    """A check was configured inconsistently (e.g. smoothing overlaps a gap)."""


class ConfigError(FluctlabError):
    """Run configuration is malformed or incompatible with the model."""
