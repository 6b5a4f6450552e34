"""Exception types raised by the solver and its checks."""


class VP1DError(Exception):
    """Base class for all package errors."""


class DomainCoverageError(VP1DError):
    """A grid does not cover the support it is required to cover."""


class NegativityError(VP1DError):
    """Initial data would become negative somewhere."""


class SupportOverflowError(VP1DError):
    """Charge density is non-negligible at the spatial grid boundary."""


class InterpolationError(VP1DError):
    """Interpolation undershoot exceeded the allowed tolerance."""


class OutOfDomainError(VP1DError):
    """A trajectory or query point left the sampled region."""


class InteriorPointError(VP1DError):
    """An exterior-only formula was evaluated inside the support radius."""


class DegenerateFrequencyError(VP1DError):
    pass


class InsufficientHistoryError(VP1DError):
    pass


class InsufficientDataError(VP1DError):
    pass


class ConfigError(VP1DError):
    """Invalid or incomplete run configuration."""
