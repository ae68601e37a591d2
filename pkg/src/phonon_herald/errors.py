"""Exception types raised by phonon_herald."""


class PhononHeraldError(Exception):
    """Base class for all library errors."""


class DomainError(PhononHeraldError, ValueError):
    """An argument lies outside the domain of a physical formula."""


class TruncationError(PhononHeraldError):
    """A truncated Fock-space representation would lose too much probability."""


class UndefinedStatisticError(PhononHeraldError, ZeroDivisionError):
    """A normalized statistic (g2, alpha, ...) has a vanishing denominator."""


class ImpossibleConditionError(PhononHeraldError):
    """Conditioning on an event that has zero probability."""


class IntegrationError(PhononHeraldError, RuntimeError):
    """The fixed-step integrator became unstable."""


class FitError(PhononHeraldError, RuntimeError):
    """A least-squares fit failed or was given a degenerate sample set."""


class TimeTagFormatError(PhononHeraldError, ValueError):
    """A time-tag file does not follow the v1 text format."""


class ApproximationWarning(UserWarning):
    """A closed-form approximation is used outside its regime of validity."""
