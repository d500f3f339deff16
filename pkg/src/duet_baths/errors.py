"""Exception hierarchy shared by all modules."""


class DuetError(Exception):
    """Base class for library errors."""


class ConfigError(DuetError, ValueError):
    """Invalid parameters or run configuration."""


class DomainError(DuetError, ValueError):
    """Argument outside the domain where a formula is defined."""


class InstabilityError(DuetError):
    """Parameters produce a pole of G(s) in the right half-plane."""


class NumericalError(DuetError):
    """Quadrature or series failed to reach the requested tolerance.

    ``achieved`` carries the error estimate that was reached, when known.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved
