"""Exception hierarchy shared by the package."""


class NCSepError(Exception):
    """Base class for all package errors."""


class DomainError(NCSepError, ValueError):
    """Input outside the physical domain (negative mass, NaN, theta > hbar, ...)."""


class ValidationError(NCSepError, ValueError):
    """A matrix failed a structural check (asymmetry, negative block determinant)."""


class SingularityError(NCSepError, ArithmeticError):
    pass


class ConsistencyError(NCSepError, ArithmeticError):
    """A quantity that is provably nonnegative / real came out otherwise beyond noise."""


class DegenerateModeError(NCSepError, ArithmeticError):
    """Normal-mode closed forms are unusable (degenerate spectrum or vanishing vector)."""


class IntegrationError(NCSepError, RuntimeError):
    def __init__(self, message, last_time=None):
        super().__init__(message)
        self.last_time = last_time


class ConfigError(NCSepError, ValueError):
    pass


class PartialResultsError(NCSepError, RuntimeError):
    """Sweep aborted part way; ``records`` holds everything computed before the failure."""

    def __init__(self, message, records):
        super().__init__(message)
        self.records = records
