"""Exception hierarchy shared by all modules."""


class RemnantError(Exception):
    """Base class for every error raised by this package."""


class DomainError(RemnantError, ValueError):
    """An argument lies outside the domain of the function."""


class ConfigurationError(RemnantError, ValueError):
    """A grid, pulse or scenario configuration is unusable.

    ``violations`` lists every violated constraint, not only the first one.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class TruncationError(RemnantError, RuntimeError):
    """A truncated photon-number window loses too much probability."""

    def __init__(self, message, required_range=None):
        super().__init__(message)
        self.required_range = required_range


class PositivityError(RemnantError, ArithmeticError):
    """A density matrix has an eigenvalue clearly outside [0, 1]."""


class SingularMassError(RemnantError, ArithmeticError):
    """The dressed-mass denominator vanishes."""
