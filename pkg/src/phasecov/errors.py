"""Exception types raised across the package."""


class PhaseCovError(Exception):
    """Base class for all package errors."""


class DomainError(PhaseCovError, ValueError):
    """A parameter lies outside the domain an operation accepts."""


class ConfigError(DomainError):
    """Invalid CLI or scan configuration; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NotInInterior(DomainError):
    pass


class SingularChannel(PhaseCovError, ArithmeticError):
    pass


class NoNormalForm(PhaseCovError, ArithmeticError):
    pass


class QuadratureFailure(PhaseCovError, ArithmeticError):
    pass


class DegenerateKernel(PhaseCovError, ArithmeticError):
    pass


class PoleOnGrid(PhaseCovError, ValueError):
    pass


class UnsupportedInversion(PhaseCovError, ArithmeticError):
    pass
