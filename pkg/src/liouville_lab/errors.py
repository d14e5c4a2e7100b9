"""Exception types shared across the package.

The CLI maps these onto exit codes, so every module raises one of them
instead of a bare ``ValueError`` when a documented failure mode occurs.
"""


class LabError(Exception):
    """Base class for documented failure outcomes."""


class PreconditionError(LabError, ValueError):
    """Input violates a stated precondition (parameter range, ordering...)."""


class OutOfRangeError(LabError, ArithmeticError):
    """A value is not representable as a finite positive double."""


class DivergentIntegralError(LabError, ArithmeticError):
    """An improper integral failed its integrability probe."""


class NumericalFailure(LabError, RuntimeError):
    """A numerical routine could not reach its tolerance."""


class ConfigError(LabError, ValueError):
    """Malformed experiment configuration."""
