"""Numerical laboratory for Liouville-type theorems, universal estimates and blow-up rates."""
from .errors import (ConfigError, DivergentIntegralError, LabError, NumericalFailure,
                     OutOfRangeError, PreconditionError)
from .exponents import critical_exponents
from .nonlinearity import Nonlinearity, build_example, parse_nonlinearity

__version__ = "0.1.0"

__all__ = ["ConfigError", "DivergentIntegralError", "LabError", "NumericalFailure",
           "OutOfRangeError", "PreconditionError", "Nonlinearity", "build_example",
           "critical_exponents", "parse_nonlinearity", "__version__"]
