"""Exception hierarchy shared by every module.

Validation failures (bad domain, parameter or range) map to CLI exit code 2,
numerical failures (convergence, resource caps, undetermined orbits) to 3.
"""


class KochError(Exception):
    """Base class for all errors raised by :mod:`vonkoch`."""


class ValidationError(KochError, ValueError):
    pass


class DomainError(ValidationError):
    """A point lies outside ``[0, 1]``."""


class ParameterError(ValidationError):
    """A model parameter (usually lambda) is outside its admissible range."""


class RangeError(ValidationError):
    """An exponent lies outside the open support of the spectrum."""


class ComputationError(KochError, ArithmeticError):
    pass


class ConvergenceError(ComputationError):
    """A requested tolerance cannot be reached before the depth cap."""


class ResourceError(ComputationError):
    """A size cap (generation, grid level) would be exceeded."""


class UndeterminedError(ComputationError):
    """Orbit cycle detection hit its depth limit."""
