"""Structured errors with process exit codes.

The CLI maps error classes to exit codes: problem-description errors
(bad geometry, bad parameters, bad config files) exit 2, violated
mathematical hypotheses exit 3, numerical failures exit 4.  Library
callers catch the same classes.
"""


class MixneuError(Exception):
    """Base class for all structured errors."""

    exit_code = 1


class ConfigError(MixneuError):
    """Malformed or inconsistent problem description."""

    exit_code = 2


class InvalidGeometryError(ConfigError):
    """Interval, collar, or resolution parameters are inadmissible."""


class InvalidParamsError(ConfigError):
    """Operator parameters are inadmissible (signs, s outside (0,1), ...)."""


class FieldSpecError(ConfigError):
    """Piecewise field description is inadmissible."""


class AssemblyError(ConfigError):
    """Assembly rejected its inputs or produced invalid forms."""


class HypothesisViolationError(MixneuError):
    """A hypothesis required by the theory fails for the given data."""

    exit_code = 3


class DegenerateWeightError(HypothesisViolationError):
    """Weight integral vanishes or the weight vector is identically zero."""


class ZeroFluxViolationError(HypothesisViolationError):
    """Source term has nonzero integral; the Neumann problem is unsolvable."""


class IntegrabilityError(HypothesisViolationError):
    """Integrability exponent q is not admissible (q <= critical exponent)."""


class NumericalError(MixneuError):
    """A numerical step failed (factorization, convergence, degeneracy)."""

    exit_code = 4


class DiscretePoincareError(NumericalError):
    """Projected energy matrix is not positive definite on the mean-free space."""


class DegenerateDirectionError(NumericalError):
    """Requested quotient is undefined (zero weighted norm in the denominator)."""


class ConvergenceError(NumericalError):
    """An iteration failed to converge within its budget."""
