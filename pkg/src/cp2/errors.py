"""Exception hierarchy.

Every failure mode raised by this package derives from :class:`Cp2Error`,
so callers can catch one type at the boundary.  The subclasses mirror the
distinct contract violations: bad arguments, broken numerics, missing model
capabilities, unparseable inputs, and degenerate data.
"""


class Cp2Error(Exception):
    """Base class for all package errors."""


class DomainError(Cp2Error, ValueError):
    """An argument lies outside the documented domain of an operation."""


class ValidationError(Cp2Error, ValueError):
    """A composite input (config, dataset, spec) violates its invariants."""


class ConfigError(ValidationError):
    """A run configuration is malformed; the message names the field."""


class ParseError(Cp2Error, ValueError):
    """A file could not be parsed; the message names file, row and column."""


class MissingColumnError(ParseError):
    """A named CSV column is absent from the header."""


class FitError(Cp2Error, RuntimeError):
    """An iterative fit failed (non-finite input, empty component, no data)."""


class NumericalError(Cp2Error, ArithmeticError):
    """A numeric routine produced or encountered a non-finite quantity."""


class BracketError(NumericalError):
    """No admissible parameter attains the requested mass.

    Raised when the feasible set of the calibration root-find is empty or
    unbounded below, or when bracket expansion exhausts its budget without
    a sign change.  Signals a broken model or a misconfigured method.
    """


class CapabilityError(Cp2Error, TypeError):
    """A model lacks the capability (density, sampler, ...) an op needs."""


class DegenerateError(Cp2Error, ValueError):
    """Too little data for the requested operation (empty split, tiny n)."""
