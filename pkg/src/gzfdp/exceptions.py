"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: validation problems exit with 2,
numerical/rank degeneracies with 3, and I/O failures with 4.
"""


class GzfdpError(Exception):
    """Base class for all package errors."""


class ParameterError(GzfdpError, ValueError):
    """An argument is outside its documented domain."""


class DimensionError(ParameterError):
    """Matrix/vector dimensions are inconsistent (e.g. more users than antennas)."""


class FixtureFormatError(GzfdpError, ValueError):
    """A channel fixture file is malformed; the message names line and field."""


class RankDeficiencyError(GzfdpError, ArithmeticError):
    """The channel Gram matrix is numerically singular."""

    def __init__(self, message, smallest_singular_value=None):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


class CapabilityError(GzfdpError, ValueError):
    """The request is valid but too large for this implementation."""


class SpecValidationError(GzfdpError, ValueError):
    """An experiment spec failed validation; carries every violation found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid experiment spec:\n" +
                         "\n".join("  - " + v for v in self.violations))
