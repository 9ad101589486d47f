"""Exception types raised by the toolkit.

Numeric guard trips (precision, big-integer budget) derive from
:class:`NumericGuardError`; the CLI maps those to exit code 3.
"""


class QPSError(Exception):
    """Base class for all toolkit errors."""


class NumericGuardError(QPSError):
    """A numeric guard tripped; the result would not be trustworthy."""


class RationalDetected(NumericGuardError):
    """The input is rational at working precision."""


class PrecisionExhausted(NumericGuardError):
    """|k| is too large for 128-bit fixed-point evaluation of k*omega."""


class BudgetExceeded(NumericGuardError):
    """A continued-fraction denominator exceeds the digit budget."""


class TooCloseToSpectrum(QPSError):
    """Too many Dirichlet eigenvalues lie within the exclusion radius."""


class ResolutionFloor(QPSError):
    """Eigenvalue-count increments are below the finite-volume resolution."""


class CoincidentPoints(QPSError):
    """Green's function evaluated on its diagonal."""


class ConfigError(QPSError):
    """Invalid experiment configuration."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
