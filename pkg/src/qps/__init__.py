"""Numerical toolkit for one-dimensional quasi-periodic Schrödinger operators.

Lyapunov exponents and acceleration, Dirichlet spectra and the integrated
density of states, large-deviation statistics of ``log||M_m||``, and
potential theory on the annulus.
"""
__version__ = "0.1.0"

from .arithmetic import Frequency, beta_sequence, convergents, denominators, make_liouville
from .cocycle import Cocycle, Potential, TransferProduct, dirichlet_determinant, transfer_product
from .errors import (BudgetExceeded, CoincidentPoints, ConfigError, NumericGuardError,
                     PrecisionExhausted, QPSError, RationalDetected, ResolutionFloor,
                     TooCloseToSpectrum)
from .kernels import BACKEND
from .lyapunov import acceleration, finite_lyapunov, linearity_window, profile

__all__ = [
    "__version__", "BACKEND", "Frequency", "Potential", "Cocycle", "TransferProduct",
    "beta_sequence", "convergents", "denominators", "make_liouville", "transfer_product",
    "dirichlet_determinant", "finite_lyapunov", "acceleration", "profile", "linearity_window",
    "QPSError", "NumericGuardError", "RationalDetected", "PrecisionExhausted", "BudgetExceeded",
    "TooCloseToSpectrum", "ResolutionFloor", "CoincidentPoints", "ConfigError",
]
