"""
Error types raised by the numerical core.
Every error derives from FockSchemeError so callers can catch the family at once.
"""
from typing import Dict, Optional


class FockSchemeError(Exception):
    """Base class for all errors raised by the algorithms package"""


class InvalidDimensionError(FockSchemeError, ValueError):
    """Truncation dimension below 2"""


class DimensionMismatchError(FockSchemeError, ValueError):
    """Operator and state live on different truncated spaces"""


class NonHermitianError(FockSchemeError, ValueError):
    """Hermitian routine called with a non-Hermitian matrix"""


class DegeneratePointError(FockSchemeError, ArithmeticError):
    """Ground-state gap collapsed; the penalty density is singular here"""

    def __init__(self, message: str, gap: float = 0.0):
        super().__init__(message)
        self.gap = gap


class InfeasiblePathError(FockSchemeError, ValueError):
    """Path violates the drive-space constraints"""


class ConvergenceError(FockSchemeError, RuntimeError):
    """Propagation drifted outside its accuracy bounds"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, float]] = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
