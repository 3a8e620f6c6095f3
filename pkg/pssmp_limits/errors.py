"""
Error Types for the pssmp-limits Library

Every failure the library raises on purpose derives from PssmpError and carries
the process exit code the command-line entry point reports for it.
"""
from typing import Any, Dict, Optional


class PssmpError(Exception):
    """Base class for library errors."""

    exit_code = 3

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class DomainError(PssmpError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class OutOfRangeError(PssmpError, ValueError):
    """Requested value lies beyond what a function attains."""


class ClockRangeError(OutOfRangeError):
    """Clock query beyond the simulated horizon."""

    def __init__(self, message: str, log_c_horizon: float):
        super().__init__(message, {"log_c_horizon": log_c_horizon})
        self.log_c_horizon = log_c_horizon


class NumericError(PssmpError, ArithmeticError):
    """Quadrature failure, non-termination or loss of precision."""


class UsageError(PssmpError, ValueError):
    """Invalid arguments: short grids, non-positive steps, empty samples."""


class DegenerateLawError(PssmpError, ValueError):
    """Limit law is degenerate for the boundary index (beta 0 or 1)."""

    def __init__(self, message: str, flag: str):
        super().__init__(message, {"flag": flag})
        self.flag = flag


class PreconditionError(PssmpError, ValueError):
    """A model does not satisfy the hypothesis an operation requires."""


class UnsupportedError(PssmpError, NotImplementedError):
    """Operation not available for the given representation."""


class TruncationError(PssmpError, RuntimeError):
    """Particle cap exceeded before the requested time."""

    def __init__(self, message: str, achieved_time: float):
        super().__init__(message, {"achieved_time": achieved_time})
        self.achieved_time = achieved_time


class ConfigError(PssmpError, ValueError):
    """Configuration document does not match the published schema."""

    exit_code = 2


class ToleranceFailure(PssmpError):
    """A --check verdict failed its tolerance."""

    exit_code = 4
