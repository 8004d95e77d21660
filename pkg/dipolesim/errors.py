"""
Exception hierarchy shared by the simulation modules, the scenario runner and the CLI.
"""

from typing import Any, Dict, Optional


class DipoleSimError(Exception):
    """Base exception for every error raised by dipolesim."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable form used by the CLI error report."""
        return {"error": type(self).__name__, "message": self.message, "details": self.details}


class InvalidArgumentError(DipoleSimError, ValueError):
    """Exception raised when an argument violates a precondition."""


class SingularInputError(DipoleSimError, ValueError):
    """Exception raised when a quantity is evaluated at a singular point."""


class ResourceLimitError(DipoleSimError):
    """Exception raised when a problem exceeds a configured memory budget."""

    def __init__(self, message: str, budget: str, limit: int, requested: int):
        super().__init__(message, {"budget": budget, "limit": limit, "requested": requested})
        self.budget = budget
        self.limit = limit
        self.requested = requested


class ConvergenceError(DipoleSimError):
    """Exception raised when an iterative procedure stops before reaching its tolerance."""

    def __init__(self, message: str, residual: float, details: Optional[Dict[str, Any]] = None):
        merged = {"residual": residual}
        merged.update(details or {})
        super().__init__(message, merged)
        self.residual = residual


class StiffnessError(DipoleSimError):
    """Exception raised when the integrator step size underflows."""


class IntegrationError(DipoleSimError):
    """Exception raised when a trajectory breaks density-matrix invariants."""


class NumericError(DipoleSimError):
    """Exception raised when a dense linear-algebra routine fails."""


class UndefinedCorrelationError(DipoleSimError):
    """Exception raised when g2(0) is requested where the intensity vanishes."""


class ConfigError(DipoleSimError):
    """Exception raised for malformed or invalid scenario configuration."""

    def __init__(self, message: str, field: str = "", line: Optional[int] = None, column: Optional[int] = None):
        details: Dict[str, Any] = {"field": field}
        if line is not None:
            details["line"] = line
            details["column"] = column
        super().__init__(message, details)
        self.field = field
        self.line = line
        self.column = column


class UnknownPresetError(ConfigError):
    """Exception raised when a config names a preset that does not exist."""


class DisorderAbortedError(DipoleSimError):
    """Exception raised when too many disorder realizations fail."""
