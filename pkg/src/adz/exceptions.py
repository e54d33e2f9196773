"""
Custom exceptions for the adz numerical library and experiment driver
"""

from typing import Optional, Any, Dict


class ADZError(Exception):
    """Base exception for adz errors"""

    exit_code: int = 1

    def __init__(
        self,
        message: str,
        details: Optional[Dict[str, Any]] = None
    ):
        """
        Initialize the base adz error.

        Args:
            message: Error message
            details: Structured context (offending parameters, field paths, estimates)
        """
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ConfigError(ADZError):
    """Raised when an experiment config fails schema validation"""

    exit_code = 2

    def __init__(
        self,
        message: str = "Invalid configuration",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)


class NumericalToleranceError(ADZError):
    """Raised when a declared self-check exceeds its tolerance"""

    exit_code = 3

    def __init__(
        self,
        message: str = "Numerical tolerance exceeded",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)


class IntegrationError(NumericalToleranceError):
    """Raised when a truncated or tail integral does not converge"""

    def __init__(
        self,
        message: str = "Integral did not converge",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)


class EnvelopeError(NumericalToleranceError):
    """Raised when a sampling or integrability envelope is violated"""

    def __init__(
        self,
        message: str = "Envelope violated",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)


class InfeasibleError(ADZError):
    """Base class for violated mathematical preconditions"""

    exit_code = 4

    def __init__(
        self,
        message: str = "Infeasible precondition",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)


class PoleError(InfeasibleError):
    """Raised when the gamma function is evaluated at a pole"""

    def __init__(
        self,
        message: str = "Gamma function evaluated at a pole",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)


class ScheduleError(InfeasibleError):
    """Raised when a series truncation cannot meet its tail tolerance"""

    def __init__(
        self,
        message: str = "Truncation schedule infeasible",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)


class ZeroNormError(InfeasibleError):
    """Raised when a feature density has zero mass"""

    def __init__(
        self,
        message: str = "Profile has zero L1 norm",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)


class InfeasibleSampleCountError(InfeasibleError):
    """Raised when the sample count is below the concentration-bound threshold"""

    def __init__(
        self,
        message: str = "Sample count below 4*lambda*(b/eps)^2",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)


class UnsupportedCaseError(InfeasibleError):
    """Raised for parameter combinations the library deliberately does not cover"""

    def __init__(
        self,
        message: str = "Unsupported case",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)
