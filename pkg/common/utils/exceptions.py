"""
Domain exceptions with error codes.

Every error carries a human-readable message, a machine-readable code,
optional details and the process exit code the CLI reports for it.

Example:
    from common.utils import ParameterRangeError

    def build(alpha: float) -> None:
        if not 0.0 <= alpha <= 1.0:
            raise ParameterRangeError(
                "alpha must lie in [0, 1]", details={"alpha": alpha}
            )
"""

from typing import Any, Dict, Optional


EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_ACCEPTANCE = 2


class EntpercError(Exception):
    """
    Base exception with error code support.

    Provides a consistent error format for the library and the CLI.
    """

    exit_code: int = EXIT_VALIDATION

    def __init__(
        self,
        message: str,
        code: str = "ERROR",
        details: Optional[Any] = None,
    ):
        """
        Create a domain exception.

        Args:
            message: Human-readable error message
            code: Machine-readable error code
            details: Additional error details
        """
        super().__init__(message)
        self.message = message
        self.code = code
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        """Render the error as a plain dictionary."""
        error: Dict[str, Any] = {"message": self.message, "code": self.code}
        if self.details is not None:
            error["details"] = self.details
        return error


class ParameterRangeError(EntpercError, ValueError):
    """A parameter lies outside its documented range."""

    def __init__(
        self,
        message: str = "Parameter out of range",
        code: str = "PARAMETER_OUT_OF_RANGE",
        details: Optional[Any] = None,
    ):
        super().__init__(message, code, details)


class InvalidOperatorError(EntpercError, ValueError):
    """A gate is not unitary or a POVM is not complete."""

    def __init__(
        self,
        message: str = "Invalid operator",
        code: str = "INVALID_OPERATOR",
        details: Optional[Any] = None,
    ):
        super().__init__(message, code, details)


class QubitIndexError(EntpercError, IndexError):
    """Qubit indices are duplicated, empty or out of range."""

    def __init__(
        self,
        message: str = "Bad qubit index",
        code: str = "BAD_QUBIT_INDEX",
        details: Optional[Any] = None,
    ):
        super().__init__(message, code, details)


class ResourceCapError(EntpercError):
    """A state would exceed the oracle's qubit cap."""

    def __init__(
        self,
        message: str = "Qubit cap exceeded",
        code: str = "QUBIT_CAP_EXCEEDED",
        details: Optional[Any] = None,
    ):
        super().__init__(message, code, details)


class WrongQubitCountError(EntpercError, ValueError):
    """An operation defined on a fixed number of qubits got another size."""

    def __init__(
        self,
        message: str = "Wrong qubit count",
        code: str = "WRONG_QUBIT_COUNT",
        details: Optional[Any] = None,
    ):
        super().__init__(message, code, details)


class UnsupportedGeometryError(EntpercError, ValueError):
    """The lattice geometry is not one of the supported kinds."""

    def __init__(
        self,
        message: str = "Unsupported geometry",
        code: str = "UNSUPPORTED_GEOMETRY",
        details: Optional[Any] = None,
    ):
        super().__init__(message, code, details)


class BrokenPathError(EntpercError, ValueError):
    """A swap chain references a missing singlet or an empty path."""

    def __init__(
        self,
        message: str = "Broken path",
        code: str = "BROKEN_PATH",
        details: Optional[Any] = None,
    ):
        super().__init__(message, code, details)


class InconsistentTraceError(EntpercError):
    """A replayed trace hits a recorded outcome of zero probability."""

    def __init__(
        self,
        message: str = "Recorded outcome has zero probability",
        code: str = "INCONSISTENT_TRACE",
        details: Optional[Any] = None,
    ):
        super().__init__(message, code, details)


class ConfigValidationError(EntpercError, ValueError):
    """Experiment configuration or command-line flags were rejected."""

    def __init__(
        self,
        message: str = "Validation error",
        code: str = "VALIDATION_ERROR",
        details: Optional[Any] = None,
        errors: Optional[list] = None,
    ):
        detail_info = details
        if errors:
            detail_info = {"errors": errors, **(details or {})}
        super().__init__(message, code, detail_info)


class OutputPathError(EntpercError, OSError):
    """The output path cannot be written."""

    def __init__(
        self,
        message: str = "Output path is not writable",
        code: str = "UNWRITABLE_OUTPUT",
        details: Optional[Any] = None,
    ):
        super().__init__(message, code, details)


class AcceptanceError(EntpercError):
    """A verification suite exceeded its tolerance."""

    exit_code = EXIT_ACCEPTANCE

    def __init__(
        self,
        message: str = "Acceptance check failed",
        code: str = "ACCEPTANCE_FAILED",
        details: Optional[Any] = None,
    ):
        super().__init__(message, code, details)
