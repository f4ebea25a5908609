"""Custom exceptions for wac-lab."""

from typing import Any, Optional


class WacLabException(Exception):
    """Base exception for all wac-lab exceptions.

    Attributes:
        message: The error message
        details: Additional context about the error
    """

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        self.message = message
        self.details = details or {}
        super().__init__(self._format_message())

    def _format_message(self) -> str:
        """Format the error message with details."""
        if self.details:
            detail_str = ", ".join(f"{k}={v}" for k, v in self.details.items())
            return f"{self.message} ({detail_str})"
        return self.message


class ShapeMismatchException(WacLabException):
    """Raised when operand shapes are incompatible.

    Example:
        >>> raise ShapeMismatchException(
        ...     "Cannot form inner product",
        ...     left=(6, 2), right=(4, 2)
        ... )
    """

    def __init__(
        self,
        message: str = "Shape mismatch",
        left: Optional[tuple] = None,
        right: Optional[tuple] = None,
        **kwargs: Any,
    ):
        details = {"left": left, "right": right, **kwargs}
        details = {k: v for k, v in details.items() if v is not None}
        super().__init__(message, details)


class NotSelfAdjointException(WacLabException):
    """Raised when an operator claimed to be self-adjoint is not, beyond tolerance.

    Example:
        >>> raise NotSelfAdjointException(
        ...     "Operator is not self-adjoint",
        ...     {"asymmetry": 0.3, "tol": 1e-10}
        ... )
    """

    pass


class SingularOperatorException(WacLabException):
    """Raised when a required inverse does not exist.

    Example:
        >>> raise SingularOperatorException(
        ...     "A + lambda is singular",
        ...     parameter=2j, sigma_min=0.0
        ... )
    """

    def __init__(
        self,
        message: str = "Operator is singular",
        parameter: Optional[Any] = None,
        sigma_min: Optional[float] = None,
        **kwargs: Any,
    ):
        details = {"parameter": parameter, "sigma_min": sigma_min, **kwargs}
        details = {k: v for k, v in details.items() if v is not None}
        super().__init__(message, details)


class SpectrumException(WacLabException):
    """Raised when a scalar function is undefined on the spectrum of an operator.

    Example:
        >>> raise SpectrumException(
        ...     "Function returned a non-finite value",
        ...     {"eigenvalue": 0.0}
        ... )
    """

    pass


class CertificateException(WacLabException):
    """Raised when a certificate is missing, malformed or does not match a pair.

    Example:
        >>> raise CertificateException(
        ...     "Pair is not certified weakly commuting",
        ...     {"sign": "anticommuting"}
        ... )
    """

    pass


class ParameterException(WacLabException):
    """Raised when a numerical parameter is outside its admissible range.

    Example:
        >>> raise ParameterException(
        ...     "Resolvent parameter must be nonzero",
        ...     {"lambda": 0}
        ... )
    """

    pass


class QuadratureException(WacLabException):
    """Raised when a contour or quadrature rule cannot be built or evaluated.

    Example:
        >>> raise QuadratureException(
        ...     "Node budget too small",
        ...     {"node_count": 8, "minimum": 16}
        ... )
    """

    pass


class GenerationException(WacLabException):
    """Raised when a generator recipe cannot be realized.

    Example:
        >>> raise GenerationException(
        ...     "Anticommutator target not achievable",
        ...     {"target": 1.0, "k": 1, "n": 2}
        ... )
    """

    pass


class ConfigurationException(WacLabException):
    """Raised when an experiment configuration is invalid.

    Example:
        >>> raise ConfigurationException(
        ...     "Unknown suite",
        ...     {"suite": "nonsense", "valid_values": ["certify", "identities"]}
        ... )
    """

    pass


class ReportIOException(WacLabException):
    """Raised when reading or writing report and matrix files fails.

    Example:
        >>> raise ReportIOException(
        ...     "Cannot write report",
        ...     {"path": "/read-only/report.json"}
        ... )
    """

    pass


class CodecException(WacLabException):
    """Raised when a serialized matrix or certificate is malformed.

    Example:
        >>> raise CodecException(
        ...     "Entry count does not match shape",
        ...     {"rows": 2, "cols": 2, "entries": 3}
        ... )
    """

    pass
