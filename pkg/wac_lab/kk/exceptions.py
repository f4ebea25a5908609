"""Exceptions for the Kasparov product toolkit."""

from ..exceptions import WacLabException


class KKException(WacLabException):
    """Base exception for Kasparov product errors."""

    pass


class TensorProductException(KKException):
    """Raised when the coefficient algebras of an interior tensor product do not match."""

    pass


class LiftException(KKException):
    """Raised when an operator does not descend to the quotient by the Gram null space."""

    pass


class KasparovDataException(KKException):
    """Raised when the data of a Kasparov triple or product is inconsistent."""

    pass
