"""JSON codecs for matrices and operators."""

from abc import ABC, abstractmethod
from typing import Any, Dict, Type

import numpy as np

from .algebra import CStarElement, ModuleOperator, ModuleVector, SelfAdjointOperator, as_array
from .exceptions import CodecException


class Codec(ABC):
    """Abstract base class for JSON codecs."""

    @abstractmethod
    def to_json(self, value: Any) -> Dict[str, Any]:
        """
        Convert a value to a JSON-compatible dict.

        Args:
            value: Value to encode

        Returns:
            JSON-compatible dict
        """
        pass

    @abstractmethod
    def from_json(self, data: Dict[str, Any]) -> Any:
        """
        Rebuild a value from its JSON dict.

        Args:
            data: Decoded JSON object

        Returns:
            The value
        """
        pass


class MatrixCodec(Codec):
    """Codec for dense complex matrices: {"rows", "cols", "re", "im"} in row-major order."""

    def to_json(self, value: Any) -> Dict[str, Any]:
        matrix = as_array(value)
        if matrix.ndim != 2:
            raise CodecException("Only matrices can be encoded", {"ndim": matrix.ndim})
        rows, cols = matrix.shape
        return {
            "rows": int(rows),
            "cols": int(cols),
            "re": [float(v) for v in matrix.real.ravel()],
            "im": [float(v) for v in matrix.imag.ravel()],
        }

    def from_json(self, data: Dict[str, Any]) -> np.ndarray:
        try:
            rows, cols = int(data["rows"]), int(data["cols"])
            re = np.asarray(data["re"], dtype=float)
            im = np.asarray(data.get("im", [0.0] * (rows * cols)), dtype=float)
        except (KeyError, TypeError, ValueError) as e:
            raise CodecException("Malformed matrix object", {"error": str(e)}) from e
        if re.size != rows * cols or im.size != rows * cols:
            raise CodecException(
                "Entry count does not match shape",
                {"rows": rows, "cols": cols, "entries": int(re.size)},
            )
        return (re + 1j * im).reshape(rows, cols)


class ElementCodec(MatrixCodec):
    def from_json(self, data: Dict[str, Any]) -> CStarElement:
        return CStarElement(super().from_json(data))


class VectorCodec(MatrixCodec):
    def from_json(self, data: Dict[str, Any]) -> ModuleVector:
        return ModuleVector(super().from_json(data))


class OperatorCodec(MatrixCodec):
    """Codec for module operators; the coefficient dimension travels as "k"."""

    def to_json(self, value: Any) -> Dict[str, Any]:
        data = super().to_json(value)
        data["k"] = int(getattr(value, "k", 1))
        return data

    def from_json(self, data: Dict[str, Any]) -> ModuleOperator:
        return ModuleOperator(super().from_json(data), int(data.get("k", 1)))


class SelfAdjointCodec(OperatorCodec):
    def from_json(self, data: Dict[str, Any]) -> SelfAdjointOperator:
        op = super().from_json(data)
        return SelfAdjointOperator(op.entries, op.k)


class CodecRegistry:
    """Registry of codecs by value type."""

    def __init__(self) -> None:
        self._codecs: Dict[Type, Codec] = {}
        self._register_defaults()

    def _register_defaults(self) -> None:
        """Register default codecs."""
        self._codecs[np.ndarray] = MatrixCodec()
        self._codecs[CStarElement] = ElementCodec()
        self._codecs[ModuleVector] = VectorCodec()
        self._codecs[ModuleOperator] = OperatorCodec()
        self._codecs[SelfAdjointOperator] = SelfAdjointCodec()

    def register(self, value_type: Type, codec: Codec) -> None:
        """
        Register a codec.

        Args:
            value_type: Type the codec handles
            codec: Codec instance
        """
        self._codecs[value_type] = codec

    def get_codec(self, value_type: Type) -> Codec:
        """
        Get the codec for a type, walking the MRO.

        Raises:
            CodecException: If no codec handles the type
        """
        for klass in getattr(value_type, "__mro__", (value_type,)):
            if klass in self._codecs:
                return self._codecs[klass]
        name = getattr(value_type, "__name__", value_type)
        raise CodecException("No codec registered", {"type": name})

    def encode(self, value: Any) -> Dict[str, Any]:
        return self.get_codec(type(value)).to_json(value)

    def decode(self, data: Dict[str, Any], value_type: Type = np.ndarray) -> Any:
        return self.get_codec(value_type).from_json(data)


# Global codec registry instance
_codec_registry = CodecRegistry()


def register_codec(value_type: Type, codec: Codec) -> None:
    """
    Register a custom codec globally.

    Args:
        value_type: Type to register the codec for
        codec: Codec instance
    """
    _codec_registry.register(value_type, codec)


def get_codec_registry() -> CodecRegistry:
    """Get the global codec registry instance."""
    return _codec_registry


def encode_matrix(value: Any) -> Dict[str, Any]:
    """Encode any matrix-like value with the global registry."""
    if isinstance(value, (CStarElement, ModuleVector, ModuleOperator)):
        return _codec_registry.encode(value)
    return _codec_registry.encode(np.asarray(value, dtype=complex))


def decode_matrix(data: Dict[str, Any], value_type: Type = np.ndarray) -> Any:
    """Decode a matrix object into the requested type."""
    return _codec_registry.decode(data, value_type)
