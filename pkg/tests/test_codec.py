"""Tests for matrix and operator codecs."""

import numpy as np
import pytest

from wac_lab.algebra import CStarElement, ModuleOperator, SelfAdjointOperator
from wac_lab.codec import (
    Codec,
    CodecRegistry,
    MatrixCodec,
    decode_matrix,
    encode_matrix,
    get_codec_registry,
    register_codec,
)
from wac_lab.clifford import SIGMA_2
from wac_lab.exceptions import CodecException


class TestMatrixCodec:
    """Test the dense matrix codec."""

    def test_row_major_layout(self):
        """Test that entries are stored row-major with separate real and imaginary parts."""
        data = MatrixCodec().to_json(np.array([[1, 2j], [3, 4 - 1j]]))
        assert data == {
            "rows": 2,
            "cols": 2,
            "re": [1.0, 0.0, 3.0, 4.0],
            "im": [0.0, 2.0, 0.0, -1.0],
        }

    def test_missing_imaginary_part(self):
        """Test that a real-only object decodes with zero imaginary part."""
        value = MatrixCodec().from_json({"rows": 1, "cols": 2, "re": [1.0, 2.0]})
        np.testing.assert_array_equal(value, np.array([[1.0, 2.0]], dtype=complex))

    def test_wrong_entry_count(self):
        """Test that a shape/entry mismatch is rejected."""
        with pytest.raises(CodecException, match="Entry count"):
            MatrixCodec().from_json({"rows": 2, "cols": 2, "re": [1.0], "im": [0.0]})

    def test_missing_key(self):
        """Test that a missing shape key is rejected."""
        with pytest.raises(CodecException, match="Malformed"):
            MatrixCodec().from_json({"re": [1.0]})

    def test_vector_input_rejected(self):
        """Test that only two-dimensional arrays are encoded."""
        with pytest.raises(CodecException, match="Only matrices"):
            MatrixCodec().to_json(np.ones(3))


class TestOperatorCodecs:
    """Test the typed codecs."""

    def test_operator_keeps_k(self):
        """Test that the coefficient dimension travels with an operator."""
        op = ModuleOperator(np.eye(4), k=2)
        data = encode_matrix(op)
        assert data["k"] == 2
        assert decode_matrix(data, ModuleOperator).k == 2

    def test_self_adjoint_decoding(self):
        """Test decoding into a self-adjoint operator."""
        data = encode_matrix(SelfAdjointOperator(SIGMA_2))
        decoded = decode_matrix(data, SelfAdjointOperator)
        assert isinstance(decoded, SelfAdjointOperator)
        np.testing.assert_allclose(decoded.eigenvalues, [-1.0, 1.0])

    def test_element_decoding(self):
        """Test decoding a coefficient-algebra element."""
        decoded = decode_matrix(encode_matrix(CStarElement(np.eye(2))), CStarElement)
        assert decoded.k == 2


class TestCodecRegistry:
    """Test the codec registry."""

    def test_global_registry(self):
        """Test that the global registry is a singleton."""
        assert get_codec_registry() is get_codec_registry()

    def test_unknown_type(self):
        """Test that an unregistered type has no codec."""
        with pytest.raises(CodecException, match="No codec registered"):
            CodecRegistry().get_codec(dict)

    def test_mro_lookup(self):
        """Test that subclasses fall back to their parent's codec."""

        class Tagged(ModuleOperator):
            pass

        assert isinstance(CodecRegistry().get_codec(Tagged), Codec)

    def test_register_custom_codec(self):
        """Test registering a codec for a new type."""

        class Diagonal:
            def __init__(self, values):
                self.values = values

        class DiagonalCodec(Codec):
            def to_json(self, value):
                return {"diagonal": list(value.values)}

            def from_json(self, data):
                return Diagonal(data["diagonal"])

        register_codec(Diagonal, DiagonalCodec())
        assert get_codec_registry().encode(Diagonal([1, 2])) == {"diagonal": [1, 2]}
