"""Tests for square sums, the interpolation family and iterated sums."""

import numpy as np
import pytest

from wac_lab.algebra import operator_norm
from wac_lab.certifier import WacCertificate, anticommutator_of, certify_wac
from wac_lab.exceptions import CertificateException, ParameterException
from wac_lab.generators import anticommuting_triple
from wac_lab.square_sum import (
    interpolation_family,
    interpolation_grid,
    interpolation_operator,
    kato_rellich_margin,
    p0_norm,
    pencil_constant,
    square_graph_constant,
    square_sum_check,
    sum_of_three_report,
    triple_certify,
)


def _pairwise(ops):
    return {
        (a, b): certify_wac(ops[a - 1], ops[b - 1], "+", lambda_grid=())
        for a, b in ((1, 2), (1, 3), (2, 3))
    }


class TestSquareSum:
    """Test square_sum_check."""

    def test_pauli_pair(self, pauli):
        """Test S^2 + T^2 = 2 I and K = 0 for the Pauli pair."""
        S, T = pauli
        report = square_sum_check(S, T, certify_wac(S, T, "+"))
        assert report.passed
        assert report.measured_constant == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(report.spectrum, [2.0, 2.0])

    def test_generated_pair(self, generated):
        """Test the expansion identity and the certified chain on a generated pair."""
        S, T = generated
        report = square_sum_check(S, T, certify_wac(S, T, "+"))
        assert report.passed
        assert report.measured_constant <= report.chain_constant * (1 + 1e-9)
        assert report.square_graph_constant >= 1.0

    def test_requires_anticommuting_certificate(self, pauli):
        """Test that a missing or commuting certificate is refused."""
        S, T = pauli
        with pytest.raises(CertificateException, match="anticommuting certificate"):
            square_sum_check(S, T, None)
        with pytest.raises(CertificateException):
            square_sum_check(S, T, WacCertificate(0.0, 0.0, 0.0, sign="-"))

    def test_pencil_constant_identity(self):
        """Test that equal forms have constant 1."""
        assert pencil_constant(np.eye(3), np.eye(3)) == pytest.approx(1.0)

    def test_pencil_constant_scaled(self):
        """Test that 4 I against I has constant 4."""
        assert pencil_constant(4 * np.eye(2), np.eye(2)) == pytest.approx(4.0)

    def test_square_graph_constant_anticommuting(self, anticommuting):
        """Test that (S+T)^2 = S^2 + T^2 makes the square graph norms equal."""
        S, T = anticommuting
        assert square_graph_constant(S, T) == pytest.approx(1.0)


class TestInterpolation:
    """Test the family P_z."""

    def test_real_part_outside_strip(self, generated):
        """Test that Re z outside [0, 1] is refused."""
        S, T = generated
        with pytest.raises(ParameterException, match=r"Re z must lie in \[0, 1\]"):
            interpolation_operator(S, T, 1.5)

    def test_exact_pair_vanishes(self, anticommuting):
        """Test that P_z = 0 when K = 0."""
        S, T = anticommuting
        point = interpolation_family(S, T, 0.5)
        assert point.norm == 0.0
        assert point.ratio == 0.0

    @pytest.mark.parametrize("y", [-5.0, 0.0, 3.0])
    def test_boundary_lines(self, y, generated):
        """Test that ||P_z|| equals ||P_0|| on both boundary lines."""
        S, T = generated
        assert interpolation_family(S, T, complex(0.0, y)).ratio == pytest.approx(1.0, rel=1e-9)
        assert interpolation_family(S, T, complex(1.0, y)).ratio == pytest.approx(1.0, rel=1e-9)

    def test_interior_bounded_by_boundary(self, generated):
        """Test ||P_z|| <= ||P_0|| on the interior of the strip."""
        S, T = generated
        points = interpolation_grid(S, T, (0.25, 0.5, 0.75), (-1.0, 0.0, 1.0))
        assert len(points) == 9
        assert all(point.ratio <= 1.0 + 1e-9 for point in points)

    def test_p0_norm(self, generated):
        """Test ||P_0|| = ||K (1 + |D|)^-1||."""
        S, T = generated
        s, t = S.entries, T.entries
        k = anticommutator_of(s, t, "+")
        values, vectors = np.linalg.eigh(s + t)
        weight = vectors @ np.diag(1.0 / (1.0 + np.abs(values))) @ vectors.conj().T
        assert p0_norm(S, T) == pytest.approx(operator_norm(k @ weight), rel=1e-10)


class TestRelativeBound:
    """Test kato_rellich_margin."""

    def test_curve(self, generated):
        """Test monotonicity in epsilon and that no sample violates the certified bound."""
        S, T = generated
        curve = kato_rellich_margin(S, T, samples=200, seed=3)
        assert curve.is_monotone()
        assert curve.falsification <= 1e-8
        for _, certified, sampled in curve.samples:
            assert sampled <= certified + 1e-8

    def test_exact_pair(self, anticommuting):
        """Test C_eps = 0 for K = 0."""
        S, T = anticommuting
        curve = kato_rellich_margin(S, T, epsilon_grid=(0.1, 1.0), samples=10)
        assert [row[1] for row in curve.to_csv_rows()] == [0.0, 0.0]

    def test_non_positive_epsilon(self, generated):
        """Test that epsilon <= 0 is refused."""
        S, T = generated
        with pytest.raises(ParameterException, match="epsilon must be positive"):
            kato_rellich_margin(S, T, epsilon_grid=(0.0,))


class TestTriples:
    """Test certificate propagation to (S1 + S2, S3)."""

    def test_exact_triple(self):
        """Test that an anticommuting triple propagates zero constants."""
        ops = anticommuting_triple(2)
        result = triple_certify(*ops, _pairwise(ops))
        assert result.certificate.constants == (0.0, 0.0, 0.0)
        assert result.verification.passed
        assert result.graph_constant == pytest.approx(1.0)

    def test_perturbed_triple(self):
        """Test that propagated constants verify on a perturbed triple."""
        s1, s2, s3 = anticommuting_triple(2)
        s3 = s3.entries + 0.1 * np.eye(4)
        ops = (s1, s2, s3)
        result = triple_certify(*ops, _pairwise(ops))
        assert result.verification.passed
        assert result.direct is not None
        assert sum(result.direct.constants) <= sum(result.certificate.constants) * (1 + 1e-9)

    def test_missing_pair(self):
        """Test that all three pairwise certificates are required."""
        ops = anticommuting_triple(2)
        pairwise = _pairwise(ops)
        del pairwise[(2, 3)]
        with pytest.raises(CertificateException, match="Missing pairwise"):
            triple_certify(*ops, pairwise, compare_direct=False)

    def test_sum_of_three(self):
        """Test the sum of an anticommuting triple."""
        report = sum_of_three_report(*anticommuting_triple(2))
        assert report.hermitian_defect == 0.0
        assert report.graph_constant == pytest.approx(1.0)
