"""Tests for sectorial profiles and the contour-integral approximant."""

import math

import numpy as np
import pytest

from wac_lab.algebra import operator_norm
from wac_lab.clifford import SIGMA_3
from wac_lab.dunford import (
    build_contour,
    dunford_p_lambda,
    dunford_residual,
    dunford_sweep,
    keyhole_contour,
    normalizing_b,
    residue_p_lambda,
    spectral_angle,
    winding_number,
)
from wac_lab.exceptions import ParameterException, QuadratureException


class TestSpectralAngle:
    """Test the sampled spectral angle."""

    def test_positive_operator(self):
        """Test that a positive diagonal operator has an angle within two grid steps of 0."""
        grid = (math.pi / 4, math.pi / 2, 3 * math.pi / 4)
        profile = spectral_angle(np.diag([1.0, 2.0, 3.0]), grid)
        assert profile.exact_angle == 0.0
        assert profile.spectral_angle <= profile.exact_angle + 2 * profile.resolution
        assert profile.sector_constant(math.pi / 2) == pytest.approx(1.0, rel=1e-6)

    def test_sector_constant_obtuse(self):
        """Test M_theta = 1 / sin(theta) for theta > pi / 2 on a positive operator."""
        profile = spectral_angle(np.diag([1.0, 2.0]), (math.pi / 2, 3 * math.pi / 4))
        assert profile.sector_constant(3 * math.pi / 4) == pytest.approx(math.sqrt(2), rel=1e-3)

    def test_bad_grid(self):
        """Test that angles outside (0, pi) are refused."""
        with pytest.raises(ParameterException, match="theta grid"):
            spectral_angle(np.eye(2), (0.0, 1.0))

    def test_to_dict(self):
        """Test the serialized profile."""
        data = spectral_angle(np.diag([1.0, 4.0]), (math.pi / 2,)).to_dict()
        assert set(data) == {"angles", "spectral_angle", "exact_angle", "resolution"}


class TestContour:
    """Test the keyhole contour."""

    def test_node_count(self):
        """Test that the node budget is used exactly."""
        assert len(keyhole_contour(0.5, math.pi / 4, 100.0, 402)) == 402

    def test_winding_numbers(self):
        """Test that the contour encloses (0, r_max) and excludes the negative axis."""
        contour = keyhole_contour(0.5, math.pi / 4, 100.0, 400)
        assert winding_number(contour, 5.0) == pytest.approx(1.0, abs=1e-8)
        assert winding_number(contour, 0.1) == pytest.approx(1.0, abs=1e-8)
        assert winding_number(contour, -5.0) == pytest.approx(0.0, abs=1e-8)

    def test_too_few_nodes(self):
        """Test that a budget below 16 nodes is refused."""
        with pytest.raises(QuadratureException, match="Node budget too small"):
            keyhole_contour(0.5, math.pi / 4, 100.0, 8)

    def test_invalid_geometry(self):
        """Test that r >= r_max is refused."""
        with pytest.raises(QuadratureException, match="Invalid contour geometry"):
            keyhole_contour(10.0, math.pi / 4, 1.0, 64)

    def test_build_contour_radii(self, generated):
        """Test r = min(lambda^2 / 2, 1) and the outer radius."""
        S, T = generated
        contour = build_contour(S, T, 0.5)
        assert contour.r == pytest.approx(0.125)
        expected = 4 * (operator_norm(S) ** 2 + operator_norm(T) ** 2 + 0.25) + 10
        assert contour.r_max == pytest.approx(expected)


class TestApproximant:
    """Test P_lambda and R_lambda."""

    def test_quadrature_matches_residues(self, generated):
        """Test the contour value of P_lambda against its residue value."""
        S, T = generated
        quadrature = dunford_p_lambda(S, T, 10.0).entries
        residue = residue_p_lambda(S, T, 10.0).entries
        assert operator_norm(quadrature - residue) <= 1e-8 * operator_norm(residue)

    def test_exact_for_anticommuting_pair(self, anticommuting):
        """Test that P_lambda is the resolvent when [S, T]_+ = 0."""
        S, T = anticommuting
        p = residue_p_lambda(S, T, 3.0).entries
        direct = np.linalg.inv(S.entries + T.entries + 3j * np.eye(S.dim))
        np.testing.assert_allclose(p, direct, atol=1e-12)

    def test_residual_small_for_anticommuting_pair(self, anticommuting):
        """Test ||R_lambda|| ~ 0 and a vanishing corrected error."""
        S, T = anticommuting
        result = dunford_residual(S, T, 10.0)
        assert result.r_norm < 1e-6
        assert result.corrected_error is not None
        assert result.corrected_error < 1e-6

    def test_refinement_converges(self, generated):
        """Test that each doubling of the node count shrinks the change at least fourfold."""
        S, T = generated
        result = dunford_residual(S, T, 10.0, node_count=64)
        assert result.refinement_change >= 4 * result.refinement_next
        assert result.refinement_converges()

    @pytest.mark.parametrize("lam", [10.0, 100.0])
    def test_refinement_within_tolerance(self, lam, generated):
        """Test that the refinement change at 400 nodes is within the quadrature tolerance."""
        S, T = generated
        result = dunford_residual(S, T, lam)
        assert result.nodes == 400
        assert result.refinement_change <= 1e-6
        assert result.refinement_converges()

    def test_commuting_pair_is_not_exact(self):
        """Test R_lambda = 2 S T / (lambda^2 + 2) for S = sigma_3 (x) I and T = I (x) sigma_3."""
        S = np.kron(SIGMA_3, np.eye(2))
        T = np.kron(np.eye(2), SIGMA_3)
        result = dunford_residual(S, T, 10.0)
        np.testing.assert_allclose(result.residual, 2 * S @ T / 102.0, atol=1e-6)

    def test_non_positive_lambda(self, pauli):
        """Test that lambda <= 0 is refused."""
        S, T = pauli
        with pytest.raises(ParameterException, match="real and positive"):
            dunford_p_lambda(S, T, -1.0)

    def test_sweep(self, anticommuting):
        """Test the sweep table and its threshold."""
        S, T = anticommuting
        sweep = dunford_sweep(S, T, (10.0, 100.0), node_count=200)
        assert sweep.threshold == 10.0
        assert len(sweep.to_csv_rows()) == 2
        assert sweep.to_dict()["columns"][0] == "lambda"


class TestNormalizingB:
    """Test the bounded transform."""

    def test_values_in_open_interval(self):
        """Test that D (1 + D^2)^-1/2 has spectrum in (-1, 1)."""
        b = normalizing_b(np.diag([-100.0, 0.0, 3.0]))
        values = np.diag(b.entries).real
        assert np.all(np.abs(values) < 1.0)
        assert values[1] == 0.0
        assert values[2] == pytest.approx(3 / math.sqrt(10))
