"""Tests for weak (anti)commutation certificates."""

import math

import numpy as np
import pytest

from wac_lab.algebra import min_eigenvalue, operator_norm
from wac_lab.certifier import (
    CertificateObjective,
    WacCertificate,
    certificate_matrix,
    certify_wac,
    commuting_smallness,
    estimate_lambda0,
    form_norm_gap,
    graph_norm_constant,
    instance_hash,
    legacy_wac_check,
    norm_estimate_constant,
    relative_gap,
    verify_certificate,
)
from wac_lab.clifford import SIGMA_1, SIGMA_3
from wac_lab.exceptions import CertificateException, ParameterException
from wac_lab.generators import GeneratorSpec, gen_pair, unbounded_anticommutator_pair


class TestCertificateObjective:
    """Test objective validation."""

    def test_unknown_mode(self):
        """Test that an unknown mode is rejected."""
        with pytest.raises(ValueError, match="Objective mode must be one of"):
            CertificateObjective(mode="greedy")

    def test_non_positive_weight(self):
        """Test that weights must be positive."""
        with pytest.raises(ValueError, match="three positive finite"):
            CertificateObjective(weights=(1.0, 0.0, 1.0))

    def test_describe(self):
        """Test the textual description stored in certificates."""
        assert CertificateObjective().describe() == "weighted(w0=1, w1=1, w2=1)"


class TestWacCertificate:
    """Test the certificate value object."""

    def test_negative_constant(self):
        """Test that negative constants are rejected."""
        with pytest.raises(ValueError, match="must be finite and >= 0"):
            WacCertificate(c0=-1.0, c1=0.0, c2=0.0, sign="+")

    def test_sign_normalized(self):
        """Test that signs are stored by name."""
        assert WacCertificate(0.0, 0.0, 0.0, sign="-").sign == "commuting"

    def test_dict_round_trip(self):
        """Test to_dict/from_dict."""
        cert = WacCertificate(1.0, 2.0, 3.0, sign="+", lambda0=10.0, instance_hash="abc")
        restored = WacCertificate.from_dict(cert.to_dict())
        assert restored.constants == (1.0, 2.0, 3.0)
        assert restored.lambda0 == 10.0
        assert restored.instance_hash == "abc"

    def test_malformed_dict(self):
        """Test that a dict without constants is rejected."""
        with pytest.raises(CertificateException, match="Malformed certificate"):
            WacCertificate.from_dict({"c0": 1.0, "sign": "+"})


class TestCertifyWac:
    """Test certify_wac."""

    def test_pauli_pair_is_exact(self, pauli):
        """Test that the Pauli pair needs no constants."""
        S, T = pauli
        cert = certify_wac(S, T, "+")
        assert cert.constants == (0.0, 0.0, 0.0)
        assert abs(cert.slack) <= 1e-12
        assert cert.sign == "anticommuting"

    def test_perturbed_pair_cost(self, perturbed):
        """Test that K*K = 0.01 I costs exactly 0.01 in the weighted objective."""
        S, T = perturbed
        cert = certify_wac(S, T, "+")
        assert sum(cert.constants) == pytest.approx(0.01, rel=1e-6)
        assert cert.slack >= -1e-12

    def test_c0_only(self, perturbed):
        """Test the C1 = C2 = 0 objective."""
        S, T = perturbed
        cert = certify_wac(S, T, "+", CertificateObjective(mode="c0_only"))
        assert cert.c1 == 0.0 and cert.c2 == 0.0
        assert cert.c0 == pytest.approx(0.01, rel=1e-9)

    def test_legacy_mode(self, generated):
        """Test that the legacy objective keeps C2 = 0 and stays feasible."""
        S, T = generated
        cert = certify_wac(S, T, "+", CertificateObjective(mode="legacy"))
        assert cert.c2 == 0.0
        assert verify_certificate(S, T, cert).passed

    def test_tied_mode(self, generated):
        """Test that the tied objective keeps C1 = C2."""
        S, T = generated
        cert = certify_wac(S, T, "+", CertificateObjective(mode="tied"))
        assert cert.c1 == cert.c2

    def test_generated_certificate_is_feasible(self, generated):
        """Test that an emitted certificate has nonnegative slack up to roundoff."""
        S, T = generated
        cert = certify_wac(S, T, "+")
        matrix = certificate_matrix(S, T, "+", *cert.constants)
        assert min_eigenvalue(matrix) >= -1e-10 * cert.scale

    def test_commuting_pair(self):
        """Test certifying a commuting pair under the commutator sign."""
        S = np.diag([1.0, 2.0])
        T = np.diag([3.0, -1.0])
        assert certify_wac(S, T, "-").constants == (0.0, 0.0, 0.0)

    def test_dimension_mismatch(self):
        """Test that operators on different modules are rejected."""
        with pytest.raises(ParameterException, match="different modules"):
            certify_wac(np.eye(2), np.eye(3))

    def test_instance_hash(self, pauli):
        """Test that the hash is deterministic and depends on the sign."""
        S, T = pauli
        assert instance_hash(S, T, "+") == instance_hash(S, T, "+")
        assert instance_hash(S, T, "+") != instance_hash(S, T, "-")


class TestLambda0:
    """Test the lambda0 estimate and derived norm constants."""

    def test_exact_pair(self, pauli):
        """Test that an exact pair qualifies from the smallest grid value."""
        S, T = pauli
        assert estimate_lambda0(S, T, "+", (1.0, 10.0, 100.0)) == 1.0

    def test_empty_grid(self, pauli):
        """Test that an empty grid gives no threshold."""
        S, T = pauli
        assert estimate_lambda0(S, T, "+", ()) is None

    def test_norm_estimate_constant(self):
        """Test C = sqrt(max(C0/|lambda|^2, C1, C2))."""
        cert = WacCertificate(100.0, 0.5, 0.25, sign="+")
        assert norm_estimate_constant(cert, 10j) == pytest.approx(1.0)
        assert norm_estimate_constant(cert, 100j) == pytest.approx(math.sqrt(0.5))

    def test_norm_estimate_zero_lambda(self):
        """Test that lambda = 0 is rejected."""
        with pytest.raises(ParameterException, match="nonzero"):
            norm_estimate_constant(WacCertificate(0.0, 0.0, 0.0, sign="+"), 0)


class TestVerifyCertificate:
    """Test certificate re-verification."""

    def test_verification_passes(self, generated):
        """Test that a fresh certificate verifies."""
        S, T = generated
        cert = certify_wac(S, T, "+")
        result = verify_certificate(S, T, cert)
        assert result.passed
        assert result.measured_constant <= result.norm_constant * (1 + 1e-9)
        assert result.measured_form_constant <= result.form_constant * (1 + 1e-9)

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("mode", ["legacy", "c0_only", "tied"])
    def test_feasible_region_is_convex(self, seed, mode):
        """Test that the midpoint of two feasible triples is feasible."""
        S, T = gen_pair(GeneratorSpec(n=4, anticommutator_target=0.5, seed=seed))
        first = certify_wac(S, T, "+", lambda_grid=())
        second = certify_wac(S, T, "+", CertificateObjective(mode=mode), lambda_grid=())
        assert verify_certificate(S, T, first).passed
        assert verify_certificate(S, T, second).passed
        middle = [(a + b) / 2 for a, b in zip(first.constants, second.constants)]
        assert verify_certificate(S, T, WacCertificate(*middle, sign="+")).passed

    def test_infeasible_certificate(self, perturbed):
        """Test that a too-small certificate fails verification."""
        S, T = perturbed
        result = verify_certificate(S, T, WacCertificate(0.001, 0.0, 0.0, sign="+"))
        assert not result.passed
        assert "✗" in str(result)

    def test_form_norm_gap(self, generated):
        """Test that the measured form constant never exceeds the certified one."""
        S, T = generated
        certified, measured = form_norm_gap(S, T, certify_wac(S, T, "+"))
        assert measured <= certified * (1 + 1e-9)


class TestGraphNorms:
    """Test graph-norm and perturbation quantities."""

    def test_zero_partner(self):
        """Test that T = 0 gives constant 1."""
        report = graph_norm_constant(SIGMA_3, np.zeros((2, 2)))
        assert report.constant == pytest.approx(1.0)

    def test_pauli_pair(self, pauli):
        """Test that (S+T)^2 = S^2 + T^2 for an anticommuting pair."""
        S, T = pauli
        report = graph_norm_constant(S, T)
        assert report.constant == pytest.approx(1.0)
        assert report.easy_slack >= -1e-12

    def test_slacks_nonnegative(self, generated):
        """Test both pencil inequalities with the computed constant."""
        S, T = generated
        report = graph_norm_constant(S, T)
        assert report.upper_slack >= -1e-8 * report.scale
        assert report.lower_slack >= -1e-8 * report.scale
        assert report.easy_slack >= -1e-8 * report.scale

    def test_relative_gap_identical(self):
        """Test that equal operators have zero gap."""
        report = relative_gap(np.eye(2) + SIGMA_1 / 2, np.eye(2) + SIGMA_1 / 2)
        assert report.epsilon == pytest.approx(0.0, abs=1e-7)
        assert report.holds is True

    def test_relative_gap_small_perturbation(self):
        """Test the 2 eps / (1 - eps) bound for a small perturbation."""
        a = np.diag([1.0, 2.0]) + 0j
        report = relative_gap(a, a + 0.01 * SIGMA_1)
        assert report.bound is not None
        assert report.holds


class TestCommutingSmallness:
    """Test the weakly commuting smallness check."""

    def test_requires_commuting_certificate(self, pauli):
        """Test that an anticommuting certificate is refused."""
        S, T = pauli
        with pytest.raises(CertificateException, match="not certified weakly commuting"):
            commuting_smallness(S, T, 10j, 10j, certify_wac(S, T, "+"))

    def test_bound_holds(self):
        """Test both products against C (1/|lambda| + 1/|mu|) on a weakly commuting pair."""
        S = np.diag([1.0, 2.0, 3.0]) + 0j
        T = np.diag([0.5, -1.0, 2.0]) + 0.1 * np.ones((3, 3))
        cert = certify_wac(S, T, "-")
        report = commuting_smallness(S, T, 10j, 20j, cert)
        assert report.holds
        assert report.swap_corrected_holds
        assert max(report.observed_ts, report.observed_st) <= report.predicted

    @pytest.mark.parametrize("seed", range(10))
    def test_bound_on_generated_pairs(self, seed):
        """Test the bound once |lambda| exceeds ||S|| + ||T|| on seeded pairs."""
        S, T = gen_pair(GeneratorSpec(n=4, anticommutator_target=0.5, seed=seed))
        scale = operator_norm(S) + operator_norm(T) + 1.0
        report = commuting_smallness(S, T, 1j * scale, 2j * scale, certify_wac(S, T, "-"))
        assert report.holds
        assert max(report.observed_ts, report.observed_st) <= report.predicted


class TestLegacyCheck:
    """Test the comparison with the uniform-boundedness notion."""

    def test_exact_pair(self, pauli):
        """Test that an exact pair is trivially legacy."""
        S, T = pauli
        report = legacy_wac_check(S, T)
        assert report.sup_norm == 0.0
        assert report.legacy_holds

    def test_anticommutator_growing_with_t(self):
        """Test a pair whose anticommutator is proportional to T."""
        S, T = unbounded_anticommutator_pair(10.0)
        report = legacy_wac_check(S, T, lambda_grid=(1.0, 10.0, 100.0))
        assert report.sup_norm > 0.0
        assert report.legacy_constants[1] == pytest.approx(report.sup_norm**2)

    def test_empty_grid(self, pauli):
        """Test that an empty grid is rejected."""
        S, T = pauli
        with pytest.raises(ParameterException, match="nonempty"):
            legacy_wac_check(S, T, lambda_grid=())

