"""Tests for the Hilbert-module algebra core."""

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wac_lab.algebra import (
    CStarElement,
    ModuleOperator,
    ModuleVector,
    ResidualReport,
    SelfAdjointOperator,
    anticommutator,
    cauchy_schwarz_gap,
    func_calc,
    graded_commutator,
    inner_product,
    inverse,
    is_positive,
    leibniz_residuals,
    operator_norm,
    parse_sign,
    resolvent,
    resolvent_commutator_identities,
    self_adjoint,
)
from wac_lab.clifford import SIGMA_1, SIGMA_2, SIGMA_3
from wac_lab.exceptions import (
    NotSelfAdjointException,
    ParameterException,
    ShapeMismatchException,
    SingularOperatorException,
    SpectrumException,
)

entries = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


def complex_arrays(shape):
    return st.builds(
        lambda re, im: re + 1j * im,
        arrays(np.float64, shape, elements=entries),
        arrays(np.float64, shape, elements=entries),
    )


class TestTypes:
    """Test the value types."""

    def test_element_must_be_square(self):
        """Test that a non-square coefficient is rejected."""
        with pytest.raises(ShapeMismatchException, match="must be square"):
            CStarElement(np.zeros((2, 3)))

    def test_element_is_read_only(self):
        """Test that stored entries cannot be mutated."""
        a = CStarElement(np.eye(2))
        with pytest.raises(ValueError):
            a.entries[0, 0] = 5

    def test_vector_from_flat_array(self):
        """Test that a 1-d array becomes a column vector over C."""
        x = ModuleVector(np.array([1.0, 2.0, 3.0]))
        assert x.k == 1
        assert x.n == 3

    def test_vector_right_action(self):
        """Test the right action of the coefficient algebra."""
        x = ModuleVector(np.eye(4, 2))
        b = np.array([[0, 1], [1, 0]])
        np.testing.assert_allclose(x.act(b).entries, np.eye(4, 2) @ b)

    def test_vector_action_wrong_size(self):
        """Test that a coefficient of the wrong size cannot act."""
        x = ModuleVector(np.eye(4, 2))
        with pytest.raises(ShapeMismatchException):
            x.act(np.eye(3))

    def test_operator_apply(self):
        """Test applying an operator to a module vector."""
        op = ModuleOperator(2 * np.eye(4), k=2)
        x = ModuleVector(np.ones((4, 2)))
        np.testing.assert_allclose((op @ x).entries, 2 * np.ones((4, 2)))

    def test_operator_shape_mismatch(self):
        """Test that operators of different sizes do not compose."""
        with pytest.raises(ShapeMismatchException):
            ModuleOperator(np.eye(2)) @ ModuleOperator(np.eye(3))

    def test_self_adjoint_eigenvalues(self):
        """Test the cached eigendecomposition of sigma_3."""
        d = SelfAdjointOperator(SIGMA_3)
        np.testing.assert_allclose(d.eigenvalues, [-1.0, 1.0])
        assert d.reconstruction_error() < 1e-14

    def test_self_adjoint_rejects_asymmetric(self):
        """Test that a non-hermitian matrix is refused."""
        with pytest.raises(NotSelfAdjointException, match="not self-adjoint"):
            SelfAdjointOperator(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_self_adjoint_symmetrizes_roundoff(self):
        """Test that roundoff-level asymmetry is removed."""
        matrix = SIGMA_1 + 1e-14 * np.array([[0, 1], [0, 0]])
        d = SelfAdjointOperator(matrix)
        np.testing.assert_allclose(d.entries, d.entries.conj().T, atol=0)

    def test_self_adjoint_keeps_k(self):
        """Test that wrapping a module operator keeps its coefficient dimension."""
        op = ModuleOperator(np.eye(4), k=2)
        assert self_adjoint(op).k == 2


class TestInnerProduct:
    """Test the B-valued inner product."""

    def test_standard_basis(self):
        """Test <e1, e1> = 1."""
        e1 = ModuleVector(np.array([[1.0], [0.0]]))
        np.testing.assert_allclose(inner_product(e1, e1).entries, [[1.0]])

    def test_sesquilinear(self):
        """Test <x, y b> = <x, y> b and <x b, y> = b* <x, y>."""
        x = ModuleVector(np.arange(8.0).reshape(4, 2) + 1j)
        y = ModuleVector(np.ones((4, 2)) - 2j)
        b = np.array([[1, 2j], [0, 3]])
        np.testing.assert_allclose(
            inner_product(x, y.act(b)).entries, inner_product(x, y).entries @ b
        )
        np.testing.assert_allclose(
            inner_product(x.act(b), y).entries, b.conj().T @ inner_product(x, y).entries
        )

    def test_different_modules(self):
        """Test that vectors of different modules have no inner product."""
        with pytest.raises(ShapeMismatchException, match="different modules"):
            inner_product(ModuleVector(np.ones((4, 2))), ModuleVector(np.ones((6, 2))))

    @settings(max_examples=50, deadline=None)
    @given(complex_arrays((6, 2)))
    def test_inner_product_is_positive(self, values):
        """Test that <x, x> is positive in M_2(C)."""
        x = ModuleVector(values)
        assert is_positive(inner_product(x, x), tol=1e-10)

    @settings(max_examples=50, deadline=None)
    @given(complex_arrays((6, 2)), complex_arrays((6, 2)))
    def test_cauchy_schwarz(self, left, right):
        """Test <y,x><x,y> <= ||<x,x>|| <y,y>."""
        x, y = ModuleVector(left), ModuleVector(right)
        scale = max(x.norm() ** 2 * y.norm() ** 2, 1.0)
        assert cauchy_schwarz_gap(x, y) >= -1e-10 * scale


class TestPositivity:
    """Test positivity in the coefficient algebra."""

    def test_zero_is_positive(self):
        """Test that the zero element is positive."""
        assert is_positive(np.zeros((2, 2)))

    def test_non_hermitian_is_not_positive(self):
        """Test that a non-hermitian element is not positive."""
        assert not is_positive(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_negative_eigenvalue(self):
        """Test that sigma_3 is not positive."""
        assert not is_positive(SIGMA_3)


class TestFunctionalCalculus:
    """Test func_calc."""

    def test_square(self):
        """Test f(x) = x^2 reproduces the matrix square."""
        d = SelfAdjointOperator(SIGMA_1 + 0.5 * SIGMA_3)
        np.testing.assert_allclose(
            func_calc(d, lambda x: x**2).entries, d.entries @ d.entries, atol=1e-14
        )

    def test_arctan_is_bounded(self):
        """Test that (2/pi) arctan has norm below 1."""
        d = SelfAdjointOperator(np.diag([-100.0, 0.0, 100.0]))
        value = func_calc(d, lambda x: 2 / np.pi * np.arctan(x))
        assert operator_norm(value) < 1.0

    def test_matches_schur_oracle(self, random_hermitian):
        """Test (1 + |A|)^(-1/2) against a Schur-based square root."""
        a = random_hermitian(5)
        value = func_calc(SelfAdjointOperator(a), lambda x: (1 + np.abs(x)) ** -0.5).entries
        modulus = scipy.linalg.sqrtm(a @ a)
        oracle = np.linalg.inv(scipy.linalg.sqrtm(np.eye(5) + modulus))
        assert operator_norm(value - oracle) <= 1e-10 * operator_norm(oracle)

    def test_scalar_only_function(self):
        """Test a function that only accepts Python floats."""
        import math

        d = SelfAdjointOperator(np.diag([1.0, 4.0]))
        value = func_calc(d, math.sqrt)
        np.testing.assert_allclose(np.diag(value.entries).real, [1.0, 2.0])

    def test_undefined_on_spectrum(self):
        """Test that 1/x on a singular operator is rejected."""
        d = SelfAdjointOperator(np.diag([0.0, 1.0]))
        with pytest.raises(SpectrumException, match="undefined"):
            func_calc(d, lambda x: 1 / x)


class TestResolvent:
    """Test resolvent and inverse."""

    def test_resolvent_bound(self):
        """Test ||(A + i t)^-1|| <= 1/t for self-adjoint A."""
        d = SelfAdjointOperator(SIGMA_1 + 2 * SIGMA_3)
        assert resolvent(d, 0.5j).norm() <= 2.0 + 1e-12

    def test_resolvent_matches_inverse(self):
        """Test the eigen-based resolvent against a direct inverse."""
        d = SelfAdjointOperator(SIGMA_1 + 2 * SIGMA_3)
        direct = np.linalg.inv(d.entries + 3j * np.eye(2))
        np.testing.assert_allclose(resolvent(d, 3j).entries, direct, atol=1e-14)

    def test_singular_resolvent(self):
        """Test that lambda in -spectrum is refused."""
        with pytest.raises(SingularOperatorException):
            resolvent(SelfAdjointOperator(SIGMA_3), 1.0)

    def test_singular_inverse(self):
        """Test that a rank-deficient matrix is not inverted."""
        with pytest.raises(SingularOperatorException, match="not boundedly invertible"):
            inverse(np.array([[1.0, 1.0], [1.0, 1.0]]))


class TestCommutators:
    """Test graded commutators."""

    def test_pauli_anticommute(self):
        """Test [sigma_1, sigma_2]_+ = 0."""
        assert graded_commutator(SIGMA_1, SIGMA_2, "+").norm() == 0.0

    def test_pauli_commutator(self):
        """Test [sigma_1, sigma_2]_- = -2i sigma_3 in this sign convention."""
        value = graded_commutator(SIGMA_1, SIGMA_2, "-")
        np.testing.assert_allclose(value.entries, -2j * SIGMA_3)

    def test_anticommutator_shortcut(self):
        """Test that anticommutator returns a plain array."""
        assert isinstance(anticommutator(SIGMA_1, SIGMA_3), np.ndarray)

    def test_unknown_sign(self):
        """Test that an unknown sign is rejected."""
        with pytest.raises(ParameterException, match="Unknown commutator sign"):
            parse_sign("x")

    @settings(max_examples=25, deadline=None)
    @given(complex_arrays((3, 3)), complex_arrays((3, 3)), complex_arrays((3, 3)))
    def test_leibniz_rules(self, a, b, c):
        """Test both Leibniz rules for all four sign pairs."""
        report = leibniz_residuals(a, b, c)
        assert len(report.residuals) == 8
        assert report.passed(1e-12)


class TestIdentityResiduals:
    """Test ResidualReport and the resolvent commutator identities."""

    def test_report_relative(self):
        """Test relative residuals and merging."""
        report = ResidualReport()
        report.add("a", np.eye(2), np.eye(2) * (1 + 1e-3), 10.0)
        other = ResidualReport()
        other.add("b", np.eye(2), np.eye(2), 1.0)
        report.merge(other, "x.")
        assert report.relative("a") == pytest.approx(1e-4)
        assert "x.b" in report.residuals
        assert not report.passed(1e-5)

    @pytest.mark.parametrize("sign", ["+", "-"])
    def test_resolvent_identities(self, sign, random_hermitian):
        """Test the swap and squared-resolvent commutator identities."""
        a, b = random_hermitian(4), random_hermitian(4)
        report = resolvent_commutator_identities(a, b, 2j, sign)
        assert set(report.residuals) == {"swap", "square_commutator", "square_anticommutator"}
        assert report.passed(1e-12)
