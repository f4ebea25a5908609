"""Tests for graded modules, Kasparov triples and interior tensor products."""

import numpy as np
import pytest

from wac_lab.clifford import SIGMA_1, SIGMA_3
from wac_lab.exceptions import ShapeMismatchException
from wac_lab.kk import (
    GradedModule,
    KasparovTriple,
    KasparovDataException,
    LiftException,
    TensorProductException,
    interior_tensor,
    isometry_defect,
    lift_graded_t,
    lift_s,
    restrict_representation,
    tensor_embed,
)


@pytest.fixture
def matrix_product():
    """M_2 as a module over itself, tensored with C^2 carrying the standard action."""
    x = GradedModule(dim=2, k=2)
    y = GradedModule(dim=2, k=1, left_k=2)
    return interior_tensor(x, y)


class TestGradedModule:
    """Test GradedModule."""

    def test_trivial_grading(self):
        """Test that the grading defaults to the identity."""
        module = GradedModule(dim=3)
        np.testing.assert_array_equal(module.grading, np.eye(3))
        assert module.degree(np.ones((3, 1))) == 1

    def test_degrees(self):
        """Test even, odd and inhomogeneous elements."""
        module = GradedModule(dim=2, grading=SIGMA_3)
        assert module.degree(np.array([[1.0], [0.0]])) == 1
        assert module.degree(np.array([[0.0], [1.0]])) == -1
        assert module.degree(np.array([[1.0], [1.0]])) is None

    def test_grading_parts(self):
        """Test that even and odd parts add up to the operator."""
        module = GradedModule(dim=2, grading=SIGMA_3)
        op = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_allclose(module.even_part(op), np.diag([1.0, 4.0]))
        np.testing.assert_allclose(module.even_part(op) + module.odd_part(op), op)

    def test_grading_not_unitary(self):
        """Test that a grading must square to the identity."""
        with pytest.raises(KasparovDataException, match="self-adjoint unitary"):
            GradedModule(dim=2, grading=2 * np.eye(2))

    def test_left_action_does_not_fit(self):
        """Test that the left algebra must divide the module dimension."""
        with pytest.raises(TensorProductException, match="does not fit"):
            GradedModule(dim=3, left_k=2)

    def test_grading_breaks_left_action(self):
        """Test that the grading must commute with the left action."""
        with pytest.raises(KasparovDataException, match="commute with the left action"):
            GradedModule(dim=2, left_k=2, grading=SIGMA_3)

    def test_left_action(self):
        """Test phi(b) = b (x) I."""
        module = GradedModule(dim=4, left_k=2)
        np.testing.assert_allclose(module.left_action(SIGMA_1), np.kron(SIGMA_1, np.eye(2)))
        with pytest.raises(ShapeMismatchException):
            module.left_action(np.eye(3))

    def test_inner_product(self):
        """Test <x, y> = x* y and the shape check."""
        module = GradedModule(dim=2, k=2)
        x = np.array([[1.0, 0.0], [0.0, 1j]])
        np.testing.assert_allclose(module.inner(x, x).entries, np.eye(2))
        with pytest.raises(ShapeMismatchException):
            module.inner(x, np.ones((3, 2)))


class TestKasparovTriple:
    """Test KasparovTriple."""

    def test_diagnostics(self):
        """Test oddness and the generator commutator norms."""
        triple = KasparovTriple(
            module=GradedModule(dim=2, grading=SIGMA_3),
            representation={"a": np.diag([1.0, 2.0])},
            D=SIGMA_1,
        )
        report = triple.diagnostics()
        assert report["odd"]
        assert report["commutator_norms"]["a"] == pytest.approx(1.0)
        assert report["compact_resolvent"] == "vacuous"

    def test_even_operator_refused(self):
        """Test that D must be odd for the grading."""
        with pytest.raises(KasparovDataException, match="not odd"):
            KasparovTriple(GradedModule(dim=2, grading=SIGMA_3), {}, SIGMA_3)

    def test_wrong_dimension(self):
        """Test that D must act on the module."""
        with pytest.raises(KasparovDataException, match="does not act on the module"):
            KasparovTriple(GradedModule(dim=2), {}, np.eye(3))


class TestInteriorTensor:
    """Test the balanced tensor product."""

    def test_matrix_algebra_over_itself(self, matrix_product):
        """Test M_2 (x)_(M_2) C^2 = C^2."""
        assert matrix_product.module.dim == 2
        assert matrix_product.gram_rank == 2
        assert matrix_product.algebraic_dim == 8

    def test_rank_with_multiplicity(self):
        """Test the quotient rank when the left action has multiplicity 2."""
        x = GradedModule(dim=4, k=2, grading=np.diag([1.0, 1.0, -1.0, -1.0]))
        y = GradedModule(dim=4, k=1, left_k=2)
        product = interior_tensor(x, y)
        assert product.module.dim == 8
        values = np.linalg.eigvalsh(product.module.grading)
        np.testing.assert_allclose(np.sort(values), [-1.0] * 4 + [1.0] * 4, atol=1e-10)

    def test_mismatched_algebras(self):
        """Test that the coefficient algebra of X must act on Y."""
        with pytest.raises(TensorProductException, match="does not act on Y"):
            interior_tensor(GradedModule(dim=2, k=2), GradedModule(dim=3))

    def test_isometry(self, matrix_product, rng):
        """Test <x (x) y, x' (x) y'> = <y, phi(<x, x'>) y'>."""
        xs = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(3)]
        ys = [rng.standard_normal((2, 1)) for _ in range(3)]
        assert isometry_defect(matrix_product, xs, ys) < 1e-12

    def test_embed_checks_shapes(self, matrix_product):
        """Test that elements must belong to X and Y."""
        with pytest.raises(ShapeMismatchException, match="x is not in X"):
            tensor_embed(matrix_product, np.ones((3, 2)), np.ones((2, 1)))
        with pytest.raises(ShapeMismatchException, match="y is not in Y"):
            tensor_embed(matrix_product, np.eye(2), np.ones((3, 1)))

    def test_balanced(self, matrix_product):
        """Test x b (x) y = x (x) phi(b) y."""
        x = np.array([[1.0, 2.0], [0.0, 1.0]])
        y = np.array([[1.0], [-1.0]])
        b = np.array([[0.0, 1.0], [1.0, 1.0]])
        left = tensor_embed(matrix_product, x @ b, y).entries
        right = tensor_embed(matrix_product, x, matrix_product.y.left_action(b) @ y).entries
        np.testing.assert_allclose(left, right, atol=1e-12)


class TestLifts:
    """Test lifting operators to E."""

    def test_lift_identity(self, matrix_product):
        """Test that 1 (x) 1 lifts to the identity."""
        np.testing.assert_allclose(lift_s(np.eye(2), matrix_product).entries, np.eye(2), atol=1e-12)

    def test_graded_t_must_commute_with_action(self, matrix_product):
        """Test that T_Y has to commute with the left action."""
        with pytest.raises(LiftException, match="commute with the left action"):
            lift_graded_t(SIGMA_3, matrix_product)

    def test_graded_t_scalar(self, matrix_product):
        """Test gamma_X (x) c I with a trivial grading on X."""
        lifted = lift_graded_t(3 * np.eye(2), matrix_product)
        np.testing.assert_allclose(lifted.entries, 3 * np.eye(2), atol=1e-12)

    def test_lift_s_shape(self, matrix_product):
        """Test that S_X must act on X."""
        with pytest.raises(ShapeMismatchException):
            lift_s(np.eye(3), matrix_product)

    def test_restrict_representation(self, matrix_product):
        """Test lifting named left actions."""
        lifted = restrict_representation(matrix_product, {"one": np.eye(2)})
        np.testing.assert_allclose(lifted["one"], np.eye(2), atol=1e-12)

    def test_induce_shape(self, matrix_product):
        """Test that induced operators must act on the algebraic space."""
        with pytest.raises(ShapeMismatchException):
            matrix_product.induce(np.eye(3))
