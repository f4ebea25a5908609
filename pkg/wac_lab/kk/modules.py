"""Graded Hilbert modules, Kasparov triples and interior tensor products.

A finite Hilbert module over M_k(C) is realized as N x k matrices with inner product
<x, y> = x* y, and its adjointable operators as N x N matrices. A left action of M_m is the
amplification b -> b (x) I_(N/m).

The interior tensor product X (x)_B Y is built from the algebraic space X (x)_C C^(N_Y) with the
Hermitian form <x (x) u, x' (x) u'> = u* phi(<x, x'>) u'. The null space of its Gram matrix is
quotiented through an eigendecomposition, and the surviving eigenvectors give an isometric
embedding J of the algebraic space onto C^r, so E = M_(r, l) when Y is a module over M_l.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
import scipy.linalg

from ..algebra import (
    CStarElement,
    ModuleVector,
    SelfAdjointOperator,
    as_array,
    graded_commutator,
    norm_scale,
    operator_norm,
    self_adjoint,
)
from ..exceptions import ShapeMismatchException
from .exceptions import KasparovDataException, LiftException, TensorProductException

logger = logging.getLogger(__name__)

GRADING_TOL = 1e-12
"""Tolerance for gamma = gamma* and gamma^2 = I."""

GRAM_CUTOFF = 1e-10
"""Gram eigenvalues below this multiple of the largest one are quotiented."""

LIFT_TOL = 1e-9
"""Relative defect J L - L_E J above which a lift is refused."""

ODD_TOL = 1e-10


@dataclass(eq=False)
class GradedModule:
    """
    Finite Hilbert M_k-module with a grading and a left action of M_m.

    Example:
        >>> y = GradedModule(dim=2, k=1, grading=np.diag([1.0, -1.0]))
        >>> y.degree(np.array([[1.0], [0.0]]))
        1
    """

    dim: int
    """Row count N of module elements."""

    k: int = 1
    """Coefficient dimension; the module is a right M_k-module."""

    grading: Optional[np.ndarray] = None
    """Self-adjoint unitary gamma; the identity (trivial grading) when omitted."""

    left_k: int = 1
    """Dimension m of the matrix algebra acting from the left."""

    def __post_init__(self) -> None:
        if self.dim <= 0 or self.k <= 0 or self.left_k <= 0:
            raise ValueError("Module dimensions must be > 0")
        if self.dim % self.left_k:
            raise TensorProductException(
                "Left action does not fit the module", {"dim": self.dim, "left_k": self.left_k}
            )
        gamma = np.eye(self.dim, dtype=complex) if self.grading is None else as_array(self.grading)
        if gamma.shape != (self.dim, self.dim):
            raise ShapeMismatchException("Grading has the wrong shape", left=gamma.shape)
        identity = np.eye(self.dim)
        asymmetry = operator_norm(gamma - gamma.conj().T)
        involution = operator_norm(gamma @ gamma - identity)
        if asymmetry > GRADING_TOL or involution > GRADING_TOL:
            raise KasparovDataException(
                "Grading must be a self-adjoint unitary",
                {"asymmetry": asymmetry, "involution": involution},
            )
        self.grading = (gamma + gamma.conj().T) / 2
        for i in range(self.left_k):
            for j in range(self.left_k):
                unit = np.zeros((self.left_k, self.left_k))
                unit[i, j] = 1.0
                image = self.left_action(unit)
                if operator_norm(self.grading @ image - image @ self.grading) > GRADING_TOL:
                    raise KasparovDataException("Grading does not commute with the left action")

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.dim, self.k)

    @property
    def multiplicity(self) -> int:
        return self.dim // self.left_k

    def left_action(self, b: Any) -> np.ndarray:
        """phi(b) = b (x) I for b in M_m."""
        coefficient = as_array(b)
        if coefficient.shape != (self.left_k, self.left_k):
            raise ShapeMismatchException(
                "Element does not act on this module",
                left=coefficient.shape,
                right=(self.left_k, self.left_k),
            )
        return np.kron(coefficient, np.eye(self.multiplicity))

    def even_part(self, op: Any) -> np.ndarray:
        matrix = as_array(op)
        return (matrix + self.grading @ matrix @ self.grading) / 2

    def odd_part(self, op: Any) -> np.ndarray:
        matrix = as_array(op)
        return (matrix - self.grading @ matrix @ self.grading) / 2

    def degree(self, x: Any, tol: float = GRADING_TOL) -> Optional[int]:
        """+1 or -1 for homogeneous elements, None otherwise."""
        entries = as_array(x)
        scale = max(operator_norm(entries), 1e-300)
        graded = self.grading @ entries
        if operator_norm(graded - entries) <= tol * scale:
            return 1
        if operator_norm(graded + entries) <= tol * scale:
            return -1
        return None

    def inner(self, x: Any, y: Any) -> CStarElement:
        left, right = as_array(x), as_array(y)
        if left.shape != (self.dim, self.k) or right.shape != (self.dim, self.k):
            raise ShapeMismatchException(
                "Vectors do not belong to this module", left=left.shape, right=right.shape
            )
        return CStarElement(left.conj().T @ right)


@dataclass(eq=False)
class KasparovTriple:
    """Graded module with named algebra generators and an odd self-adjoint operator D."""

    module: GradedModule
    representation: Dict[str, np.ndarray]
    D: SelfAdjointOperator

    def __post_init__(self) -> None:
        self.D = self_adjoint(self.D)
        if self.D.dim != self.module.dim:
            raise KasparovDataException(
                "D does not act on the module", {"D": self.D.dim, "module": self.module.dim}
            )
        for name, a in self.representation.items():
            if as_array(a).shape != (self.module.dim, self.module.dim):
                raise KasparovDataException(
                    "Generator does not act on the module", {"generator": name}
                )
        residual = self.oddness_residual()
        if residual > ODD_TOL * norm_scale(self.D):
            raise KasparovDataException("D is not odd for the grading", {"residual": residual})

    def oddness_residual(self) -> float:
        gamma = self.module.grading
        return operator_norm(gamma @ self.D.entries + self.D.entries @ gamma)

    def diagnostics(self, tol: float = 1e-12) -> Dict[str, Any]:
        """
        Oddness of D, graded commutator norms of the generators and compactness flags.

        The compactness conditions hold automatically in finite dimension and are reported
        as vacuous.
        """
        scale = norm_scale(self.D)
        commutators = {}
        for name, a in self.representation.items():
            a = as_array(a)
            # generators are even, so the graded commutator is the plain commutator
            even = self.module.even_part(a)
            commutators[name] = graded_commutator(self.D, even, -1).norm()
        residual = self.oddness_residual()
        return {
            "oddness_residual": residual,
            "odd": residual <= tol * scale,
            "commutator_norms": commutators,
            "compact_resolvent": "vacuous",
            "locally_compact": "vacuous",
        }


@dataclass(eq=False)
class TensorProduct:
    """E = X (x)_B Y with the embedding of the algebraic tensor space."""

    x: GradedModule
    y: GradedModule
    module: GradedModule
    embedding: np.ndarray = field(repr=False)
    """J: r x (N_X k N_Y), with J* J the Gram matrix."""

    gram_rank: int = 0

    @property
    def algebraic_dim(self) -> int:
        return self.x.dim * self.x.k * self.y.dim

    def _coinverse(self) -> np.ndarray:
        # J has orthogonal rows, so J* (J J*)^-1 is a right inverse
        rows = self.embedding @ self.embedding.conj().T
        return self.embedding.conj().T @ np.diag(1.0 / np.real(np.diag(rows)))

    def induce(self, algebraic: np.ndarray, tol: float = LIFT_TOL) -> np.ndarray:
        """
        Operator on E induced by an operator on the algebraic tensor space.

        Raises:
            LiftException: If the operator does not preserve the Gram null space
        """
        matrix = as_array(algebraic)
        if matrix.shape != (self.algebraic_dim, self.algebraic_dim):
            raise ShapeMismatchException(
                "Operator does not act on the algebraic tensor space",
                left=matrix.shape,
                right=(self.algebraic_dim, self.algebraic_dim),
            )
        induced = self.embedding @ matrix @ self._coinverse()
        defect = operator_norm(self.embedding @ matrix - induced @ self.embedding)
        scale = operator_norm(matrix) * operator_norm(self.embedding)
        if defect > tol * max(scale, 1.0):
            raise LiftException(
                "Operator does not descend to the tensor product", {"defect": defect}
            )
        return induced

    def embed(self, x: Any, y: Any) -> ModuleVector:
        """Coordinates of x (x) y in E (an r x l matrix)."""
        left, right = as_array(x), as_array(y)
        if left.shape != self.x.shape:
            raise ShapeMismatchException("x is not in X", left=left.shape, right=self.x.shape)
        if right.ndim == 1:
            right = right.reshape(-1, 1)
        if right.shape != self.y.shape:
            raise ShapeMismatchException("y is not in Y", left=right.shape, right=self.y.shape)
        algebraic = np.kron(left.reshape(-1, 1), right)
        return ModuleVector(self.embedding @ algebraic)

    def embedding_from(self, x: Any) -> np.ndarray:
        """Matrix of y -> x (x) y from C^(N_Y) to C^r."""
        left = as_array(x)
        if left.shape != self.x.shape:
            raise ShapeMismatchException("x is not in X", left=left.shape, right=self.x.shape)
        return self.embedding @ np.kron(left.reshape(-1, 1), np.eye(self.y.dim))


def _gram(x: GradedModule, y: GradedModule) -> np.ndarray:
    """G[(i, j, a), (i', j', b)] = delta_(i i') phi(E_(j j'))_(a b)."""
    k, n_y = x.k, y.dim
    block = np.zeros((k * n_y, k * n_y), dtype=complex)
    for j in range(k):
        for jj in range(k):
            unit = np.zeros((k, k))
            unit[j, jj] = 1.0
            block[j * n_y : (j + 1) * n_y, jj * n_y : (jj + 1) * n_y] = y.left_action(unit)
    return np.kron(np.eye(x.dim), block)


def interior_tensor(x: GradedModule, y: GradedModule) -> TensorProduct:
    """
    Balanced tensor product X (x)_B Y with grading gamma_X (x) gamma_Y.

    Args:
        x: Right M_k-module
        y: Module with a left action of M_k

    Returns:
        TensorProduct holding E, its embedding and the Gram rank

    Raises:
        TensorProductException: If the coefficient algebra of X does not act on Y

    Example:
        >>> b = GradedModule(dim=2, k=2)
        >>> y = GradedModule(dim=2, k=1, left_k=2)
        >>> interior_tensor(b, y).module.dim
        2
    """
    if x.k != y.left_k:
        raise TensorProductException(
            "Coefficient algebra of X does not act on Y", {"x_k": x.k, "y_left_k": y.left_k}
        )
    gram = _gram(x, y)
    values, vectors = scipy.linalg.eigh(gram)
    cutoff = GRAM_CUTOFF * max(float(values[-1]), 0.0)
    keep = values > cutoff
    rank = int(np.count_nonzero(keep))
    if rank == 0:
        raise TensorProductException("Interior tensor product is zero")
    embedding = np.sqrt(values[keep])[:, None] * vectors[:, keep].conj().T
    algebraic_grading = np.kron(np.kron(x.grading, np.eye(x.k)), y.grading)
    product = TensorProduct(
        x=x,
        y=y,
        module=GradedModule(dim=rank, k=y.k),
        embedding=embedding,
        gram_rank=rank,
    )
    grading = product.induce(algebraic_grading)
    product.module = GradedModule(dim=rank, k=y.k, grading=(grading + grading.conj().T) / 2)
    logger.debug(
        "interior tensor: algebraic dim %d, rank %d", product.algebraic_dim, product.gram_rank
    )
    return product


def lift_s(s_x: Any, product: TensorProduct) -> SelfAdjointOperator:
    """
    S = S_X (x) 1 on E.

    Raises:
        LiftException: If S_X is not B-linear enough to descend to the quotient
    """
    s = as_array(s_x)
    if s.shape != (product.x.dim, product.x.dim):
        raise ShapeMismatchException("S_X does not act on X", left=s.shape)
    algebraic = np.kron(np.kron(s, np.eye(product.x.k)), np.eye(product.y.dim))
    induced = product.induce(algebraic)
    return SelfAdjointOperator((induced + induced.conj().T) / 2, product.module.k)


def lift_graded_t(t_y: Any, product: TensorProduct) -> SelfAdjointOperator:
    """
    gamma_X (x) T_Y on E.

    Only defined when T_Y commutes with the left action on Y.

    Raises:
        LiftException: If T_Y does not commute with the left action
    """
    t = as_array(t_y)
    if t.shape != (product.y.dim, product.y.dim):
        raise ShapeMismatchException("T_Y does not act on Y", left=t.shape)
    scale = max(operator_norm(t), 1.0)
    for i in range(product.y.left_k):
        for j in range(product.y.left_k):
            unit = np.zeros((product.y.left_k, product.y.left_k))
            unit[i, j] = 1.0
            image = product.y.left_action(unit)
            if operator_norm(t @ image - image @ t) > LIFT_TOL * scale:
                raise LiftException("T_Y does not commute with the left action")
    algebraic = np.kron(np.kron(product.x.grading, np.eye(product.x.k)), t)
    induced = product.induce(algebraic)
    return SelfAdjointOperator((induced + induced.conj().T) / 2, product.module.k)


def tensor_embed(product: TensorProduct, x: Any, y: Any) -> ModuleVector:
    return product.embed(x, y)


def isometry_defect(product: TensorProduct, xs: List[Any], ys: List[Any]) -> float:
    """max ||<x (x) y, x' (x) y'> - <y, phi(<x, x'>) y'>|| over the given pairs."""
    worst = 0.0
    pairs = list(zip(xs, ys))
    for x1, y1 in pairs:
        for x2, y2 in pairs:
            left = product.embed(x1, y1).entries
            right = product.embed(x2, y2).entries
            y1a = as_array(y1).reshape(product.y.dim, -1)
            y2a = as_array(y2).reshape(product.y.dim, -1)
            coefficient = as_array(x1).conj().T @ as_array(x2)
            expected = y1a.conj().T @ product.y.left_action(coefficient) @ y2a
            worst = max(worst, operator_norm(left.conj().T @ right - expected))
    return worst


def restrict_representation(
    product: TensorProduct, generators: Mapping[str, Any]
) -> Dict[str, np.ndarray]:
    """Lift left actions a (x) 1 of operators on X to E."""
    lifted = {}
    for name, a in generators.items():
        matrix = as_array(a)
        algebraic = np.kron(np.kron(matrix, np.eye(product.x.k)), np.eye(product.y.dim))
        lifted[name] = product.induce(algebraic)
    return lifted
