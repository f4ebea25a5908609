"""Finite-dimensional C*-algebra and Hilbert-module calculus.

The coefficient algebra is B = M_k(C). The standard module E = B^n is realized as
(n*k) x k complex matrices and adjointable operators on E as (n*k) x (n*k) matrices, so
every module statement becomes a dense matrix statement. Positivity in B is
positive-semidefiniteness, and form estimates on E are operator inequalities.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np
import scipy.linalg
from typing_extensions import Literal, TypeAlias

from .exceptions import (
    NotSelfAdjointException,
    ParameterException,
    ShapeMismatchException,
    SingularOperatorException,
    SpectrumException,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
"""Relative tolerance for positivity and self-adjointness checks."""

SINGULAR_RTOL = 1e-14
"""Relative smallest-singular-value cutoff below which an inverse is refused."""

SignLike: TypeAlias = Union[int, str]
Sign: TypeAlias = Literal[1, -1]


def parse_sign(sign: SignLike) -> Sign:
    """
    Normalize a commutator sign.

    Accepts +1/-1, "+"/"-", and the names "anticommuting"/"commuting".

    Args:
        sign: Sign in any accepted spelling

    Returns:
        +1 for the anticommutator, -1 for the commutator

    Raises:
        ParameterException: If the sign is not recognized
    """
    if sign in (1, "+", "anticommuting", "plus"):
        return 1
    if sign in (-1, "-", "commuting", "minus"):
        return -1
    raise ParameterException("Unknown commutator sign", {"sign": sign})


def sign_name(sign: SignLike) -> str:
    """Return "anticommuting" or "commuting" for a sign."""
    return "anticommuting" if parse_sign(sign) == 1 else "commuting"


def as_array(value: Any) -> np.ndarray:
    """Return the complex matrix behind an element, vector, operator or array."""
    if isinstance(value, (CStarElement, ModuleVector, ModuleOperator)):
        return value.entries
    return np.asarray(value, dtype=complex)


def operator_norm(value: Any) -> float:
    """Spectral (operator 2-) norm."""
    matrix = as_array(value)
    if matrix.size == 0:
        return 0.0
    return float(np.linalg.norm(matrix, 2))


def hermitian_part(value: Any) -> np.ndarray:
    """Return (a + a*) / 2."""
    matrix = as_array(value)
    return (matrix + matrix.conj().T) / 2


def min_eigenvalue(value: Any) -> float:
    """Smallest eigenvalue of the hermitian part."""
    return float(scipy.linalg.eigvalsh(hermitian_part(value))[0])


def max_eigenvalue(value: Any) -> float:
    """Largest eigenvalue of the hermitian part."""
    return float(scipy.linalg.eigvalsh(hermitian_part(value))[-1])


def _readonly(matrix: np.ndarray) -> np.ndarray:
    matrix = np.array(matrix, dtype=complex, copy=True)
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, eq=False)
class CStarElement:
    """
    Element of the coefficient algebra B = M_k(C).

    Example:
        >>> a = CStarElement(np.eye(2))
        >>> is_positive(a)
        True
    """

    entries: np.ndarray
    """k x k complex matrix."""

    def __post_init__(self) -> None:
        matrix = np.asarray(self.entries, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ShapeMismatchException("C*-element must be square", left=matrix.shape)
        object.__setattr__(self, "entries", _readonly(matrix))

    @property
    def k(self) -> int:
        """Dimension of the matrix algebra."""
        return int(self.entries.shape[0])

    def adjoint(self) -> "CStarElement":
        return CStarElement(self.entries.conj().T)

    def norm(self) -> float:
        return operator_norm(self.entries)

    def __matmul__(self, other: "CStarElement") -> "CStarElement":
        return CStarElement(self.entries @ as_array(other))

    def __add__(self, other: "CStarElement") -> "CStarElement":
        return CStarElement(self.entries + as_array(other))

    def __sub__(self, other: "CStarElement") -> "CStarElement":
        return CStarElement(self.entries - as_array(other))

    def __mul__(self, scalar: complex) -> "CStarElement":
        return CStarElement(self.entries * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class ModuleVector:
    """
    Element of a finite Hilbert module over M_k(C).

    For the standard module B^n the entries are (n*k) x k; modules produced by an
    interior tensor product may have a row count that is not a multiple of k.
    """

    entries: np.ndarray
    """rows x k complex matrix."""

    def __post_init__(self) -> None:
        matrix = np.asarray(self.entries, dtype=complex)
        if matrix.ndim == 1:
            matrix = matrix.reshape(-1, 1)
        if matrix.ndim != 2:
            raise ShapeMismatchException("Module vector must be a matrix", left=matrix.shape)
        object.__setattr__(self, "entries", _readonly(matrix))

    @property
    def rows(self) -> int:
        return int(self.entries.shape[0])

    @property
    def k(self) -> int:
        """Coefficient dimension."""
        return int(self.entries.shape[1])

    @property
    def n(self) -> int:
        """Module rank when the module is standard (rows divisible by k)."""
        if self.rows % self.k:
            raise ShapeMismatchException(
                "Module is not a standard module B^n", left=self.entries.shape
            )
        return self.rows // self.k

    def act(self, b: Any) -> "ModuleVector":
        """Right action x . b of the coefficient algebra."""
        coefficient = as_array(b)
        if coefficient.shape != (self.k, self.k):
            raise ShapeMismatchException(
                "Coefficient does not act on this module",
                left=self.entries.shape,
                right=coefficient.shape,
            )
        return ModuleVector(self.entries @ coefficient)

    def norm(self) -> float:
        """Module norm ||<x,x>||^(1/2), equal to the spectral norm of the entries."""
        return operator_norm(self.entries)

    def __add__(self, other: "ModuleVector") -> "ModuleVector":
        return ModuleVector(self.entries + as_array(other))

    def __sub__(self, other: "ModuleVector") -> "ModuleVector":
        return ModuleVector(self.entries - as_array(other))

    def __mul__(self, scalar: complex) -> "ModuleVector":
        return ModuleVector(self.entries * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class ModuleOperator:
    """
    Adjointable operator on a finite Hilbert module.

    Left multiplication commutes with the right coefficient action, so every square
    matrix of the right size is an adjointable module map.
    """

    entries: np.ndarray
    """rows x rows complex matrix."""

    k: int = 1
    """Coefficient dimension of the module the operator acts on."""

    __array_ufunc__ = None

    def __post_init__(self) -> None:
        matrix = np.asarray(self.entries, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ShapeMismatchException("Module operator must be square", left=matrix.shape)
        if self.k <= 0:
            raise ValueError("Coefficient dimension must be > 0")
        object.__setattr__(self, "entries", _readonly(matrix))

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @property
    def shape(self) -> Tuple[int, int]:
        """Module shape as (rows, k)."""
        return self.dim, self.k

    def adjoint(self) -> "ModuleOperator":
        return ModuleOperator(self.entries.conj().T, self.k)

    def norm(self) -> float:
        return operator_norm(self.entries)

    def apply(self, x: ModuleVector) -> ModuleVector:
        """Apply the operator to a module vector."""
        _check_same_rows(self.entries, x.entries, "Operator does not act on vector")
        return ModuleVector(self.entries @ x.entries)

    def __matmul__(self, other: Any) -> Any:
        if isinstance(other, ModuleVector):
            return self.apply(other)
        right = as_array(other)
        _check_square_pair(self.entries, right)
        return ModuleOperator(self.entries @ right, self.k)

    def __rmatmul__(self, other: Any) -> "ModuleOperator":
        left = as_array(other)
        _check_square_pair(left, self.entries)
        return ModuleOperator(left @ self.entries, self.k)

    def __add__(self, other: Any) -> "ModuleOperator":
        right = as_array(other)
        _check_square_pair(self.entries, right)
        return ModuleOperator(self.entries + right, self.k)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "ModuleOperator":
        right = as_array(other)
        _check_square_pair(self.entries, right)
        return ModuleOperator(self.entries - right, self.k)

    def __neg__(self) -> "ModuleOperator":
        return ModuleOperator(-self.entries, self.k)

    def __mul__(self, scalar: complex) -> "ModuleOperator":
        return ModuleOperator(self.entries * scalar, self.k)

    __rmul__ = __mul__

    def shifted(self, shift: complex) -> "ModuleOperator":
        """Return A + shift * I."""
        return ModuleOperator(self.entries + shift * np.eye(self.dim), self.k)


@dataclass(frozen=True, eq=False)
class SelfAdjointOperator(ModuleOperator):
    """
    Self-adjoint operator with a cached eigendecomposition.

    Inputs within tol * ||A|| of self-adjoint are symmetrized before the eigensolve;
    larger asymmetry raises NotSelfAdjointException.

    Example:
        >>> d = SelfAdjointOperator(np.diag([1.0, -1.0]))
        >>> d.eigenvalues
        array([-1.,  1.])
    """

    tol: float = DEFAULT_TOL
    """Relative self-adjointness tolerance."""

    eigenvalues: np.ndarray = field(init=False, repr=False)
    """Real eigenvalues in ascending order."""

    eigenvectors: np.ndarray = field(init=False, repr=False)
    """Unitary matrix whose columns are eigenvectors."""

    def __post_init__(self) -> None:
        super().__post_init__()
        matrix = self.entries
        scale = operator_norm(matrix)
        asymmetry = operator_norm(matrix - matrix.conj().T)
        if asymmetry > self.tol * max(scale, 1e-300) and asymmetry > 0:
            raise NotSelfAdjointException(
                "Operator is not self-adjoint", {"asymmetry": asymmetry, "tol": self.tol}
            )
        hermitian = hermitian_part(matrix)
        values, vectors = scipy.linalg.eigh(hermitian)
        object.__setattr__(self, "entries", _readonly(hermitian))
        values = np.array(values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "eigenvalues", values)
        object.__setattr__(self, "eigenvectors", _readonly(vectors))

    @classmethod
    def from_operator(cls, op: Any, tol: float = DEFAULT_TOL) -> "SelfAdjointOperator":
        """Wrap an operator or array, keeping its coefficient dimension."""
        if isinstance(op, SelfAdjointOperator):
            return op
        k = op.k if isinstance(op, ModuleOperator) else 1
        return cls(as_array(op), k, tol)

    def norm(self) -> float:
        if self.eigenvalues.size == 0:
            return 0.0
        return float(np.max(np.abs(self.eigenvalues)))

    def reconstruction_error(self) -> float:
        """||U diag(d) U* - A||, expected below tol * ||A||."""
        u = self.eigenvectors
        return operator_norm(u @ np.diag(self.eigenvalues) @ u.conj().T - self.entries)

    def scaled(self, factor: float) -> "SelfAdjointOperator":
        return SelfAdjointOperator(self.entries * factor, self.k, self.tol)

    def squared(self) -> "SelfAdjointOperator":
        return SelfAdjointOperator(self.entries @ self.entries, self.k, self.tol)


OperatorLike = Union[ModuleOperator, np.ndarray]


def self_adjoint(value: Any, tol: float = DEFAULT_TOL) -> SelfAdjointOperator:
    """Coerce an operator or array to a SelfAdjointOperator."""
    return SelfAdjointOperator.from_operator(value, tol)


def _check_same_rows(left: np.ndarray, right: np.ndarray, message: str) -> None:
    if left.shape[1] != right.shape[0]:
        raise ShapeMismatchException(message, left=left.shape, right=right.shape)


def _check_square_pair(left: np.ndarray, right: np.ndarray) -> None:
    if left.shape != right.shape:
        raise ShapeMismatchException("Operator shapes disagree", left=left.shape, right=right.shape)


def identity_like(value: Any) -> np.ndarray:
    return np.eye(as_array(value).shape[0], dtype=complex)


def inverse(value: Any, parameter: Optional[Any] = None) -> np.ndarray:
    """
    Invert a square matrix, refusing numerically singular input.

    Args:
        value: Operator or array
        parameter: Resolvent parameter reported on failure

    Returns:
        The inverse as an array

    Raises:
        SingularOperatorException: If sigma_min <= 1e-14 * sigma_max
    """
    matrix = as_array(value)
    singular_values = scipy.linalg.svdvals(matrix)
    sigma_max = float(singular_values[0]) if singular_values.size else 0.0
    sigma_min = float(singular_values[-1]) if singular_values.size else 0.0
    if sigma_min <= SINGULAR_RTOL * max(sigma_max, 1.0):
        raise SingularOperatorException(
            "Operator is not boundedly invertible", parameter=parameter, sigma_min=sigma_min
        )
    return scipy.linalg.inv(matrix)


# ---------------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------------


def inner_product(x: ModuleVector, y: ModuleVector) -> CStarElement:
    """
    B-valued inner product <x, y> = x* y.

    Args:
        x: Left vector (conjugate-linear slot)
        y: Right vector

    Returns:
        The k x k coefficient <x, y>

    Raises:
        ShapeMismatchException: If the vectors live in different modules

    Example:
        >>> e1 = ModuleVector(np.array([[1.0], [0.0]]))
        >>> inner_product(e1, e1).entries
        array([[1.+0.j]])
    """
    if x.entries.shape != y.entries.shape:
        raise ShapeMismatchException(
            "Vectors belong to different modules", left=x.entries.shape, right=y.entries.shape
        )
    return CStarElement(x.entries.conj().T @ y.entries)


def is_positive(a: Any, tol: float = DEFAULT_TOL) -> bool:
    """
    Decide positivity in the C*-algebra.

    True iff ||a - a*|| <= tol * ||a|| and the hermitian part has
    lambda_min >= -tol * ||a||. The zero element is positive.
    """
    matrix = as_array(a)
    scale = operator_norm(matrix)
    if scale == 0.0:
        return True
    if operator_norm(matrix - matrix.conj().T) > tol * scale:
        return False
    return min_eigenvalue(matrix) >= -tol * scale


def cauchy_schwarz_gap(x: ModuleVector, y: ModuleVector) -> float:
    """lambda_min of ||<x,x>|| <y,y> - <y,x><x,y>; nonnegative up to roundoff."""
    xx = inner_product(x, x)
    xy = inner_product(x, y)
    yy = inner_product(y, y)
    gap = xx.norm() * yy.entries - xy.entries.conj().T @ xy.entries
    return min_eigenvalue(gap)


def _scalar_values(f: Callable[[Any], Any], points: np.ndarray) -> np.ndarray:
    try:
        with np.errstate(divide="raise", invalid="raise"):
            values = np.asarray(f(points), dtype=complex)
        if values.shape != points.shape:
            raise ValueError("function is not elementwise")
    except (TypeError, ValueError, ZeroDivisionError, FloatingPointError, ArithmeticError):
        try:
            values = np.array([complex(f(float(p))) for p in points], dtype=complex)
        except (ValueError, ZeroDivisionError, ArithmeticError) as e:
            raise SpectrumException(
                "Function is undefined on the spectrum", {"error": str(e)}
            ) from e
    bad = ~np.isfinite(values)
    if np.any(bad):
        raise SpectrumException(
            "Function is undefined on the spectrum",
            {"eigenvalue": float(points[np.argmax(bad)])},
        )
    return values


def func_calc(A: SelfAdjointOperator, f: Callable[[Any], Any]) -> ModuleOperator:
    """
    Continuous functional calculus U diag(f(d)) U*.

    Args:
        A: Self-adjoint operator
        f: Scalar function of a real variable; numpy ufuncs are evaluated vectorized

    Returns:
        f(A)

    Raises:
        SpectrumException: If f is undefined or non-finite at an eigenvalue

    Example:
        >>> chi = func_calc(d, lambda x: 2 / np.pi * np.arctan(x))
    """
    A = self_adjoint(A)
    values = _scalar_values(f, A.eigenvalues)
    u = A.eigenvectors
    return ModuleOperator((u * values) @ u.conj().T, A.k)


def resolvent(A: Any, lam: complex) -> ModuleOperator:
    """
    Resolvent (A + lambda)^-1.

    For a self-adjoint A and purely imaginary lambda the result has norm <= 1/|lambda|.

    Raises:
        SingularOperatorException: If A + lambda is not invertible
    """
    if isinstance(A, SelfAdjointOperator):
        shifted = A.eigenvalues + lam
        gaps = np.abs(shifted)
        if gaps.size and float(gaps.min()) <= SINGULAR_RTOL * max(float(gaps.max()), 1.0):
            raise SingularOperatorException(
                "A + lambda is singular", parameter=lam, sigma_min=float(gaps.min())
            )
        u = A.eigenvectors
        return ModuleOperator((u / shifted) @ u.conj().T, A.k)
    matrix = as_array(A)
    k = A.k if isinstance(A, ModuleOperator) else 1
    return ModuleOperator(inverse(matrix + lam * np.eye(matrix.shape[0]), parameter=lam), k)


def graded_commutator(A: Any, B: Any, sign: SignLike) -> ModuleOperator:
    """
    [A, B]_tau = AB + tau BA.

    Example:
        >>> graded_commutator(sigma1, sigma2, "+").norm()
        0.0
    """
    tau = parse_sign(sign)
    left = as_array(A)
    right = as_array(B)
    _check_square_pair(left, right)
    k = A.k if isinstance(A, ModuleOperator) else 1
    return ModuleOperator(left @ right + tau * (right @ left), k)


def anticommutator(A: Any, B: Any) -> np.ndarray:
    """Plain-array shortcut for [A, B]_+."""
    return as_array(graded_commutator(A, B, 1))


# ---------------------------------------------------------------------------
# Identity residuals
# ---------------------------------------------------------------------------


@dataclass
class ResidualReport:
    """Residuals of exact operator identities, each with the scale it is measured against."""

    residuals: Dict[str, float] = field(default_factory=dict)
    """Absolute spectral-norm residual per identity."""

    scales: Dict[str, float] = field(default_factory=dict)
    """Product of operand norms per identity."""

    def add(self, name: str, lhs: Any, rhs: Any, scale: float) -> None:
        """Record ||lhs - rhs|| against the given scale."""
        self.residuals[name] = operator_norm(as_array(lhs) - as_array(rhs))
        self.scales[name] = max(float(scale), 1e-300)

    def merge(self, other: "ResidualReport", prefix: str = "") -> None:
        for name, value in other.residuals.items():
            self.residuals[prefix + name] = value
            self.scales[prefix + name] = other.scales[name]

    def relative(self, name: str) -> float:
        return self.residuals[name] / self.scales[name]

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    @property
    def max_relative(self) -> float:
        return max((self.relative(name) for name in self.residuals), default=0.0)

    def passed(self, tol: float = 1e-12) -> bool:
        return self.max_relative <= tol

    def to_dict(self) -> Dict[str, Any]:
        return {
            name: {"residual": self.residuals[name], "scale": self.scales[name]}
            for name in sorted(self.residuals)
        }

    def __str__(self) -> str:
        lines = ["Identity residuals:"]
        for name in sorted(self.residuals):
            lines.append(f"  - {name}: {self.relative(name):.3e} (relative)")
        return "\n".join(lines)


def norm_scale(*values: Any) -> float:
    product = 1.0
    for value in values:
        product *= max(operator_norm(value), 1.0)
    return product


def leibniz_residuals(a: Any, b: Any, c: Any) -> ResidualReport:
    """
    Residuals of the graded Leibniz rules for all four sign pairs (sigma, tau).

    [a, bc]_tau = [a, b]_sigma c - sigma b [a, c]_(-sigma tau)
    [ab, c]_tau = a [b, c]_sigma - sigma [a, c]_(-sigma tau) b
    """
    a, b, c = as_array(a), as_array(b), as_array(c)
    scale = norm_scale(a, b, c)
    report = ResidualReport()
    for sigma in (1, -1):
        for tau in (1, -1):
            tag = f"{'+' if sigma > 0 else '-'}{'+' if tau > 0 else '-'}"
            lhs = as_array(graded_commutator(a, b @ c, tau))
            rhs = as_array(graded_commutator(a, b, sigma)) @ c - sigma * b @ as_array(
                graded_commutator(a, c, -sigma * tau)
            )
            report.add(f"leibniz_right[{tag}]", lhs, rhs, scale)
            lhs = as_array(graded_commutator(a @ b, c, tau))
            rhs = a @ as_array(graded_commutator(b, c, sigma)) - sigma * as_array(
                graded_commutator(a, c, -sigma * tau)
            ) @ b
            report.add(f"leibniz_left[{tag}]", lhs, rhs, scale)
    return report


def resolvent_commutator_identities(
    a: Any, b: Any, lam: complex, tau: SignLike
) -> ResidualReport:
    """
    Evaluate both sides of the resolvent commutator identities.

    (lambda + b)^-1 a = a (lambda - tau b)^-1 - (lambda + b)^-1 [b, a]_tau (lambda - tau b)^-1
    [(lambda + b^2)^-1, a] = R b [a, b] R + R [a, b] b R
    [(lambda + b^2)^-1, a] = -R b [a, b]_+ R + R [a, b]_+ b R

    with R = (lambda + b^2)^-1.

    Args:
        a: First operator
        b: Second operator
        lam: Complex parameter
        tau: Sign of the twisted commutator in the first identity

    Returns:
        ResidualReport with entries "swap", "square_commutator", "square_anticommutator"

    Raises:
        SingularOperatorException: If a required inverse does not exist
    """
    sign = parse_sign(tau)
    a, b = as_array(a), as_array(b)
    identity = identity_like(a)
    left_inv = inverse(lam * identity + b, parameter=lam)
    right_inv = inverse(lam * identity - sign * b, parameter=lam)
    square_inv = inverse(lam * identity + b @ b, parameter=lam)

    report = ResidualReport()
    lhs = left_inv @ a
    rhs = a @ right_inv - left_inv @ as_array(graded_commutator(b, a, sign)) @ right_inv
    report.add("swap", lhs, rhs, norm_scale(a, b, left_inv, right_inv))

    commutator = a @ b - b @ a
    anti = a @ b + b @ a
    lhs = square_inv @ a - a @ square_inv
    scale = norm_scale(a, b, square_inv, square_inv)
    report.add(
        "square_commutator",
        lhs,
        square_inv @ b @ commutator @ square_inv + square_inv @ commutator @ b @ square_inv,
        scale,
    )
    report.add(
        "square_anticommutator",
        lhs,
        square_inv @ anti @ b @ square_inv - square_inv @ b @ anti @ square_inv,
        scale,
    )
    logger.debug("resolvent commutator identities at lambda=%s: %s", lam, report.residuals)
    return report

