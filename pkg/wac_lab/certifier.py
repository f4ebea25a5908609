"""Weak (anti)commutation certificates and the quantities derived from them.

A certificate (C0, C1, C2) witnesses the form estimate

    <Kx, Kx> <= C0 <x, x> + C1 <Sx, Sx> + C2 <Tx, Tx>,   K = ST + sign * TS,

which on a finite module is the operator inequality C0 + C1 S^2 + C2 T^2 - K*K >= 0.
"""

import hashlib
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.optimize

from .algebra import (
    DEFAULT_TOL,
    SignLike,
    as_array,
    graded_commutator,
    inverse,
    max_eigenvalue,
    min_eigenvalue,
    operator_norm,
    parse_sign,
    self_adjoint,
    sign_name,
)
from .exceptions import CertificateException, ParameterException

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_GRID: Tuple[float, ...] = tuple(10.0**p for p in range(0, 7))
"""|lambda| values swept when estimating lambda0."""

OBJECTIVE_MODES = ("weighted", "c0_only", "tied", "legacy")

_GRID_DECADES = 10
_GRID_POINTS = 21
_MAX_SWEEPS = 25


@dataclass(frozen=True)
class CertificateObjective:
    """
    Optimization target for certify_wac.

    Attributes:
        mode: "weighted" (free C1, C2), "c0_only" (C1 = C2 = 0), "tied" (C1 = C2) or
            "legacy" (C2 = 0)
        weights: Weights (w0, w1, w2) of the minimized sum w0*C0 + w1*C1 + w2*C2

    Example:
        >>> objective = CertificateObjective(mode="legacy")
        >>> cert = certify_wac(S, T, "+", objective)
    """

    mode: str = "weighted"
    weights: Tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        """Validate objective parameters."""
        if self.mode not in OBJECTIVE_MODES:
            raise ValueError(f"Objective mode must be one of {OBJECTIVE_MODES}")
        if len(self.weights) != 3 or any(w <= 0 or not math.isfinite(w) for w in self.weights):
            raise ValueError("Objective weights must be three positive finite numbers")

    def cost(self, c0: float, c1: float, c2: float) -> float:
        w0, w1, w2 = self.weights
        return w0 * c0 + w1 * c1 + w2 * c2

    def describe(self) -> str:
        w0, w1, w2 = self.weights
        return f"{self.mode}(w0={w0:g}, w1={w1:g}, w2={w2:g})"


@dataclass
class WacCertificate:
    """Constants certifying the weak (anti)commutation form estimate."""

    c0: float
    """Coefficient of <x, x>."""

    c1: float
    """Coefficient of <Sx, Sx>."""

    c2: float
    """Coefficient of <Tx, Tx>."""

    sign: str
    """"anticommuting" (K = ST + TS) or "commuting" (K = ST - TS)."""

    slack: float = 0.0
    """lambda_min of the certificate matrix at emission."""

    lambda0: Optional[float] = None
    """Smallest swept |lambda| from which derived bounds hold, None if not found."""

    objective: str = "weighted(w0=1, w1=1, w2=1)"
    """Description of the optimization target."""

    instance_hash: str = ""
    """SHA-256 of the operator pair and sign."""

    scale: float = 1.0
    """Magnitude the slack is measured against."""

    def __post_init__(self):
        """Validate constants."""
        for name in ("c0", "c1", "c2"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"Certificate constant {name} must be finite and >= 0")
        self.sign = sign_name(self.sign)

    @property
    def constants(self) -> Tuple[float, float, float]:
        return self.c0, self.c1, self.c2

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sign": self.sign,
            "c0": self.c0,
            "c1": self.c1,
            "c2": self.c2,
            "slack": self.slack,
            "lambda0": self.lambda0,
            "objective": self.objective,
            "instance_hash": self.instance_hash,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "WacCertificate":
        try:
            return cls(
                c0=float(data["c0"]),
                c1=float(data["c1"]),
                c2=float(data["c2"]),
                sign=data["sign"],
                slack=float(data.get("slack", 0.0)),
                lambda0=data.get("lambda0"),
                objective=data.get("objective", ""),
                instance_hash=data.get("instance_hash", ""),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise CertificateException("Malformed certificate", {"error": str(e)}) from e

    def __str__(self) -> str:
        return (
            f"WAC certificate [{self.sign}] C0={self.c0:.6g} C1={self.c1:.6g} "
            f"C2={self.c2:.6g} slack={self.slack:.3e}"
        )


# ---------------------------------------------------------------------------
# Matrix building blocks
# ---------------------------------------------------------------------------


def anticommutator_of(S: Any, T: Any, sign: SignLike) -> np.ndarray:
    """K = ST + sign * TS as an array."""
    return as_array(graded_commutator(S, T, parse_sign(sign)))


def instance_hash(S: Any, T: Any, sign: SignLike) -> str:
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(as_array(S)).tobytes())
    digest.update(np.ascontiguousarray(as_array(T)).tobytes())
    digest.update(sign_name(sign).encode())
    return digest.hexdigest()


class _FeasibilityOracle:
    """Minimal C0 for fixed (C1, C2): lambda_max(K*K - C1 S^2 - C2 T^2) clipped at 0."""

    def __init__(self, S: Any, T: Any, sign: SignLike):
        s = as_array(S)
        t = as_array(T)
        k = anticommutator_of(s, t, sign)
        self.kk = k.conj().T @ k
        self.s2 = s @ s
        self.t2 = t @ t
        self.kk_norm = operator_norm(self.kk)
        self.s2_norm = operator_norm(self.s2)
        self.t2_norm = operator_norm(self.t2)
        self.evaluations = 0

    def c0(self, c1: float, c2: float) -> float:
        self.evaluations += 1
        if self.kk_norm == 0.0:
            return 0.0
        return max(0.0, max_eigenvalue(self.kk - c1 * self.s2 - c2 * self.t2))

    def matrix(self, c0: float, c1: float, c2: float) -> np.ndarray:
        return c0 * np.eye(self.kk.shape[0]) + c1 * self.s2 + c2 * self.t2 - self.kk

    def scale(self, c0: float, c1: float, c2: float) -> float:
        return max(self.kk_norm, c0 + c1 * self.s2_norm + c2 * self.t2_norm, 1e-300)

    def padding(self) -> float:
        # Roundoff allowance so emitted certificates verify with nonnegative slack.
        return 8.0 * np.finfo(float).eps * self.kk.shape[0] * self.kk_norm


def certificate_matrix(
    S: Any, T: Any, sign: SignLike, c0: float, c1: float, c2: float
) -> np.ndarray:
    """C0 I + C1 S^2 + C2 T^2 - K*K."""
    return _FeasibilityOracle(S, T, sign).matrix(c0, c1, c2)


def _minimize_1d(func, upper: float) -> Tuple[float, float]:
    """Minimize a convex function on [0, upper]: log-grid scan, then bounded Brent refinement."""
    if upper <= 0.0:
        return 0.0, func(0.0)
    grid = [0.0] + list(upper * np.logspace(-_GRID_DECADES, 0.0, _GRID_POINTS))
    values = [func(x) for x in grid]
    best = int(np.argmin(values))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    best_x, best_value = grid[best], values[best]
    if hi > lo:
        result = scipy.optimize.minimize_scalar(
            func,
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12 * max(hi, 1e-300), "maxiter": 200},
        )
        if result.fun < best_value:
            best_x, best_value = float(result.x), float(result.fun)
    return best_x, best_value


def _optimize(oracle: _FeasibilityOracle, objective: CertificateObjective) -> Tuple[float, ...]:
    w0, w1, w2 = objective.weights
    base = oracle.c0(0.0, 0.0)
    if objective.mode == "c0_only" or base == 0.0:
        return base, 0.0, 0.0

    upper1 = w0 * base / w1
    upper2 = w0 * base / w2

    if objective.mode == "legacy":
        c1, _ = _minimize_1d(lambda c: w0 * oracle.c0(c, 0.0) + w1 * c, upper1)
        return oracle.c0(c1, 0.0), c1, 0.0

    if objective.mode == "tied":
        upper = w0 * base / (w1 + w2)
        c, _ = _minimize_1d(lambda c: w0 * oracle.c0(c, c) + (w1 + w2) * c, upper)
        return oracle.c0(c, c), c, c

    def cost(c1: float, c2: float) -> float:
        return objective.cost(oracle.c0(c1, c2), c1, c2)

    # Coarse 2-D log grid to seed coordinate descent away from kinks.
    axis1 = [0.0] + list(upper1 * np.logspace(-6, 0, 9))
    axis2 = [0.0] + list(upper2 * np.logspace(-6, 0, 9))
    c1, c2 = min(((a, b) for a in axis1 for b in axis2), key=lambda p: cost(*p))
    current = cost(c1, c2)
    for sweep in range(_MAX_SWEEPS):
        c1, _ = _minimize_1d(lambda c: cost(c, c2), upper1)
        c2, value = _minimize_1d(lambda c: cost(c1, c), upper2)
        logger.debug("coordinate sweep %d: C1=%.6g C2=%.6g cost=%.9g", sweep, c1, c2, value)
        if current - value <= 1e-12 * max(abs(current), 1e-300):
            current = min(current, value)
            break
        current = value
    return oracle.c0(c1, c2), c1, c2


def certify_wac(
    S: Any,
    T: Any,
    sign: SignLike = "+",
    objective: Optional[CertificateObjective] = None,
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
) -> WacCertificate:
    """
    Compute a feasible certificate minimizing the objective.

    For fixed (C1, C2) the minimal C0 is one eigensolve; the outer search over (C1, C2)
    is coordinate descent on a log grid refined by a bounded scalar minimizer. The result
    is always feasible; optimality is up to the search heuristic.

    Args:
        S: Self-adjoint operator
        T: Self-adjoint operator of the same shape
        sign: "+" for anticommuting pairs, "-" for commuting pairs
        objective: Optimization target, weighted (1, 1, 1) by default
        lambda_grid: |lambda| values swept for lambda0

    Returns:
        WacCertificate

    Example:
        >>> cert = certify_wac(sigma1, sigma2, "+")
        >>> cert.constants
        (0.0, 0.0, 0.0)
    """
    S = self_adjoint(S)
    T = self_adjoint(T)
    if S.dim != T.dim:
        raise ParameterException("Operators act on different modules", {"S": S.dim, "T": T.dim})
    objective = objective or CertificateObjective()
    oracle = _FeasibilityOracle(S, T, sign)
    c0, c1, c2 = _optimize(oracle, objective)
    c0 = c0 + oracle.padding() if c0 > 0.0 else c0
    slack = min_eigenvalue(oracle.matrix(c0, c1, c2))
    cert = WacCertificate(
        c0=float(c0),
        c1=float(c1),
        c2=float(c2),
        sign=sign_name(sign),
        slack=slack,
        objective=objective.describe(),
        instance_hash=instance_hash(S, T, sign),
        scale=oracle.scale(c0, c1, c2),
    )
    cert.lambda0 = estimate_lambda0(S, T, sign, lambda_grid)
    logger.info("%s after %d eigensolves", cert, oracle.evaluations)
    return cert


def estimate_lambda0(
    S: Any, T: Any, sign: SignLike, lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID
) -> Optional[float]:
    """
    Smallest grid |lambda| from which ||K (S+lambda)^-1 (T+lambda)^-1|| < 1/3 on all larger
    grid points, the regime where the perturbation lemma applies to the swapped products.
    """
    s, t = as_array(S), as_array(T)
    k = anticommutator_of(s, t, sign)
    identity = np.eye(s.shape[0])
    holds: List[bool] = []
    grid = sorted(lambda_grid)
    if not grid:
        return None
    for value in grid:
        lam = 1j * value
        ratio = operator_norm(k @ inverse(s + lam * identity) @ inverse(t + lam * identity))
        holds.append(ratio < 1.0 / 3.0)
    for index in range(len(grid)):
        if all(holds[index:]):
            return float(grid[index])
    logger.warning("lambda0 not found on grid up to %.3g", grid[-1] if grid else float("nan"))
    return None


def norm_estimate_constant(cert: WacCertificate, lam: complex) -> float:
    """
    Constant C of ||Kx|| <= C (||(S+lambda)x|| + ||(T+lambda)x||) implied by a certificate.

    Uses ||(S+lambda)x||^2 = ||Sx||^2 + |lambda|^2 ||x||^2 for imaginary lambda, giving
    C = sqrt(max(C0 / |lambda|^2, C1, C2)).
    """
    if lam == 0:
        raise ParameterException("Resolvent parameter must be nonzero", {"lambda": lam})
    return math.sqrt(max(cert.c0 / abs(lam) ** 2, cert.c1, cert.c2))


def _pencil_max(numerator: np.ndarray, denominator: np.ndarray) -> float:
    """Largest generalized eigenvalue of (numerator, denominator), denominator > 0."""
    values = scipy.linalg.eigh(
        (numerator + numerator.conj().T) / 2,
        (denominator + denominator.conj().T) / 2,
        eigvals_only=True,
    )
    return float(values[-1])


@dataclass
class CertificateVerification:
    """Result of re-verifying a certificate against an operator pair."""

    slack: float
    """lambda_min of C0 + C1 S^2 + C2 T^2 - K*K."""

    scale: float
    """Magnitude the slack is measured against."""

    passed: bool
    """Whether slack >= -tol * scale."""

    lam: complex
    """Resolvent parameter used for the derived norm estimates."""

    norm_constant: float
    """C of ||Kx|| <= C(||(S+lambda)x|| + ||(T+lambda)x||) derived from the certificate."""

    measured_constant: float
    """Best C of the squared-norm version measured directly from a pencil."""

    form_constant: float
    """sqrt(max(C0, C1, C2)): C of ||Kx|| <= C(||x|| + ||Sx|| + ||Tx||) from the form."""

    measured_form_constant: float
    """Best C of ||Kx||^2 <= C^2(||x||^2 + ||Sx||^2 + ||Tx||^2) measured directly."""

    swapped_product_norms: Tuple[float, float]
    """||K ((T+lambda)(S+lambda))^-1|| and ||K ((S+lambda)(T+lambda))^-1||."""

    predicted_swapped_bound: float
    """C/|lambda| + C/|lambda|, the sum of the two coefficients of the split estimate."""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "slack": self.slack,
            "scale": self.scale,
            "passed": self.passed,
            "lambda_abs": abs(self.lam),
            "norm_constant": self.norm_constant,
            "measured_constant": self.measured_constant,
            "form_constant": self.form_constant,
            "measured_form_constant": self.measured_form_constant,
            "swapped_product_norms": list(self.swapped_product_norms),
            "predicted_swapped_bound": self.predicted_swapped_bound,
        }

    def __str__(self) -> str:
        mark = "✓" if self.passed else "✗"
        return f"Certificate slack {self.slack:.3e} (scale {self.scale:.3e}) {mark}"


def verify_certificate(
    S: Any,
    T: Any,
    cert: WacCertificate,
    tol: float = DEFAULT_TOL,
    lam: Optional[complex] = None,
) -> CertificateVerification:
    """
    Re-verify a certificate and derive the norm-estimate constants.

    Args:
        S: Self-adjoint operator
        T: Self-adjoint operator
        cert: Certificate to check
        tol: Relative slack tolerance
        lam: Imaginary resolvent parameter; defaults to i * max(lambda0, 1)

    Returns:
        CertificateVerification
    """
    s, t = as_array(S), as_array(T)
    oracle = _FeasibilityOracle(s, t, cert.sign)
    matrix = oracle.matrix(*cert.constants)
    slack = min_eigenvalue(matrix)
    scale = oracle.scale(*cert.constants)
    if lam is None:
        lam = 1j * max(cert.lambda0 or 1.0, 1.0)

    identity = np.eye(s.shape[0])
    k = anticommutator_of(s, t, cert.sign)
    s_shift = s + lam * identity
    t_shift = t + lam * identity
    graph = s_shift.conj().T @ s_shift + t_shift.conj().T @ t_shift
    measured = math.sqrt(max(_pencil_max(oracle.kk, graph), 0.0))
    measured_form = math.sqrt(max(_pencil_max(oracle.kk, identity + oracle.s2 + oracle.t2), 0.0))
    c = norm_estimate_constant(cert, lam)
    swapped = (
        operator_norm(k @ inverse(t_shift @ s_shift, parameter=lam)),
        operator_norm(k @ inverse(s_shift @ t_shift, parameter=lam)),
    )
    return CertificateVerification(
        slack=slack,
        scale=scale,
        passed=slack >= -tol * scale,
        lam=lam,
        norm_constant=c,
        measured_constant=measured,
        form_constant=math.sqrt(max(cert.constants)),
        measured_form_constant=measured_form,
        swapped_product_norms=swapped,
        predicted_swapped_bound=2 * c / abs(lam),
    )


# ---------------------------------------------------------------------------
# Graph norms and perturbation quantities
# ---------------------------------------------------------------------------


@dataclass
class GraphNormReport:
    """Equivalence constant of the graph norms of (S, T) and S + T."""

    constant: float
    """Smallest C >= 1 with C^-1 (I + (S+T)^2) <= I + S^2 + T^2 <= C (I + (S+T)^2)."""

    nu_min: float
    """Smallest generalized eigenvalue of (I + S^2 + T^2, I + (S+T)^2)."""

    nu_max: float
    """Largest generalized eigenvalue of the same pencil."""

    upper_slack: float
    """lambda_min(C (I + (S+T)^2) - (I + S^2 + T^2))."""

    lower_slack: float
    """lambda_min(C (I + S^2 + T^2) - (I + (S+T)^2))."""

    easy_slack: float
    """lambda_min(2 (S^2 + T^2) - (S+T)^2); nonnegative since it equals (S-T)^2."""

    scale: float
    """||I + S^2 + T^2||."""

    def to_dict(self) -> Dict[str, float]:
        return {
            "constant": self.constant,
            "nu_min": self.nu_min,
            "nu_max": self.nu_max,
            "upper_slack": self.upper_slack,
            "lower_slack": self.lower_slack,
            "easy_slack": self.easy_slack,
        }


def graph_norm_constant(S: Any, T: Any) -> GraphNormReport:
    """
    Optimal graph-norm equivalence constant from the pencil (I + S^2 + T^2, I + (S+T)^2).

    Example:
        >>> graph_norm_constant(S, np.zeros_like(S)).constant
        1.0
    """
    s, t = as_array(S), as_array(T)
    identity = np.eye(s.shape[0])
    joint = identity + s @ s + t @ t
    total = s + t
    summed = identity + total @ total
    values = scipy.linalg.eigh(
        (joint + joint.conj().T) / 2, (summed + summed.conj().T) / 2, eigvals_only=True
    )
    nu_min, nu_max = float(values[0]), float(values[-1])
    constant = max(1.0, nu_max, 1.0 / nu_min)
    return GraphNormReport(
        constant=constant,
        nu_min=nu_min,
        nu_max=nu_max,
        upper_slack=min_eigenvalue(constant * summed - joint),
        lower_slack=min_eigenvalue(constant * joint - summed),
        easy_slack=min_eigenvalue(2 * (s @ s + t @ t) - total @ total),
        scale=operator_norm(joint),
    )


@dataclass
class RelativeGapReport:
    """Quantities of the perturbation lemma for a pair of invertible operators A, B."""

    epsilon: float
    """Valid epsilon: sup ||(A-B)x|| / sqrt(||Ax||^2 + ||Bx||^2), bounding the sum-form ratio."""

    epsilon_lower: float
    """epsilon / sqrt(2), a lower bound for sup ||(A-B)x|| / (||Ax|| + ||Bx||)."""

    rho: float
    """||(A - B) B^-1||."""

    rho_reverse: float
    """||B A^-1 - I||."""

    bound: Optional[float]
    """2 epsilon / (1 - epsilon) when epsilon < 1/3, else None."""

    holds: Optional[bool]
    """Whether rho and rho_reverse are within bound; None when the lemma does not apply."""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "epsilon_lower": self.epsilon_lower,
            "rho": self.rho,
            "rho_reverse": self.rho_reverse,
            "bound": self.bound,
            "holds": self.holds,
        }


def relative_gap(A: Any, B: Any) -> RelativeGapReport:
    """
    Perturbation-lemma quantities for invertible A, B.

    Raises:
        SingularOperatorException: If A or B is singular
    """
    a, b = as_array(A), as_array(B)
    a_inv = inverse(a)
    b_inv = inverse(b)
    diff = a - b
    graph = a.conj().T @ a + b.conj().T @ b
    epsilon = math.sqrt(max(_pencil_max(diff.conj().T @ diff, graph), 0.0))
    rho = operator_norm(diff @ b_inv)
    rho_reverse = operator_norm(b @ a_inv - np.eye(a.shape[0]))
    bound: Optional[float] = None
    holds: Optional[bool] = None
    if epsilon < 1.0 / 3.0:
        bound = 2 * epsilon / (1 - epsilon)
        slack = 1e-12 * max(bound, 1.0)
        holds = rho <= bound + slack and rho_reverse <= bound + slack
    return RelativeGapReport(
        epsilon=epsilon,
        epsilon_lower=epsilon / math.sqrt(2),
        rho=rho,
        rho_reverse=rho_reverse,
        bound=bound,
        holds=holds,
    )


@dataclass
class CommutingSmallnessReport:
    """Smallness of the commutator against resolvent products for a weakly commuting pair."""

    lam: complex
    mu: complex

    observed_ts: float
    """||[S,T] (T+mu)^-1 (S+lambda)^-1||."""

    observed_st: float
    """||[S,T] (S+lambda)^-1 (T+mu)^-1||."""

    predicted: float
    """C (1/|lambda| + 1/|mu|)."""

    predicted_ts: float
    """C (1/|lambda| + (1+rho)/|mu|), accounting for the swap of the two products."""

    predicted_st: float
    """C (1/|mu| + (1+rho)/|lambda|)."""

    above_lambda0: bool
    """Whether |lambda|, |mu| >= the certificate's lambda0."""

    holds: bool
    """observed <= predicted on both products."""

    swap_corrected_holds: bool
    """observed <= predicted_ts and predicted_st respectively."""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda_abs": abs(self.lam),
            "mu_abs": abs(self.mu),
            "observed_ts": self.observed_ts,
            "observed_st": self.observed_st,
            "predicted": self.predicted,
            "predicted_ts": self.predicted_ts,
            "predicted_st": self.predicted_st,
            "above_lambda0": self.above_lambda0,
            "holds": self.holds,
            "swap_corrected_holds": self.swap_corrected_holds,
        }


def commuting_smallness(
    S: Any, T: Any, lam: complex, mu: complex, cert: Optional[WacCertificate]
) -> CommutingSmallnessReport:
    """
    Compare ||[S,T] (resolvent products)|| with the bound C (1/|lambda| + 1/|mu|).

    Raises:
        CertificateException: If the pair carries no weakly commuting certificate
    """
    if cert is None or cert.sign != "commuting":
        raise CertificateException(
            "Pair is not certified weakly commuting",
            {"sign": None if cert is None else cert.sign},
        )
    s, t = as_array(S), as_array(T)
    identity = np.eye(s.shape[0])
    k = s @ t - t @ s
    s_shift = s + lam * identity
    t_shift = t + mu * identity
    s_inv = inverse(s_shift, parameter=lam)
    t_inv = inverse(t_shift, parameter=mu)
    observed_ts = operator_norm(k @ t_inv @ s_inv)
    observed_st = operator_norm(k @ s_inv @ t_inv)

    # ||(S+l)x|| and ||(T+m)x|| are each bounded by one of the two products; the other
    # product enters through the relative gap of the swapped factors.
    ts_product = t_shift @ s_shift
    st_product = s_shift @ t_shift
    rho_ts = operator_norm((ts_product - st_product) @ inverse(st_product))
    rho_st = operator_norm((st_product - ts_product) @ inverse(ts_product))
    c = math.sqrt(max(cert.c0 / min(abs(lam), abs(mu)) ** 2, cert.c1, cert.c2))
    predicted = c * (1 / abs(lam) + 1 / abs(mu))
    predicted_st = c * (1 / abs(mu) + (1 + rho_st) / abs(lam))
    predicted_ts = c * (1 / abs(lam) + (1 + rho_ts) / abs(mu))
    slack = 1e-12 * max(predicted, 1.0)
    lambda0 = cert.lambda0 if cert.lambda0 is not None else math.inf
    return CommutingSmallnessReport(
        lam=lam,
        mu=mu,
        observed_ts=observed_ts,
        observed_st=observed_st,
        predicted=predicted,
        predicted_ts=predicted_ts,
        predicted_st=predicted_st,
        above_lambda0=min(abs(lam), abs(mu)) >= lambda0,
        holds=max(observed_ts, observed_st) <= predicted + slack,
        swap_corrected_holds=(
            observed_ts <= predicted_ts + slack and observed_st <= predicted_st + slack
        ),
    )


@dataclass
class LegacyComparison:
    """Comparison of the weak notion with the uniform-boundedness (legacy) notion."""

    sup_norm: float
    """sup over the grid of ||K (S+lambda)^-1||."""

    per_lambda: List[Tuple[float, float]] = field(default_factory=list)
    """(|lambda|, ||K (S+lambda)^-1||) rows."""

    legacy_constants: Tuple[float, float] = (0.0, 0.0)
    """(C0, C1) with C2 = 0 implied by the supremum at the smallest grid |lambda|."""

    full_cost: float = 0.0
    """Objective value of the unrestricted certificate."""

    legacy_cost: float = 0.0
    """Objective value of the certificate with C2 = 0."""

    ratio: float = 1.0
    """legacy_cost / full_cost (1 when both vanish)."""

    legacy_holds: bool = True
    """Whether the C2 = 0 certificate is within the factor of the unrestricted one."""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sup_norm": self.sup_norm,
            "per_lambda": [list(row) for row in self.per_lambda],
            "legacy_constants": list(self.legacy_constants),
            "full_cost": self.full_cost,
            "legacy_cost": self.legacy_cost,
            "ratio": self.ratio,
            "legacy_holds": self.legacy_holds,
        }


def legacy_wac_check(
    S: Any,
    T: Any,
    sign: SignLike = "+",
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    legacy_factor: float = 10.0,
) -> LegacyComparison:
    """
    Check whether K (S+lambda)^-1 is uniformly bounded in a way that makes C2 = 0 viable.

    Args:
        S: Self-adjoint operator
        T: Self-adjoint operator
        sign: Commutator sign
        lambda_grid: |lambda| values (lambda = i * value)
        legacy_factor: Allowed cost ratio of the C2 = 0 certificate

    Returns:
        LegacyComparison
    """
    if not lambda_grid:
        raise ParameterException("lambda grid must be nonempty")
    s, t = as_array(S), as_array(T)
    k = anticommutator_of(s, t, sign)
    identity = np.eye(s.shape[0])
    rows = []
    for value in sorted(lambda_grid):
        rows.append((float(value), operator_norm(k @ inverse(s + 1j * value * identity))))
    sup_norm = max(norm for _, norm in rows)
    smallest = rows[0][0]
    full = certify_wac(s, t, sign, CertificateObjective(mode="weighted"), lambda_grid=())
    legacy = certify_wac(s, t, sign, CertificateObjective(mode="legacy"), lambda_grid=())
    objective = CertificateObjective()
    full_cost = objective.cost(*full.constants)
    legacy_cost = objective.cost(*legacy.constants)
    tiny = 1e-12 * max(operator_norm(k) ** 2, 1e-300)
    ratio = 1.0 if legacy_cost <= tiny else legacy_cost / max(full_cost, tiny)
    report = LegacyComparison(
        sup_norm=sup_norm,
        per_lambda=rows,
        legacy_constants=(sup_norm**2 * smallest**2, sup_norm**2),
        full_cost=full_cost,
        legacy_cost=legacy_cost,
        ratio=ratio,
        legacy_holds=ratio <= legacy_factor,
    )
    logger.info("legacy comparison: sup=%.6g ratio=%.6g", sup_norm, ratio)
    return report


def form_norm_gap(S: Any, T: Any, cert: WacCertificate) -> Tuple[float, float]:
    """
    Constant of ||Kx|| <= C (||x|| + ||Sx|| + ||Tx||) from a certificate, and the best one.

    Returns:
        (sqrt(max(C0, C1, C2)), sqrt(lambda_max of the pencil (K*K, I + S^2 + T^2)))
    """
    oracle = _FeasibilityOracle(S, T, cert.sign)
    identity = np.eye(oracle.kk.shape[0])
    measured = math.sqrt(max(_pencil_max(oracle.kk, identity + oracle.s2 + oracle.t2), 0.0))
    return math.sqrt(max(cert.constants)), measured
