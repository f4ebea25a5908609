"""Sectorial resolvent profiles and the contour-integral approximant of (S + T + i lambda)^-1.

Here lambda is real and positive and the shift is i lambda. The approximant

    P_lambda = 1/(2 pi i) * contour integral of (z + lambda^2 + S^2)^-1 (S + T - i lambda)
               (z - T^2)^-1 dz

is taken over a closed keyhole contour around the spectrum of T^2. When [S, T]_+ = 0 it is
exactly (S + T + i lambda)^-1, and in general (S + T + i lambda) P_lambda = I + R_lambda.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.optimize
from numpy.polynomial.legendre import leggauss

from .algebra import (
    ModuleOperator,
    as_array,
    func_calc,
    inverse,
    operator_norm,
    self_adjoint,
)
from .exceptions import ParameterException, QuadratureException, SingularOperatorException

logger = logging.getLogger(__name__)

MIN_NODES = 16
DEFAULT_NODES = 400
DEFAULT_THETA_GRID: Tuple[float, ...] = tuple(k * math.pi / 64 for k in range(1, 64))
DEFAULT_DUNFORD_GRID: Tuple[float, ...] = (10.0, 100.0, 1000.0)
DEFAULT_QUAD_TOL = 1e-6
REFINEMENT_FACTOR = 4.0
REFINEMENT_FLOOR = 1e-10

_RAY_SAMPLES = 64
_STABILITY_RTOL = 0.1


# ---------------------------------------------------------------------------
# Sectorial profiles
# ---------------------------------------------------------------------------


@dataclass
class SectorialProfile:
    """Sector constants M_theta = sup |lambda| ||(A + lambda)^-1|| sampled on a theta grid."""

    angles: List[Tuple[float, float, bool]] = field(default_factory=list)
    """(theta, M_theta, admitted)."""

    spectral_angle: float = math.pi
    """pi minus the largest admitted theta."""

    exact_angle: float = 0.0
    """max |arg| over the eigenvalues of A, the value the estimate resolves."""

    resolution: float = math.pi / 64
    """Spacing of the theta grid."""

    def sector_constant(self, theta: float) -> float:
        """M at the grid angle closest to theta."""
        if not self.angles:
            return math.inf
        return min(self.angles, key=lambda row: abs(row[0] - theta))[1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "angles": [[t, m if math.isfinite(m) else None, ok] for t, m, ok in self.angles],
            "spectral_angle": self.spectral_angle,
            "exact_angle": self.exact_angle,
            "resolution": self.resolution,
        }

    def __str__(self) -> str:
        return (
            f"Spectral angle {self.spectral_angle:.4f} "
            f"(eigenvalue angle {self.exact_angle:.4f}, resolution {self.resolution:.4f})"
        )


def _ray_value(a: np.ndarray, identity: np.ndarray, theta: float, rho: float) -> float:
    worst = 0.0
    for direction in (theta, -theta):
        lam = rho * complex(math.cos(direction), math.sin(direction))
        worst = max(worst, rho * operator_norm(inverse(a + lam * identity, parameter=lam)))
    return worst


def _sector_constant(
    a: np.ndarray, identity: np.ndarray, theta: float, radii: np.ndarray
) -> float:
    try:
        values = [_ray_value(a, identity, theta, rho) for rho in radii]
        best = int(np.argmax(values))
        lo = math.log(radii[max(best - 1, 0)])
        hi = math.log(radii[min(best + 1, len(radii) - 1)])
        result = scipy.optimize.minimize_scalar(
            lambda u: -_ray_value(a, identity, theta, math.exp(u)),
            bounds=(lo, hi),
            method="bounded",
        )
        refined = -float(result.fun)
    except SingularOperatorException:
        return math.inf
    return max(1.0, float(values[best]), refined)


def spectral_angle(
    A: Any, theta_grid: Sequence[float] = DEFAULT_THETA_GRID, samples: int = _RAY_SAMPLES
) -> SectorialProfile:
    """
    Estimate the spectral angle from sampled sector constants.

    A grid angle theta is admitted when M_theta is finite, changes by less than 10% when the
    ray sampling is doubled, and stays below 1/sin(resolution / 2).

    Args:
        A: Square operator
        theta_grid: Sector half-openings in (0, pi)
        samples: Radii sampled per ray on a log grid

    Returns:
        SectorialProfile
    """
    a = as_array(A)
    identity = np.eye(a.shape[0])
    grid = sorted(theta_grid)
    if not grid or grid[0] <= 0 or grid[-1] >= math.pi:
        raise ParameterException("theta grid must be a nonempty subset of (0, pi)")
    resolution = min(np.diff(grid)) if len(grid) > 1 else math.pi / 64
    eigenvalues = np.linalg.eigvals(a)
    moduli = np.abs(eigenvalues)
    nonzero = moduli[moduli > 0]
    low = 1e-3 * (float(nonzero.min()) if nonzero.size else 1.0)
    high = 1e3 * max(float(moduli.max()) if moduli.size else 1.0, 1.0)
    coarse = np.geomspace(low, high, samples)
    fine = np.geomspace(low, high, 2 * samples)
    ceiling = 1.0 / math.sin(resolution / 2)

    profile = SectorialProfile(
        exact_angle=float(np.max(np.abs(np.angle(eigenvalues[moduli > 0])), initial=0.0)),
        resolution=float(resolution),
    )
    admitted: List[float] = []
    for theta in grid:
        value = _sector_constant(a, identity, theta, coarse)
        ok = False
        if math.isfinite(value):
            refined = _sector_constant(a, identity, theta, fine)
            stable = abs(refined - value) <= _STABILITY_RTOL * max(value, refined)
            value = max(value, refined)
            ok = stable and value <= ceiling
        if ok:
            admitted.append(theta)
        profile.angles.append((float(theta), value, ok))
        logger.debug("M_theta at theta=%.4f: %.6g admitted=%s", theta, value, ok)
    if admitted:
        profile.spectral_angle = float(math.pi - max(admitted))
    else:
        logger.warning("no sector admitted on the theta grid")
    logger.info("%s", profile)
    return profile


# ---------------------------------------------------------------------------
# Contours
# ---------------------------------------------------------------------------


@dataclass
class Contour:
    """Closed keyhole contour: two rays at +-theta joined by arcs of radius r and r_max."""

    r: float
    theta: float
    r_max: float
    nodes: np.ndarray
    """Complex quadrature nodes."""

    weights: np.ndarray
    """Complex weights including dz."""

    def __len__(self) -> int:
        return int(self.nodes.size)

    def min_distance(self, points: Sequence[float]) -> float:
        """Distance from the nodes to the given real points."""
        values = np.asarray(points, dtype=float)
        if values.size == 0:
            return math.inf
        return float(np.min(np.abs(self.nodes[:, None] - values[None, :])))

    def to_dict(self) -> Dict[str, Any]:
        return {"r": self.r, "theta": self.theta, "r_max": self.r_max, "nodes": len(self)}


def _gauss(count: int, lo: float, hi: float) -> Tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(count)
    return (lo + hi) / 2 + (hi - lo) / 2 * x, (hi - lo) / 2 * w


def keyhole_contour(r: float, theta: float, r_max: float, node_count: int) -> Contour:
    """
    Counter-clockwise keyhole around [0, r_max).

    Nodes are split over four pieces. The rays use the substitution u = log |z|.

    Raises:
        QuadratureException: If node_count < 16 or the radii are inconsistent
    """
    if node_count < MIN_NODES:
        raise QuadratureException(
            "Node budget too small", {"node_count": node_count, "minimum": MIN_NODES}
        )
    if not 0 < r < r_max or not 0 < theta < math.pi / 2:
        raise QuadratureException(
            "Invalid contour geometry", {"r": r, "r_max": r_max, "theta": theta}
        )
    per_piece = node_count // 4
    ray_count = per_piece + (node_count - 4 * per_piece) // 2
    upper = complex(math.cos(theta), math.sin(theta))
    lower = upper.conjugate()

    u, wu = _gauss(ray_count, math.log(r), math.log(r_max))
    rho = np.exp(u)
    upper_nodes = rho * upper
    upper_weights = -wu * upper_nodes
    lower_nodes = rho * lower
    lower_weights = wu * lower_nodes

    phi, wphi = _gauss(per_piece, theta, 2 * math.pi - theta)
    small_nodes = r * np.exp(1j * phi)
    small_weights = 1j * wphi * small_nodes

    remaining = node_count - 2 * ray_count - per_piece
    phi, wphi = _gauss(remaining, -theta, theta)
    outer_nodes = r_max * np.exp(1j * phi)
    outer_weights = 1j * wphi * outer_nodes

    return Contour(
        r=r,
        theta=theta,
        r_max=r_max,
        nodes=np.concatenate([outer_nodes, upper_nodes, small_nodes, lower_nodes]),
        weights=np.concatenate([outer_weights, upper_weights, small_weights, lower_weights]),
    )


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not lam > 0:
        raise ParameterException("lambda must be real and positive", {"lambda": lam})
    return lam


def build_contour(S: Any, T: Any, lam: float, node_count: int = DEFAULT_NODES) -> Contour:
    """
    Contour enclosing the spectrum of T^2 and excluding that of -(lambda^2 + S^2).

    r = min(lambda^2 / 2, 1), theta = pi / 4, r_max = 4 (||S||^2 + ||T||^2 + lambda^2) + 10.

    Raises:
        ParameterException: If lambda <= 0
        QuadratureException: If node_count < 16
    """
    lam = _check_lambda(lam)
    s_norm, t_norm = operator_norm(S), operator_norm(T)
    r = min(lam**2 / 2, 1.0)
    r_max = 4 * (s_norm**2 + t_norm**2 + lam**2) + 10
    contour = keyhole_contour(r, math.pi / 4, r_max, node_count)
    logger.debug("contour r=%.3g r_max=%.3g nodes=%d", r, r_max, len(contour))
    return contour


def winding_number(contour: Contour, a: complex) -> complex:
    """1/(2 pi i) * contour integral of (z - a)^-1 dz."""
    return complex(np.sum(contour.weights / (contour.nodes - a)) / (2j * math.pi))


# ---------------------------------------------------------------------------
# The approximant
# ---------------------------------------------------------------------------


def _kernel(contour: Contour, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """H_ij = 1/(2 pi i) sum_k w_k / ((z_k + left_i)(z_k - right_j))."""
    z = contour.nodes
    first = 1.0 / (z[None, :] + left[:, None])
    second = contour.weights[None, :] / (z[None, :] - right[:, None])
    if np.any(~np.isfinite(first)) or np.any(~np.isfinite(second)):
        raise QuadratureException("A quadrature node hits the spectrum")
    return (first @ second.T) / (2j * math.pi)


def dunford_p_lambda(
    S: Any, T: Any, lam: float, contour: Optional[Contour] = None
) -> ModuleOperator:
    """
    Quadrature value of P_lambda.

    The squares are diagonalized once: with S^2 = U diag(a) U* and T^2 = V diag(b) V*,
    P_lambda = U (U* M V o H) V* where M = S + T - i lambda and H is the scalar kernel.

    Raises:
        ParameterException: If lambda <= 0
        QuadratureException: If a node lies on the spectrum
    """
    lam = _check_lambda(lam)
    S = self_adjoint(S)
    T = self_adjoint(T)
    if contour is None:
        contour = build_contour(S, T, lam)
    u, a = S.eigenvectors, S.eigenvalues**2
    v, b = T.eigenvectors, T.eigenvalues**2
    middle = S.entries + T.entries - 1j * lam * np.eye(S.dim)
    kernel = _kernel(contour, lam**2 + a, b)
    return ModuleOperator(u @ ((u.conj().T @ middle @ v) * kernel) @ v.conj().T, S.k)


def residue_p_lambda(S: Any, T: Any, lam: float) -> ModuleOperator:
    """Residue value of P_lambda: the kernel is 1/(b_j + lambda^2 + a_i) in the eigenbases."""
    lam = _check_lambda(lam)
    S = self_adjoint(S)
    T = self_adjoint(T)
    u, a = S.eigenvectors, S.eigenvalues**2
    v, b = T.eigenvectors, T.eigenvalues**2
    middle = S.entries + T.entries - 1j * lam * np.eye(S.dim)
    kernel = 1.0 / (b[None, :] + lam**2 + a[:, None])
    return ModuleOperator(u @ ((u.conj().T @ middle @ v) * kernel) @ v.conj().T, S.k)


@dataclass
class DunfordResidual:
    """R_lambda = (S + T + i lambda) P_lambda - I and the corrected resolvent."""

    lam: float
    nodes: int
    r_norm: float
    """||R_lambda||."""

    corrected_error: Optional[float]
    """||P_lambda (I + R_lambda)^-1 - (S + T + i lambda)^-1||, None if I + R is singular."""

    refinement_change: float
    """||P_lambda(nodes) - P_lambda(2 nodes)||."""

    refinement_next: float
    """||P_lambda(2 nodes) - P_lambda(4 nodes)||."""

    refinement_floor: float
    """Change below which the quadrature counts as converged."""

    tail_ratio: float
    """Integrand norm at r_max relative to its maximum on the small arc."""

    residual: np.ndarray = field(repr=False, default_factory=lambda: np.zeros((0, 0)))

    def as_row(self) -> List[Any]:
        return [self.lam, self.r_norm, self.corrected_error, self.nodes, self.refinement_change]

    def refinement_converges(self) -> bool:
        """A further doubling shrinks the change fourfold, or the change sits at the floor."""
        if self.refinement_next <= self.refinement_floor:
            return True
        return self.refinement_change >= REFINEMENT_FACTOR * self.refinement_next

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda": self.lam,
            "nodes": self.nodes,
            "r_norm": self.r_norm,
            "corrected_error": self.corrected_error,
            "refinement_change": self.refinement_change,
            "refinement_next": self.refinement_next,
            "tail_ratio": self.tail_ratio,
        }


def _integrand_norm(s: np.ndarray, t: np.ndarray, lam: float, z: complex) -> float:
    identity = np.eye(s.shape[0])
    middle = s + t - 1j * lam * identity
    return operator_norm(
        inverse(z * identity + lam**2 * identity + s @ s) @ middle @ inverse(z * identity - t @ t)
    )


def dunford_residual(
    S: Any,
    T: Any,
    lam: float,
    node_count: int = DEFAULT_NODES,
    quad_tol: float = DEFAULT_QUAD_TOL,
) -> DunfordResidual:
    """
    Evaluate R_lambda, the corrected resolvent error and a refinement audit.

    Raises:
        ParameterException: If lambda <= 0
        QuadratureException: If node_count < 16
    """
    lam = _check_lambda(lam)
    S = self_adjoint(S)
    T = self_adjoint(T)
    s, t = S.entries, T.entries
    identity = np.eye(S.dim)
    contour = build_contour(S, T, lam, node_count)
    p = dunford_p_lambda(S, T, lam, contour).entries
    p_fine = dunford_p_lambda(S, T, lam, build_contour(S, T, lam, 2 * node_count)).entries
    p_finer = dunford_p_lambda(S, T, lam, build_contour(S, T, lam, 4 * node_count)).entries
    shifted = s + t + 1j * lam * identity
    residual = shifted @ p - identity
    direct = inverse(shifted, parameter=1j * lam)
    try:
        corrected: Optional[float] = operator_norm(p @ inverse(identity + residual) - direct)
    except SingularOperatorException:
        corrected = None
    refinement = operator_norm(p - p_fine)
    if refinement > quad_tol:
        logger.warning("quadrature refinement change %.3e above %.1e", refinement, quad_tol)
    arc_peak = max(
        _integrand_norm(s, t, lam, contour.r * complex(math.cos(phi), math.sin(phi)))
        for phi in np.linspace(contour.theta, 2 * math.pi - contour.theta, 9)
    )
    tail = _integrand_norm(s, t, lam, contour.r_max) / max(arc_peak, 1e-300)
    result = DunfordResidual(
        lam=lam,
        nodes=len(contour),
        r_norm=operator_norm(residual),
        corrected_error=corrected,
        refinement_change=refinement,
        refinement_next=operator_norm(p_fine - p_finer),
        refinement_floor=REFINEMENT_FLOOR * operator_norm(p_finer),
        tail_ratio=tail,
        residual=residual,
    )
    logger.debug("dunford residual at lambda=%.3g: %s", lam, result.to_dict())
    return result


@dataclass
class DunfordSweep:
    rows: List[DunfordResidual] = field(default_factory=list)

    @property
    def threshold(self) -> Optional[float]:
        """First lambda of the sweep with ||R_lambda|| < 1."""
        for row in self.rows:
            if row.r_norm < 1.0:
                return row.lam
        return None

    def to_csv_rows(self) -> List[List[Any]]:
        return [row.as_row() for row in self.rows]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "columns": ["lambda", "r_norm", "corrected_resolvent_error", "nodes", "refinement"],
            "rows": self.to_csv_rows(),
            "threshold": self.threshold,
        }


def dunford_sweep(
    S: Any,
    T: Any,
    lambda_grid: Sequence[float] = DEFAULT_DUNFORD_GRID,
    node_count: int = DEFAULT_NODES,
) -> DunfordSweep:
    sweep = DunfordSweep(
        rows=[dunford_residual(S, T, lam, node_count) for lam in sorted(lambda_grid)]
    )
    logger.info("dunford sweep: threshold %s", sweep.threshold)
    return sweep


def normalizing_b(D: Any) -> ModuleOperator:
    """Bounded transform D (1 + D^2)^-1/2, a normalizing function with values in (-1, 1)."""
    return func_calc(self_adjoint(D), lambda x: x / np.sqrt(1 + x**2))
