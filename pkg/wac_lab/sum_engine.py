"""Approximants of the sum S + T and their resolvent bounds.

For imaginary lambda the approximant

    A_lambda = S + T + TS / lambda,   A_lambda + lambda = lambda^-1 (T + lambda)(S + lambda)

is invertible after shifting by lambda, and (A_lambda + mu)^-1 converges in norm to
(S + T + mu)^-1 as |lambda| grows, with mu / lambda > 0.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import (
    ModuleOperator,
    ModuleVector,
    ResidualReport,
    as_array,
    inverse,
    norm_scale,
    operator_norm,
)
from .certifier import WacCertificate
from .exceptions import ParameterException

logger = logging.getLogger(__name__)

DEFAULT_SUM_GRID: Tuple[float, ...] = tuple(10.0**p for p in range(1, 7))
"""|lambda| values of a convergence sweep."""

SQRT2 = math.sqrt(2.0)

CSV_COLUMNS = (
    "lambda_abs",
    "inv_norm",
    "s_norm",
    "t_norm",
    "ts_norm",
    "comm_norm",
    "residual",
    "theorem_bound",
)


def _check_imaginary(value: complex, name: str) -> complex:
    value = complex(value)
    if value == 0:
        raise ParameterException(f"{name} must be nonzero", {name: value})
    if abs(value.real) > 1e-15 * abs(value):
        raise ParameterException(f"{name} must be purely imaginary", {name: value})
    return 1j * value.imag


def lambda_for(mu: complex, value: float) -> complex:
    """Imaginary lambda of modulus value on the same half-line as mu."""
    mu = _check_imaginary(mu, "mu")
    return 1j * abs(value) * math.copysign(1.0, mu.imag)


def _check_admissible(lam: complex, mu: complex) -> Tuple[complex, complex]:
    lam = _check_imaginary(lam, "lambda")
    mu = _check_imaginary(mu, "mu")
    if lam.imag * mu.imag <= 0:
        raise ParameterException("lambda and mu must lie on the same imaginary half-line")
    if abs(lam) <= abs(mu):
        raise ParameterException(
            "|lambda| must exceed |mu|", {"lambda_abs": abs(lam), "mu_abs": abs(mu)}
        )
    return lam, mu


def a_lambda(S: Any, T: Any, lam: complex) -> ModuleOperator:
    """
    The approximant S + T + TS / lambda.

    Raises:
        ParameterException: If lambda is zero

    Example:
        >>> a_lambda(np.zeros((2, 2)), sigma3, 5j).entries
        array([[ 1.+0.j,  0.+0.j],
               [ 0.+0.j, -1.+0.j]])
    """
    if lam == 0:
        raise ParameterException("lambda must be nonzero", {"lambda": lam})
    s, t = as_array(S), as_array(T)
    k = S.k if isinstance(S, ModuleOperator) else 1
    return ModuleOperator(s + t + t @ s / lam, k)


def sum_identity_residuals(S: Any, T: Any, lam: complex, mu: complex) -> ResidualReport:
    """
    Residuals of the exact identities around A_lambda.

        shift_factorization:  A_lambda + lambda = lambda^-1 (T + lambda)(S + lambda)
        sum_times_resolvent:  (S+T+mu)(A_lambda+mu)^-1 = I - (TS/lambda)(A_lambda+mu)^-1
        difference:           (A_lambda+mu)^-1 - (S+T+mu)^-1
                                  = -(A_lambda+mu)^-1 (TS/lambda) (S+T+mu)^-1
        anticommutator:       S (A_lambda+mu)^-1 + M^-1 S = M^-1 [S,T]_+ (A_lambda+mu)^-1
                              with M = T - S - ST/lambda - mu

    Raises:
        SingularOperatorException: If a required inverse does not exist
    """
    s, t = as_array(S), as_array(T)
    identity = np.eye(s.shape[0])
    a = as_array(a_lambda(s, t, lam))
    a_inv = inverse(a + mu * identity, parameter=mu)
    sum_inv = inverse(s + t + mu * identity, parameter=mu)
    ts = t @ s / lam
    m_inv = inverse(t - s - s @ t / lam - mu * identity, parameter=mu)
    scale = norm_scale(s, t, a_inv, sum_inv)

    report = ResidualReport()
    report.add(
        "shift_factorization",
        a + lam * identity,
        (t + lam * identity) @ (s + lam * identity) / lam,
        norm_scale(s, t) * max(abs(lam), 1.0),
    )
    report.add("sum_times_resolvent", (s + t + mu * identity) @ a_inv, identity - ts @ a_inv, scale)
    report.add("difference", a_inv - sum_inv, -a_inv @ ts @ sum_inv, scale)
    report.add(
        "anticommutator",
        s @ a_inv + m_inv @ s,
        m_inv @ (s @ t + t @ s) @ a_inv,
        scale * norm_scale(m_inv),
    )
    return report


@dataclass
class ResolventEquationReport:
    """Resolvent equation linking (A_lambda + mu)^-1 to B_lambda^-1 = (A_lambda + lambda)^-1."""

    report: ResidualReport
    """Residual of (A+mu)^-1 = B^-1 - (mu - lambda) B^-1 (A+mu)^-1."""

    neumann: bool
    """Whether |lambda - mu| < |lambda|, so the Neumann series for A + mu converges."""

    scaled_b_inverse: float
    """|lambda| ||B_lambda^-1||, at most 1."""

    @property
    def holds(self) -> bool:
        return self.report.passed() and self.scaled_b_inverse <= 1.0 + 1e-12

    def to_dict(self) -> Dict[str, Any]:
        return {
            "residuals": self.report.to_dict(),
            "neumann": self.neumann,
            "scaled_b_inverse": self.scaled_b_inverse,
            "holds": self.holds,
        }


def resolvent_equation_residual(
    S: Any, T: Any, lam: complex, mu: complex
) -> ResolventEquationReport:
    """Check the resolvent equation for the shifted approximant."""
    s, t = as_array(S), as_array(T)
    identity = np.eye(s.shape[0])
    a = as_array(a_lambda(s, t, lam))
    b_inv = inverse(a + lam * identity, parameter=lam)
    a_inv = inverse(a + mu * identity, parameter=mu)
    report = ResidualReport()
    report.add(
        "resolvent_equation",
        a_inv,
        b_inv - (mu - lam) * b_inv @ a_inv,
        norm_scale(b_inv, a_inv) * max(abs(mu - lam), 1.0),
    )
    return ResolventEquationReport(
        report=report,
        neumann=abs(lam - mu) < abs(lam),
        scaled_b_inverse=abs(lam) * operator_norm(b_inv),
    )


@dataclass
class FundamentalBounds:
    """The five resolvent bounds of the approximant at one (lambda, mu)."""

    lam: complex
    mu: complex

    inv_norm: float
    """||(A_lambda + mu)^-1||, bounded by sqrt(2)/|mu|."""

    s_norm: float
    """||S (A_lambda + mu)^-1||, bounded by sqrt(2)."""

    t_norm: float
    """||T (A_lambda + mu)^-1||, bounded by sqrt(2)."""

    ts_norm: float
    """||(TS/lambda)(A_lambda + mu)^-1||, bounded by 1."""

    comm_norm: float
    """||[S,T]_+ (A_lambda + mu)^-1||, bounded through the certificate."""

    comm_limit: Optional[float] = None
    """sqrt(2 C0/|mu|^2 + 2 C1 + 2 C2), None without a certificate."""

    @property
    def limits(self) -> Dict[str, Optional[float]]:
        return {
            "inv_norm": SQRT2 / abs(self.mu),
            "s_norm": SQRT2,
            "t_norm": SQRT2,
            "ts_norm": 1.0,
            "comm_norm": self.comm_limit,
        }

    def violations(self, rtol: float = 1e-9) -> Dict[str, float]:
        """Relative excess value / limit - 1 of every bound that fails."""
        failures = {}
        for name, limit in self.limits.items():
            if limit is None:
                continue
            value = getattr(self, name)
            if value > limit * (1.0 + rtol):
                failures[name] = value / limit - 1.0 if limit > 0 else math.inf
        return failures

    @property
    def passed(self) -> bool:
        return not self.violations()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda_abs": abs(self.lam),
            "mu_abs": abs(self.mu),
            "inv_norm": self.inv_norm,
            "s_norm": self.s_norm,
            "t_norm": self.t_norm,
            "ts_norm": self.ts_norm,
            "comm_norm": self.comm_norm,
            "comm_limit": self.comm_limit,
            "passed": self.passed,
        }


def fundamental_bounds(
    S: Any, T: Any, lam: complex, mu: complex, cert: Optional[WacCertificate] = None
) -> FundamentalBounds:
    """
    Evaluate the five norms controlled by the approximation lemma.

    Args:
        S: Self-adjoint operator
        T: Self-adjoint operator
        lam: Imaginary approximation parameter with |lambda| > |mu|
        mu: Imaginary resolvent parameter on the same half-line as lambda
        cert: Anticommuting certificate supplying the bound on the last norm

    Raises:
        ParameterException: If (lambda, mu) is not admissible
        SingularOperatorException: If A_lambda + mu is singular
    """
    lam, mu = _check_admissible(lam, mu)
    s, t = as_array(S), as_array(T)
    identity = np.eye(s.shape[0])
    a_inv = inverse(as_array(a_lambda(s, t, lam)) + mu * identity, parameter=mu)
    comm_limit = None
    if cert is not None:
        comm_limit = math.sqrt(2 * cert.c0 / abs(mu) ** 2 + 2 * cert.c1 + 2 * cert.c2)
    bounds = FundamentalBounds(
        lam=lam,
        mu=mu,
        inv_norm=operator_norm(a_inv),
        s_norm=operator_norm(s @ a_inv),
        t_norm=operator_norm(t @ a_inv),
        ts_norm=operator_norm(t @ s @ a_inv / lam),
        comm_norm=operator_norm((s @ t + t @ s) @ a_inv),
        comm_limit=comm_limit,
    )
    logger.debug("bounds at |lambda|=%.3g |mu|=%.3g: %s", abs(lam), abs(mu), bounds.violations())
    return bounds


@dataclass
class Mu0Result:
    """Smallest grid mu from which all five bounds hold."""

    mu0: Optional[float]
    """|mu0|, None when not found on the grid."""

    worst_violation: float = 0.0
    """Largest relative excess seen above the threshold candidates."""

    rows: List[FundamentalBounds] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mu0": self.mu0,
            "worst_violation": self.worst_violation,
            "rows": [row.to_dict() for row in self.rows],
        }


def mu0_threshold(
    S: Any,
    T: Any,
    mu_grid: Sequence[float],
    lambda_grid: Sequence[float] = DEFAULT_SUM_GRID,
    cert: Optional[WacCertificate] = None,
) -> Mu0Result:
    """
    Sweep |mu| and |lambda| on positive imaginary half-lines and locate mu0.

    mu0 is the smallest grid |mu| such that, for it and every larger grid |mu|, the bounds
    hold at every grid |lambda| > |mu|.

    Raises:
        ParameterException: If the mu grid is empty
    """
    grid = sorted(abs(float(v)) for v in mu_grid)
    if not grid:
        raise ParameterException("mu grid must be nonempty")
    rows: List[FundamentalBounds] = []
    ok: List[bool] = []
    worst: List[float] = []
    for value in grid:
        mu = 1j * value
        point_ok = True
        point_worst = 0.0
        for lam_value in sorted(lambda_grid):
            if lam_value <= value:
                continue
            bounds = fundamental_bounds(S, T, 1j * lam_value, mu, cert)
            rows.append(bounds)
            failures = bounds.violations()
            if failures:
                point_ok = False
                point_worst = max(point_worst, max(failures.values()))
        ok.append(point_ok)
        worst.append(point_worst)

    for index, value in enumerate(grid):
        if all(ok[index:]):
            logger.info("mu0 = %.3g", value)
            return Mu0Result(mu0=value, worst_violation=max(worst[index:]), rows=rows)
    logger.warning("mu0 not found on grid up to %.3g", grid[-1])
    return Mu0Result(mu0=None, worst_violation=max(worst), rows=rows)


@dataclass
class ResolventNetEntry:
    lambda_abs: float
    inv_norm: float
    s_norm: float
    t_norm: float
    ts_norm: float
    comm_norm: float
    residual: float
    """||(A_lambda + mu)^-1 - (S + T + mu)^-1||."""

    theorem_bound: float
    """(C/|lambda|) ||S (S+T+mu)^-1|| with C = ||(A_lambda + mu)^-1 T||."""

    def as_row(self) -> List[float]:
        return [getattr(self, name) for name in CSV_COLUMNS]


@dataclass
class ResolventNetReport:
    """Convergence of the approximant resolvents to the resolvent of S + T."""

    mu: complex
    entries: List[ResolventNetEntry] = field(default_factory=list)
    fitted_rate: Optional[float] = None
    """Least-squares slope of log residual against log |lambda|."""

    exact: bool = False
    """True when TS = 0, so every approximant equals S + T."""

    def to_csv_rows(self) -> List[List[float]]:
        return [entry.as_row() for entry in self.entries]

    def bound_holds(self, rtol: float = 1e-9) -> bool:
        return all(e.residual <= e.theorem_bound * (1 + rtol) + 1e-300 for e in self.entries)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mu_abs": abs(self.mu),
            "fitted_rate": self.fitted_rate,
            "exact": self.exact,
            "columns": list(CSV_COLUMNS),
            "rows": self.to_csv_rows(),
        }

    def __str__(self) -> str:
        if self.exact:
            return f"Resolvent net at |mu|={abs(self.mu):g}: exact (TS = 0)"
        rate = "n/a" if self.fitted_rate is None else f"{self.fitted_rate:.4f}"
        return f"Resolvent net at |mu|={abs(self.mu):g}: {len(self.entries)} points, rate {rate}"


def fitted_rate(abscissae: Sequence[float], values: Sequence[float]) -> Optional[float]:
    """Slope of log(values) against log(abscissae) over the positive values."""
    points = [(x, y) for x, y in zip(abscissae, values) if x > 0 and y > 0]
    if len(points) < 2:
        return None
    xs = np.log([x for x, _ in points])
    ys = np.log([y for _, y in points])
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)


def convergence_sweep(
    S: Any, T: Any, mu: complex, lambda_grid: Sequence[float] = DEFAULT_SUM_GRID
) -> ResolventNetReport:
    """
    Measure ||(A_lambda + mu)^-1 - (S + T + mu)^-1|| along the lambda grid.

    The sign of each lambda follows mu. Grid values with |lambda| <= |mu| are dropped.

    Raises:
        ParameterException: If mu is not imaginary or no admissible grid value remains
    """
    mu = _check_imaginary(mu, "mu")
    values = sorted(abs(float(v)) for v in lambda_grid if abs(float(v)) > abs(mu))
    if not values:
        raise ParameterException("No grid value exceeds |mu|", {"mu_abs": abs(mu)})
    dropped = len(lambda_grid) - len(values)
    if dropped:
        logger.warning("dropped %d grid values with |lambda| <= |mu|", dropped)

    s, t = as_array(S), as_array(T)
    identity = np.eye(s.shape[0])
    sum_inv = inverse(s + t + mu * identity, parameter=mu)
    s_sum = operator_norm(s @ sum_inv)
    exact = operator_norm(t @ s) == 0.0
    report = ResolventNetReport(mu=mu, exact=exact)
    for value in values:
        lam = lambda_for(mu, value)
        bounds = fundamental_bounds(s, t, lam, mu)
        a_inv = inverse(as_array(a_lambda(s, t, lam)) + mu * identity, parameter=mu)
        report.entries.append(
            ResolventNetEntry(
                lambda_abs=value,
                inv_norm=bounds.inv_norm,
                s_norm=bounds.s_norm,
                t_norm=bounds.t_norm,
                ts_norm=bounds.ts_norm,
                comm_norm=bounds.comm_norm,
                residual=0.0 if exact else operator_norm(a_inv - sum_inv),
                theorem_bound=operator_norm(a_inv @ t) * s_sum / value,
            )
        )
    if not exact:
        report.fitted_rate = fitted_rate(
            [e.lambda_abs for e in report.entries], [e.residual for e in report.entries]
        )
    logger.info("%s", report)
    return report


@dataclass
class SmoothingReport:
    """Approximation of x by x_lambda = lambda^2 (T+lambda)^-1 (S+lambda)^-1 x."""

    rows: List[Tuple[float, float, float, float]] = field(default_factory=list)
    """(|lambda|, ||x_lambda - x||, ||S x_lambda - S x||, ||T x_lambda - T x||)."""

    rates: Dict[str, Optional[float]] = field(default_factory=dict)
    """Fitted log-log decay rate of each column."""

    def to_dict(self) -> Dict[str, Any]:
        return {"rows": [list(row) for row in self.rows], "rates": dict(self.rates)}


def smoothing_approx(
    S: Any, T: Any, x: ModuleVector, lambda_grid: Sequence[float] = DEFAULT_SUM_GRID
) -> SmoothingReport:
    """Sweep the smoothing approximation along lambda = i * value."""
    s, t = as_array(S), as_array(T)
    vector = as_array(x)
    identity = np.eye(s.shape[0])
    report = SmoothingReport()
    for value in sorted(abs(float(v)) for v in lambda_grid):
        lam = 1j * value
        smoothed = lam**2 * inverse(t + lam * identity) @ (inverse(s + lam * identity) @ vector)
        diff = smoothed - vector
        report.rows.append(
            (value, operator_norm(diff), operator_norm(s @ diff), operator_norm(t @ diff))
        )
    abscissae = [row[0] for row in report.rows]
    for column, name in enumerate(("x", "s", "t"), start=1):
        report.rates[name] = fitted_rate(abscissae, [row[column] for row in report.rows])
    return report
