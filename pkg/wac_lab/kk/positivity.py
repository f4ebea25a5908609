"""Form bounds for the anticommutator relative to |S + T| and the rescaling positivity procedure.

For D = S + T and K = [S, T]_+ the constant ||P_0|| = ||K (1 + |D|)^-1|| bounds K from both
sides by (1 + |D|). Rescaling the pair by t < 1 shrinks it, and once it is below
2 kappa / pi^3 the graded commutator [chi(tD), chi(tS)]_+ is expected to stay above -kappa.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Sequence

import numpy as np
from typing_extensions import Literal

from ..algebra import (
    anticommutator,
    as_array,
    func_calc,
    inverse,
    min_eigenvalue,
    norm_scale,
    operator_norm,
    self_adjoint,
)
from ..exceptions import ParameterException
from ..square_sum import p0_norm
from .exceptions import KasparovDataException
from .identities import doubled_pair, r_mu_closed_form, r_mu_replaced
from .modules import TensorProduct, lift_s
from .normalizing import chi, unit_interval_rule

logger = logging.getLogger(__name__)

DEFAULT_KAPPA = 0.1
BISECTION_STEPS = 60
CORRECTION_NODES = 32
CONNES_SKANDALIS_KAPPA_LIMIT = 2.0

RescaleStatus = Literal["success", "failure", "exhausted"]


def _absolute_value(D: Any) -> np.ndarray:
    return as_array(func_calc(self_adjoint(D), np.abs))


@dataclass
class FormBoundReport:
    """Slacks of +-K <= C (I + |D|), optionally sandwiched by (1 + mu^2 D^2)^-1."""

    constant: float
    """C = ||P_0||."""

    rows: List[Dict[str, Any]] = field(default_factory=list)
    """(mu, slack_plus, slack_minus); mu is None for the unsandwiched bound."""

    scale: float = 1.0

    @property
    def min_slack(self) -> float:
        return min(
            (min(row["slack_plus"], row["slack_minus"]) for row in self.rows), default=0.0
        )

    def holds(self, tol: float = 1e-9) -> bool:
        return self.min_slack >= -tol * self.scale

    def to_dict(self) -> Dict[str, Any]:
        return {
            "constant": self.constant,
            "rows": self.rows,
            "min_slack": self.min_slack,
            "scale": self.scale,
        }

    def __str__(self) -> str:
        mark = "✓" if self.holds() else "✗"
        return f"Form bound C={self.constant:.6g} min slack {self.min_slack:.3e} {mark}"


def kk2_inequality(S: Any, T: Any) -> FormBoundReport:
    """lambda_min of C (I + |D|) -+ K with C = ||P_0||."""
    s, t = as_array(S), as_array(T)
    k = anticommutator(s, t)
    constant = p0_norm(s, t)
    bound = constant * (np.eye(s.shape[0]) + _absolute_value(s + t))
    report = FormBoundReport(constant=constant, scale=norm_scale(k))
    report.rows.append(
        {
            "mu": None,
            "slack_plus": min_eigenvalue(bound - k),
            "slack_minus": min_eigenvalue(bound + k),
        }
    )
    logger.debug("%s", report)
    return report


def kk3_bound(S: Any, T: Any, mu_grid: Sequence[float] = (0.1, 1.0, 10.0)) -> FormBoundReport:
    """
    Check +-(1 + mu^2 D^2)^-1 K (1 + mu^2 D^2)^-1 <= C (1 + |D|) (1 + mu^2 D^2)^-2 per mu.

    Raises:
        ParameterException: If a grid value is not positive
    """
    s, t = as_array(S), as_array(T)
    d = s + t
    identity = np.eye(s.shape[0])
    k = anticommutator(s, t)
    constant = p0_norm(s, t)
    modulus = _absolute_value(d)
    report = FormBoundReport(constant=constant, scale=norm_scale(k))
    for mu in mu_grid:
        if not mu > 0:
            raise ParameterException("mu must be positive", {"mu": mu})
        damped = inverse(identity + mu**2 * (d @ d), parameter=mu)
        sandwich = damped @ k @ damped
        bound = constant * (identity + modulus) @ damped @ damped
        report.rows.append(
            {
                "mu": float(mu),
                "slack_plus": min_eigenvalue(bound - sandwich),
                "slack_minus": min_eigenvalue(bound + sandwich),
            }
        )
    logger.info("%s", report)
    return report


@dataclass
class RescaleReport:
    """Outcome of rescaling a pair until [chi(tD), chi(tS)]_+ >= -kappa."""

    kappa: float
    epsilon_used: float
    """2 kappa / pi^3."""

    t_star: float
    p0_norm: float
    """||P_0|| of the rescaled pair."""

    lambda_min: float
    """lambda_min of [chi(tD), chi(tS)]_+ on the doubled module."""

    lambda_min_corrected: float
    """lambda_min after removing the replacement perturbation."""

    status: RescaleStatus = "failure"
    iterations: int = 0

    @property
    def success(self) -> bool:
        return self.status == "success"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kappa": self.kappa,
            "epsilon_used": self.epsilon_used,
            "t_star": self.t_star,
            "p0_norm": self.p0_norm,
            "lambda_min": self.lambda_min,
            "lambda_min_corrected": self.lambda_min_corrected,
            "status": self.status,
            "iterations": self.iterations,
        }

    def __str__(self) -> str:
        mark = "✓" if self.success else "✗"
        return (
            f"Rescale t*={self.t_star:.4g} lambda_min={self.lambda_min:.3e} "
            f"(kappa {self.kappa:g}) {mark}"
        )


def _graded_chi_commutator(s: np.ndarray, t: np.ndarray) -> np.ndarray:
    pair = doubled_pair(s, t)
    chi_d = as_array(chi(pair.d_plus))
    chi_s = as_array(chi(pair.s))
    return chi_d @ chi_s + chi_s @ chi_d


def replacement_correction(S: Any, T: Any, nodes: int = CORRECTION_NODES) -> np.ndarray:
    """
    (4/pi^2) * double integral over [0, 1]^2 of P_l E_mu P_l + Q_l E_mu Q_l.

    E_mu = omega (closed form - replaced form) is the perturbation dropped when
    (1 + mu^2 D_+^2)^-1 is replaced by (1 + mu^2 D_-^2)^-1, P_l = (1 + l^2 S^2)^-1 and
    Q_l = l S (1 + l^2 S^2)^-1.
    """
    pair = doubled_pair(S, T)
    mu_nodes, mu_weights = unit_interval_rule(nodes)
    averaged = np.zeros_like(pair.s)
    for mu, weight in zip(mu_nodes, mu_weights):
        averaged = averaged + weight * (
            pair.omega @ (r_mu_closed_form(pair, mu) - r_mu_replaced(pair, mu))
        )
    identity = np.eye(pair.s.shape[0])
    square = pair.s @ pair.s
    total = np.zeros_like(averaged)
    for lam, weight in zip(mu_nodes, mu_weights):
        p = inverse(identity + lam**2 * square, parameter=lam)
        q = lam * pair.s @ p
        total = total + weight * (p @ averaged @ p + q @ averaged @ q)
    return 4 / math.pi**2 * total


def rescale_for_kappa(
    S: Any, T: Any, kappa: float = DEFAULT_KAPPA, steps: int = BISECTION_STEPS
) -> RescaleReport:
    """
    Find the largest t in (0, 1] with ||P_0(tS, tT)|| <= 2 kappa / pi^3 and test positivity.

    Args:
        S: First operator of a weakly anticommuting pair
        T: Second operator
        kappa: Target lower bound, > 0
        steps: Bisection steps

    Returns:
        RescaleReport; success iff lambda_min >= -kappa

    Raises:
        ParameterException: If kappa <= 0
    """
    if not kappa > 0:
        raise ParameterException("kappa must be positive", {"kappa": kappa})
    s, t = as_array(S), as_array(T)
    epsilon = 2 * kappa / math.pi**3
    iterations = 0
    high = 1.0
    if p0_norm(s, t) <= epsilon:
        t_star = 1.0
    else:
        low = 0.0
        for iterations in range(1, steps + 1):
            middle = (low + high) / 2
            if p0_norm(middle * s, middle * t) <= epsilon:
                low = middle
            else:
                high = middle
        t_star = low
    if t_star == 0.0:
        logger.warning("rescaling bisection exhausted after %d steps", iterations)
        return RescaleReport(
            kappa=kappa,
            epsilon_used=epsilon,
            t_star=high,
            p0_norm=p0_norm(high * s, high * t),
            lambda_min=math.nan,
            lambda_min_corrected=math.nan,
            status="exhausted",
            iterations=iterations,
        )
    scaled_s, scaled_t = t_star * s, t_star * t
    commutator = _graded_chi_commutator(scaled_s, scaled_t)
    lambda_min = min_eigenvalue(commutator)
    corrected = min_eigenvalue(commutator - replacement_correction(scaled_s, scaled_t))
    report = RescaleReport(
        kappa=kappa,
        epsilon_used=epsilon,
        t_star=t_star,
        p0_norm=p0_norm(scaled_s, scaled_t),
        lambda_min=lambda_min,
        lambda_min_corrected=corrected,
        status="success" if lambda_min >= -kappa else "failure",
        iterations=iterations,
    )
    logger.info("%s", report)
    return report


@dataclass
class ConnesSkandalisReport:
    """Finite-dimensional diagnostics of the connection and positivity conditions."""

    connection_defects: List[float]
    """||y -> gamma(x) (x) T_Y y - T (x (x) y)|| per homogeneous x."""

    positivity: List[float]
    """lambda_min of a* [chi(S), chi(D)]_+ a + kappa a* a per algebra element a."""

    kappa: float

    @property
    def kappa_admissible(self) -> bool:
        return 0.0 <= self.kappa < CONNES_SKANDALIS_KAPPA_LIMIT

    @property
    def connection_defect(self) -> float:
        return max(self.connection_defects, default=0.0)

    @property
    def min_positivity(self) -> float:
        return min(self.positivity, default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "connection_defect": self.connection_defect,
            "connection_defects": self.connection_defects,
            "positivity": self.positivity,
            "min_positivity": self.min_positivity,
            "kappa": self.kappa,
            "kappa_admissible": self.kappa_admissible,
            "locally_compact": "vacuous in finite dimension",
        }


def connes_skandalis_check(
    product: TensorProduct,
    s_x: Any,
    t_y: Any,
    connection: Any,
    kappa: float,
    homogeneous: Sequence[Any],
    algebra: Mapping[str, Any],
) -> ConnesSkandalisReport:
    """
    Evaluate the connection defect and the positivity condition on E = X (x)_B Y.

    Args:
        product: Interior tensor product
        s_x: Self-adjoint operator on X; lifted to S = S_X (x) 1
        t_y: Self-adjoint operator on Y
        connection: Candidate T on E, supplied by the caller
        kappa: Positivity margin
        homogeneous: Homogeneous elements x of X
        algebra: Named operators a on E

    Raises:
        KasparovDataException: If shapes disagree or an element of X is not homogeneous
    """
    s = as_array(lift_s(s_x, product))
    t_e = as_array(connection)
    t_y = as_array(t_y)
    dim = product.module.dim
    if t_e.shape != (dim, dim):
        raise KasparovDataException("Connection does not act on E", {"shape": t_e.shape})
    if t_y.shape != (product.y.dim, product.y.dim):
        raise KasparovDataException("T_Y does not act on Y", {"shape": t_y.shape})
    if not kappa >= 0:
        raise ParameterException("kappa must be nonnegative", {"kappa": kappa})
    if kappa >= CONNES_SKANDALIS_KAPPA_LIMIT:
        logger.warning("kappa=%g outside [0, 2)", kappa)

    defects = []
    for x in homogeneous:
        if product.x.degree(x) is None:
            raise KasparovDataException("Element of X is not homogeneous")
        graded = product.x.grading @ as_array(x)
        difference = product.embedding_from(graded) @ t_y - t_e @ product.embedding_from(x)
        defects.append(operator_norm(difference))

    chi_s = as_array(chi(s))
    chi_d = as_array(chi(self_adjoint(s + t_e)))
    commutator = chi_s @ chi_d + chi_d @ chi_s
    positivity = []
    for name, a in algebra.items():
        a = as_array(a)
        if a.shape != (dim, dim):
            raise KasparovDataException("Algebra element does not act on E", {"element": name})
        positivity.append(
            min_eigenvalue(a.conj().T @ commutator @ a + kappa * a.conj().T @ a)
        )
    report = ConnesSkandalisReport(
        connection_defects=defects, positivity=positivity, kappa=float(kappa)
    )
    logger.info("Connes-Skandalis diagnostics: %s", report.to_dict())
    return report


def p0_scaling(S: Any, T: Any, ts: Sequence[float]) -> List[float]:
    """||P_0(tS, tT)|| for each t."""
    s, t = as_array(S), as_array(T)
    return [p0_norm(scale * s, scale * t) for scale in ts]
