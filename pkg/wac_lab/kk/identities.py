"""Exact operator identities behind the positivity estimate for chi(S) and chi(S + T).

On the doubled module E (+) E the pair acts diagonally, omega = sigma_3 is the volume element of
Cl(2), and D_+- = S +- omega T, so D_+ = diag(S + T, S - T).
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Sequence

import numpy as np

from ..algebra import (
    ResidualReport,
    anticommutator,
    as_array,
    inverse,
    norm_scale,
    operator_norm,
)
from ..clifford import clifford_action
from ..exceptions import ParameterException

logger = logging.getLogger(__name__)

DEFAULT_MU_GRID: Sequence[float] = tuple(np.geomspace(1e-2, 1e2, 50))


class DoubledPair(NamedTuple):
    s: np.ndarray
    t: np.ndarray
    omega: np.ndarray
    k: np.ndarray
    """Doubled anticommutator diag(K, K)."""

    @property
    def d_plus(self) -> np.ndarray:
        return self.s + self.omega @ self.t

    @property
    def d_minus(self) -> np.ndarray:
        return self.s - self.omega @ self.t


def doubled_pair(S: Any, T: Any) -> DoubledPair:
    s, t = as_array(S), as_array(T)
    n = s.shape[0]
    identity = np.eye(2)
    return DoubledPair(
        s=np.kron(identity, s),
        t=np.kron(identity, t),
        omega=clifford_action(3, n),
        k=np.kron(identity, anticommutator(s, t)),
    )


def _check_mu(mu: float) -> float:
    mu = float(mu)
    if not mu > 0:
        raise ParameterException("mu must be positive", {"mu": mu})
    return mu


def _damped(d: np.ndarray, mu: float) -> np.ndarray:
    """(1 + mu^2 d^2)^-1."""
    return inverse(np.eye(d.shape[0]) + mu**2 * (d @ d), parameter=mu)


def k_mu(S: Any, T: Any, mu: float) -> np.ndarray:
    """K_mu = (1 + mu^2 D_-^2)^-1 - (1 + mu^2 D_+^2)^-1 with D_+- = S +- T."""
    mu = _check_mu(mu)
    s, t = as_array(S), as_array(T)
    return _damped(s - t, mu) - _damped(s + t, mu)


def k_mu_identities(S: Any, T: Any, mu: float) -> ResidualReport:
    """
    Compare K_mu with its two factored forms.

    K_mu = 2 (1 + mu^2 D_+^2)^-1 mu^2 K (1 + mu^2 D_-^2)^-1
         = 2 (1 + mu^2 D_-^2)^-1 mu^2 K (1 + mu^2 D_+^2)^-1

    Raises:
        ParameterException: If mu <= 0
    """
    mu = _check_mu(mu)
    s, t = as_array(S), as_array(T)
    k = anticommutator(s, t)
    plus = _damped(s + t, mu)
    minus = _damped(s - t, mu)
    definition = minus - plus
    plus_first = 2 * mu**2 * plus @ k @ minus
    minus_first = 2 * mu**2 * minus @ k @ plus
    scale = norm_scale(mu**2 * k, mu**2 * (s + t) @ (s + t))
    report = ResidualReport()
    report.add("plus_first", definition, plus_first, scale)
    report.add("minus_first", definition, minus_first, scale)
    report.add("symmetry", plus_first, minus_first, scale)
    return report


@dataclass
class KMuSweep:
    """Sup over a mu grid of ||K_mu||, ||D_+ K_mu|| and ||D_- K_mu||."""

    rows: List[Dict[str, float]] = field(default_factory=list)

    @property
    def sup_k(self) -> float:
        return max((row["k"] for row in self.rows), default=0.0)

    @property
    def sup_d_plus(self) -> float:
        return max((row["d_plus_k"] for row in self.rows), default=0.0)

    @property
    def sup_d_minus(self) -> float:
        return max((row["d_minus_k"] for row in self.rows), default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rows": self.rows,
            "sup_k": self.sup_k,
            "sup_d_plus_k": self.sup_d_plus,
            "sup_d_minus_k": self.sup_d_minus,
        }


def k_mu_sweep(S: Any, T: Any, mu_grid: Sequence[float] = DEFAULT_MU_GRID) -> KMuSweep:
    s, t = as_array(S), as_array(T)
    sweep = KMuSweep()
    for mu in mu_grid:
        value = k_mu(s, t, mu)
        row = {
            "mu": float(mu),
            "k": operator_norm(value),
            "d_plus_k": operator_norm((s + t) @ value),
            "d_minus_k": operator_norm((s - t) @ value),
        }
        logger.debug("K_mu sweep: %s", row)
        sweep.rows.append(row)
    logger.info(
        "K_mu sweep over %d points: sup ||K|| %.3g, sup ||D+K|| %.3g",
        len(sweep.rows),
        sweep.sup_k,
        sweep.sup_d_plus,
    )
    return sweep


def r_mu(pair: DoubledPair, mu: float) -> np.ndarray:
    """R_mu = omega T (1 + mu^2 D^2)^-1 S + S (1 + mu^2 D^2)^-1 omega T on the doubled module."""
    damped = _damped(pair.d_plus, mu)
    omega_t = pair.omega @ pair.t
    return omega_t @ damped @ pair.s + pair.s @ damped @ omega_t


def r_mu_closed_form(pair: DoubledPair, mu: float) -> np.ndarray:
    """
    Closed form of omega R_mu:

        (1 + mu^2 D_+^2)^-1 K (1 + mu^2 D_-^2)^-1
            + mu D_- (1 + mu^2 D_+^2)^-1 K (1 + mu^2 D_-^2)^-1 mu D_-
    """
    plus = _damped(pair.d_plus, mu)
    minus = _damped(pair.d_minus, mu)
    scaled = mu * pair.d_minus
    return plus @ pair.k @ minus + scaled @ plus @ pair.k @ minus @ scaled


def r_mu_replaced(pair: DoubledPair, mu: float) -> np.ndarray:
    """The closed form with (1 + mu^2 D_+^2)^-1 replaced by (1 + mu^2 D_-^2)^-1."""
    minus = _damped(pair.d_minus, mu)
    scaled = mu * pair.d_minus
    return minus @ pair.k @ minus + scaled @ minus @ pair.k @ minus @ scaled


def r_mu_identity(S: Any, T: Any, mu: float) -> ResidualReport:
    """
    Check omega R_mu against its closed form and the scaling R(1, mu S, mu T) = mu^2 R(mu, S, T).

    Raises:
        ParameterException: If mu <= 0
    """
    mu = _check_mu(mu)
    pair = doubled_pair(S, T)
    value = r_mu(pair, mu)
    scale = norm_scale(pair.s, pair.t, mu * pair.d_minus, mu * pair.d_minus, pair.k)
    report = ResidualReport()
    report.add("closed_form", pair.omega @ value, r_mu_closed_form(pair, mu), scale)
    rescaled = doubled_pair(mu * as_array(S), mu * as_array(T))
    report.add("scaling", r_mu(rescaled, 1.0), mu**2 * value, scale * max(mu**2, 1.0))
    logger.debug("R_mu identity at mu=%.3g: %s", mu, report.residuals)
    return report


def squared_resolvent_commutators(S: Any, T: Any) -> ResidualReport:
    """
    Commutator identities of sigma_j S and sigma_j T with D = S + omega T, j = 1, 2.

    [sigma_j T, D]_+ = sigma_j K and [sigma_j S, D]_- = -omega sigma_j K, together with the
    resolvent forms of [(1 + D^2)^-1, a]_- for a = sigma_j S and a = sigma_j T.
    """
    pair = doubled_pair(S, T)
    n = as_array(S).shape[0]
    d = pair.d_plus
    damped = _damped(d, 1.0)
    scale = norm_scale(pair.s, pair.t, d, d)
    report = ResidualReport()
    report.add("volume_element", d @ pair.omega, pair.omega @ pair.s + pair.t, scale)
    for j in (1, 2):
        sigma = clifford_action(j, n)
        sigma_s = sigma @ pair.s
        sigma_t = sigma @ pair.t
        anti_t = sigma_t @ d + d @ sigma_t
        comm_s = sigma_s @ d - d @ sigma_s
        report.add(f"clifford_swap[{j}]", d @ sigma, sigma @ pair.d_minus, scale)
        report.add(f"anticommutator_t[{j}]", anti_t, sigma @ pair.k, scale)
        report.add(f"commutator_s[{j}]", comm_s, -pair.omega @ sigma @ pair.k, scale)
        for name, a in (("s", sigma_s), ("t", sigma_t)):
            lhs = damped @ a - a @ damped
            square = d @ d
            report.add(
                f"sandwich_{name}[{j}]", lhs, damped @ (a @ square - square @ a) @ damped, scale
            )
        report.add(
            f"resolvent_s[{j}]",
            damped @ sigma_s - sigma_s @ damped,
            damped @ comm_s @ d @ damped + d @ damped @ comm_s @ damped,
            scale,
        )
        report.add(
            f"resolvent_t[{j}]",
            damped @ sigma_t - sigma_t @ damped,
            damped @ anti_t @ d @ damped - d @ damped @ anti_t @ damped,
            scale,
        )
    return report
