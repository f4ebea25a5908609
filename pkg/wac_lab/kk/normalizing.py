"""The normalizing function chi(x) = (2/pi) arctan(x) and its resolvent integral.

chi(D) = (2/pi) * integral over [0, 1] of D (1 + mu^2 D^2)^-1 dmu.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from typing_extensions import Literal

from ..algebra import (
    ModuleOperator,
    as_array,
    func_calc,
    inverse,
    max_eigenvalue,
    operator_norm,
    self_adjoint,
)
from ..exceptions import ParameterException

logger = logging.getLogger(__name__)

MIN_QUADRATURE_NODES = 8
DEFAULT_QUADRATURE_NODES = 200

ChiMethod = Literal["eig", "quadrature"]


def unit_interval_rule(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    if nodes < MIN_QUADRATURE_NODES:
        raise ParameterException(
            "Quadrature needs more nodes", {"nodes": nodes, "minimum": MIN_QUADRATURE_NODES}
        )
    x, w = leggauss(nodes)
    return (x + 1) / 2, w / 2


def chi_scalar(x: Any) -> Any:
    return 2 / math.pi * np.arctan(x)


def chi(
    D: Any, method: ChiMethod = "eig", nodes: int = DEFAULT_QUADRATURE_NODES
) -> ModuleOperator:
    """
    Evaluate chi(D).

    Args:
        D: Self-adjoint operator
        method: "eig" applies (2/pi) arctan to the eigenvalues; "quadrature" sums the
            resolvent integral with Gauss-Legendre nodes on [0, 1]
        nodes: Quadrature node count, at least 8

    Returns:
        chi(D)

    Raises:
        ParameterException: For an unknown method or too few nodes
    """
    D = self_adjoint(D)
    if method == "eig":
        return func_calc(D, chi_scalar)
    if method != "quadrature":
        raise ParameterException("Unknown chi method", {"method": method})
    mu, weights = unit_interval_rule(nodes)
    d = D.entries
    identity = np.eye(D.dim)
    square = d @ d
    total = np.zeros_like(d)
    for node, weight in zip(mu, weights):
        total = total + weight * (d @ inverse(identity + node**2 * square))
    return ModuleOperator(2 / math.pi * total, D.k)


@dataclass
class ArctanBound:
    """lambda_max of the quadrature value of arctan |D|, bounded by pi/2."""

    lambda_max: float
    exact_max: float
    quadrature_error: float
    nodes: int

    @property
    def holds(self) -> bool:
        return self.lambda_max <= math.pi / 2 + 1e-8

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda_max": self.lambda_max,
            "exact_max": self.exact_max,
            "quadrature_error": self.quadrature_error,
            "nodes": self.nodes,
            "holds": self.holds,
        }


def arctan_bound(D: Any, nodes: int = DEFAULT_QUADRATURE_NODES) -> ArctanBound:
    """
    Integrate |D| (1 + mu^2 D^2)^-1 over mu in [0, 1] and compare with arctan |D|.

    Raises:
        ParameterException: If nodes < 8
    """
    D = self_adjoint(D)
    mu, weights = unit_interval_rule(nodes)
    modulus = as_array(func_calc(D, np.abs))
    square = D.entries @ D.entries
    identity = np.eye(D.dim)
    total = np.zeros_like(modulus)
    for node, weight in zip(mu, weights):
        total = total + weight * (modulus @ inverse(identity + node**2 * square))
    exact = as_array(func_calc(D, lambda x: np.arctan(np.abs(x))))
    bound = ArctanBound(
        lambda_max=max_eigenvalue(total),
        exact_max=max_eigenvalue(exact),
        quadrature_error=operator_norm(total - exact),
        nodes=nodes,
    )
    logger.debug("arctan bound: %s", bound.to_dict())
    return bound
