"""Clifford doubling: switching between commuting and anticommuting pairs.

The doubled module is E (+) E = C^2 (x) E. Operators on E are lifted as S_hat = I_2 (x) S and
the generators act on the C^2 slot as sigma_i (x) I, so S_hat sigma_3 = diag(S, -S).
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .algebra import (
    ModuleOperator,
    ResidualReport,
    SelfAdjointOperator,
    as_array,
    inverse,
    norm_scale,
    self_adjoint,
)
from .certifier import CertificateObjective, WacCertificate, certify_wac
from .exceptions import ParameterException

logger = logging.getLogger(__name__)

SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SIGMA_3 = 1j * SIGMA_1 @ SIGMA_2

_GENERATORS = {1: SIGMA_1, 2: SIGMA_2, 3: SIGMA_3}

INDEX_PAIRS: Tuple[Tuple[int, int], ...] = ((1, 2), (1, 3), (2, 3))
"""Generator index pairs (i, j), i < j, available to transform_pair."""


def _check_index(i: int) -> None:
    if i not in _GENERATORS:
        raise ParameterException("Clifford generator index must be 1, 2 or 3", {"index": i})


def clifford_generator(i: int) -> ModuleOperator:
    """
    Generator sigma_i of Cl(2) on C^2, with sigma_3 = i sigma_1 sigma_2 the volume element.

    Raises:
        ParameterException: If i is not 1, 2 or 3

    Example:
        >>> clifford_generator(3).entries
        array([[ 1.+0.j,  0.+0.j],
               [ 0.+0.j, -1.+0.j]])
    """
    _check_index(i)
    return ModuleOperator(_GENERATORS[i])


def clifford_action(i: int, dim: int) -> np.ndarray:
    """sigma_i (x) I_dim, the action of a generator on the doubled module."""
    _check_index(i)
    return np.kron(_GENERATORS[i], np.eye(dim))


def double(S: Any) -> SelfAdjointOperator:
    """Block-diagonal lift diag(S, S) of a self-adjoint operator to E (+) E."""
    S = self_adjoint(S)
    return SelfAdjointOperator(np.kron(np.eye(2), S.entries), S.k, S.tol)


@dataclass
class CliffordPair:
    """Transformed pair s_i = S_hat sigma_i, t_j = T_hat sigma_j on the doubled module."""

    s: SelfAdjointOperator
    """S_hat sigma_i."""

    t: SelfAdjointOperator
    """T_hat sigma_j."""

    s_hat: SelfAdjointOperator
    """diag(S, S)."""

    t_hat: SelfAdjointOperator
    """diag(T, T)."""

    generator_indices: Tuple[int, int]
    """(i, j)."""

    parity: str
    """"anticommuting->commuting" or "commuting->anticommuting"."""

    report: ResidualReport = field(default_factory=ResidualReport)
    """Residuals of the parity-flip identities and of the Clifford-action commutation."""

    @property
    def target_sign(self) -> str:
        """Sign under which the transformed pair should be certified."""
        return self.parity.split("->")[1]


def transform_pair(
    S: Any, T: Any, i: int = 1, j: int = 2, source_sign: str = "anticommuting"
) -> CliffordPair:
    """
    Lift (S, T) to (S_hat sigma_i, T_hat sigma_j).

    The lifted pair satisfies

        s_i t_j + t_j s_i = (S_hat T_hat - T_hat S_hat) sigma_i sigma_j
        s_i t_j - t_j s_i = (S_hat T_hat + T_hat S_hat) sigma_i sigma_j

    so anticommutators become commutators and vice versa, up to the unitary sigma_i sigma_j.

    Args:
        S: Self-adjoint operator
        T: Self-adjoint operator
        i: Generator attached to S
        j: Generator attached to T, different from i
        source_sign: Parity of the input pair, "anticommuting" or "commuting"

    Returns:
        CliffordPair

    Raises:
        ParameterException: If i == j or an index is out of range
    """
    _check_index(i)
    _check_index(j)
    if i == j:
        raise ParameterException("Generator indices must differ", {"i": i, "j": j})
    if source_sign not in ("anticommuting", "commuting"):
        raise ParameterException("Unknown source parity", {"source_sign": source_sign})

    s_hat = double(S)
    t_hat = double(T)
    dim = s_hat.dim // 2
    sigma_i = clifford_action(i, dim)
    sigma_j = clifford_action(j, dim)
    s = s_hat.entries @ sigma_i
    t = t_hat.entries @ sigma_j
    st = s_hat.entries @ t_hat.entries
    ts = t_hat.entries @ s_hat.entries

    report = ResidualReport()
    scale = norm_scale(s_hat, t_hat)
    report.add("anticommutator", s @ t + t @ s, (st - ts) @ sigma_i @ sigma_j, scale)
    report.add("commutator", s @ t - t @ s, (st + ts) @ sigma_i @ sigma_j, scale)
    for index in (1, 2, 3):
        action = clifford_action(index, dim)
        report.add(f"s_hat_sigma{index}", s_hat.entries @ action, action @ s_hat.entries, scale)
        report.add(f"t_hat_sigma{index}", t_hat.entries @ action, action @ t_hat.entries, scale)

    target = "commuting" if source_sign == "anticommuting" else "anticommuting"
    pair = CliffordPair(
        s=SelfAdjointOperator(s, s_hat.k),
        t=SelfAdjointOperator(t, t_hat.k),
        s_hat=s_hat,
        t_hat=t_hat,
        generator_indices=(i, j),
        parity=f"{source_sign}->{target}",
        report=report,
    )
    logger.debug("transform_pair(%d, %d): max relative residual %.3e", i, j, report.max_relative)
    return pair


def verify_doubling_relations(S: Any, T: Any) -> ResidualReport:
    """
    Residuals of the relations that make (S_hat sigma_3, T_hat) weakly anticommuting.

        S_hat sigma_3 T_hat +- T_hat S_hat sigma_3 = (S_hat T_hat +- T_hat S_hat) sigma_3
        (S_hat sigma_3 +- T_hat) S_hat sigma_1 + S_hat sigma_1 (S_hat sigma_3 +- T_hat)
            = +-(S_hat T_hat + T_hat S_hat) sigma_1
        S_hat sigma_3 + T_hat = diag(S + T, T - S)

    The block entry "spectrum" compares the sorted eigenvalues of S_hat sigma_3 + T_hat with
    those of S + T and T - S combined.
    """
    s, t = as_array(S), as_array(T)
    s_hat = double(S).entries
    t_hat = double(T).entries
    dim = s.shape[0]
    sigma1 = clifford_action(1, dim)
    sigma3 = clifford_action(3, dim)
    s3 = s_hat @ sigma3
    s1 = s_hat @ sigma1
    anti = s_hat @ t_hat + t_hat @ s_hat
    scale = norm_scale(s, t)

    report = ResidualReport()
    for sign, tag in ((1, "+"), (-1, "-")):
        report.add(
            f"sigma3_graded[{tag}]",
            s3 @ t_hat + sign * t_hat @ s3,
            (s_hat @ t_hat + sign * t_hat @ s_hat) @ sigma3,
            scale,
        )
        shifted = s3 + sign * t_hat
        lhs = shifted @ s1 + s1 @ shifted
        report.add(f"sigma1_anticommutator[{tag}]", lhs, sign * anti @ sigma1, scale)

    block = np.zeros_like(s_hat)
    block[:dim, :dim] = s + t
    block[dim:, dim:] = t - s
    report.add("block_form", s3 + t_hat, block, scale)
    combined = np.sort(np.concatenate([np.linalg.eigvalsh(s + t), np.linalg.eigvalsh(t - s)]))
    report.add("spectrum", np.diag(np.linalg.eigvalsh(s3 + t_hat)), np.diag(combined), scale)
    return report


def resolvent_lift_residuals(S: Any, i: int, lam: complex) -> ResidualReport:
    """
    Residuals of the three forms of (S_hat sigma_i + lambda)^-1 and of (S_hat sigma_i)^2 = S_hat^2.

        direct:   inverse of S_hat sigma_i + lambda
        factored: (S_hat sigma_i - lambda)(S_hat^2 - lambda^2)^-1
        expanded: (S_hat - lambda)^-1 sigma_i - (lambda sigma_i + lambda)(S_hat^2 - lambda^2)^-1

    Raises:
        SingularOperatorException: If lambda^2 lies in the spectrum of S^2
    """
    if lam == 0:
        raise ParameterException("Resolvent parameter must be nonzero", {"lambda": lam})
    s_hat = double(S).entries
    dim = s_hat.shape[0]
    identity = np.eye(dim)
    sigma = clifford_action(i, dim // 2)
    lifted = s_hat @ sigma
    square_inv = inverse(s_hat @ s_hat - lam**2 * identity, parameter=lam)
    direct = inverse(lifted + lam * identity, parameter=lam)
    factored = (lifted - lam * identity) @ square_inv
    expanded = inverse(s_hat - lam * identity, parameter=lam) @ sigma - (
        lam * sigma + lam * identity
    ) @ square_inv

    scale = norm_scale(s_hat, direct)
    report = ResidualReport()
    report.add("square", lifted @ lifted, s_hat @ s_hat, norm_scale(s_hat, s_hat))
    report.add("factored", direct, factored, scale)
    report.add("expanded", direct, expanded, scale)
    return report


@dataclass
class CliffordBlocks:
    """Self-adjoint block operators assembled from a pair on the doubled module."""

    chiral: SelfAdjointOperator
    """[[0, S+iT], [S-iT, 0]] = S_hat sigma_1 + T_hat sigma_2."""

    real: SelfAdjointOperator
    """[[S, T], [T, -S]] = S_hat sigma_3 + T_hat sigma_1."""

    imaginary: SelfAdjointOperator
    """[[S, iT], [-iT, -S]] = S_hat sigma_3 + T_hat sigma_2."""

    report: ResidualReport = field(default_factory=ResidualReport)

    def as_dict(self) -> Dict[str, SelfAdjointOperator]:
        return {"chiral": self.chiral, "real": self.real, "imaginary": self.imaginary}


def clifford_block_operators(S: Any, T: Any) -> CliffordBlocks:
    """
    Build the three block operators and check them against their Clifford expressions.

    Raises:
        NotSelfAdjointException: If S or T is not self-adjoint
    """
    S = self_adjoint(S)
    T = self_adjoint(T)
    s, t = S.entries, T.entries
    zero = np.zeros_like(s)
    chiral = np.block([[zero, s + 1j * t], [s - 1j * t, zero]])
    real = np.block([[s, t], [t, -s]])
    imaginary = np.block([[s, 1j * t], [-1j * t, -s]])

    s_hat, t_hat = double(S).entries, double(T).entries
    dim = s.shape[0]
    sigma = {index: clifford_action(index, dim) for index in (1, 2, 3)}
    scale = norm_scale(s, t)
    report = ResidualReport()
    report.add("adjoint", (s + 1j * t).conj().T, s - 1j * t, scale)
    report.add("chiral", chiral, s_hat @ sigma[1] + t_hat @ sigma[2], scale)
    report.add("real", real, s_hat @ sigma[3] + t_hat @ sigma[1], scale)
    report.add("imaginary", imaginary, s_hat @ sigma[3] + t_hat @ sigma[2], scale)
    return CliffordBlocks(
        chiral=SelfAdjointOperator(chiral, S.k),
        real=SelfAdjointOperator(real, S.k),
        imaginary=SelfAdjointOperator(imaginary, S.k),
        report=report,
    )


def transfer_certificates(
    S: Any,
    T: Any,
    source_sign: str = "anticommuting",
    objective: Optional[CertificateObjective] = None,
) -> Dict[str, WacCertificate]:
    """
    Certify a pair and its three Clifford transforms.

    Since s_i^2 = S_hat^2, t_j^2 = T_hat^2 and the transformed (anti)commutator is the doubled
    original times a unitary, every transform admits the same optimal constants.

    Returns:
        Mapping "source" and "s{i}t{j}" to certificates
    """
    certificates = {
        "source": certify_wac(S, T, source_sign, objective, lambda_grid=()),
    }
    for i, j in INDEX_PAIRS:
        pair = transform_pair(S, T, i, j, source_sign)
        certificates[f"s{i}t{j}"] = certify_wac(
            pair.s, pair.t, pair.target_sign, objective, lambda_grid=()
        )
    for name, cert in certificates.items():
        logger.info("certificate transfer %s: %s", name, cert)
    return certificates
