"""Sums of squares, relative bounds and iterated sums of weakly anticommuting operators."""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .algebra import (
    DEFAULT_TOL,
    ResidualReport,
    as_array,
    func_calc,
    min_eigenvalue,
    norm_scale,
    operator_norm,
    self_adjoint,
)
from .certifier import (
    CertificateVerification,
    WacCertificate,
    anticommutator_of,
    certify_wac,
    graph_norm_constant,
    verify_certificate,
)
from .exceptions import CertificateException, ParameterException

logger = logging.getLogger(__name__)

DEFAULT_Z_REAL: Tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_Z_IMAG: Tuple[float, ...] = (-5.0, -1.0, 0.0, 1.0, 5.0)
DEFAULT_EPSILON_GRID: Tuple[float, ...] = (1e-3, 1e-2, 1e-1, 1.0, 10.0)

_BISECTION_STEPS = 200


def pencil_constant(a: np.ndarray, b: np.ndarray) -> float:
    """Smallest C >= 1 with C^-1 b <= a <= C b for positive definite a, b."""
    values = scipy.linalg.eigh((a + a.conj().T) / 2, (b + b.conj().T) / 2, eigvals_only=True)
    return max(1.0, float(values[-1]), 1.0 / float(values[0]))


@dataclass
class SquareSumReport:
    """Finite-dimensional content of the self-adjointness of S^2 + T^2."""

    identity: ResidualReport
    """Residual of (S+T)^2 = S^2 + T^2 + [S,T]_+."""

    chain_constant: float
    """max(C0, C1, C2) times the graph-norm constant: C of K*K <= C (I + (S+T)^2)."""

    chain_slack: float
    """lambda_min(chain_constant (I + (S+T)^2) - K*K)."""

    measured_constant: float
    """Best C of K*K <= C (I + (S+T)^2)."""

    spectrum: np.ndarray
    """Eigenvalues of S^2 + T^2."""

    square_graph_constant: float
    """Pencil constant of (I + (S^2+T^2)^2, I + ((S+T)^2)^2)."""

    scale: float

    @property
    def passed(self) -> bool:
        return (
            self.identity.passed()
            and self.chain_slack >= -DEFAULT_TOL * self.scale
            and float(self.spectrum[0]) >= -DEFAULT_TOL * self.scale
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "identity": self.identity.to_dict(),
            "chain_constant": self.chain_constant,
            "chain_slack": self.chain_slack,
            "measured_constant": self.measured_constant,
            "spectrum_min": float(self.spectrum[0]),
            "spectrum_max": float(self.spectrum[-1]),
            "square_graph_constant": self.square_graph_constant,
            "passed": self.passed,
        }


def square_graph_constant(S: Any, T: Any) -> float:
    """Pencil constant of (I + (S^2+T^2)^2, I + ((S+T)^2)^2)."""
    s, t = as_array(S), as_array(T)
    identity = np.eye(s.shape[0])
    squares = s @ s + t @ t
    total = (s + t) @ (s + t)
    return pencil_constant(identity + squares @ squares, identity + total @ total)


def square_sum_check(S: Any, T: Any, cert: Optional[WacCertificate]) -> SquareSumReport:
    """
    Check the identity (S+T)^2 = S^2 + T^2 + K and the form chain bounding K*K by the
    graph norm of S + T.

    Raises:
        CertificateException: If no anticommuting certificate is given
    """
    if cert is None or cert.sign != "anticommuting":
        raise CertificateException(
            "Square-sum check needs an anticommuting certificate",
            {"sign": None if cert is None else cert.sign},
        )
    s, t = as_array(S), as_array(T)
    identity = np.eye(s.shape[0])
    k = anticommutator_of(s, t, "+")
    total = s + t
    report = ResidualReport()
    report.add("square_expansion", total @ total, s @ s + t @ t + k, norm_scale(s, t) ** 2)

    graph = graph_norm_constant(s, t).constant
    chain = max(cert.constants) * graph
    summed = identity + total @ total
    kk = k.conj().T @ k
    values = scipy.linalg.eigh(
        (kk + kk.conj().T) / 2, (summed + summed.conj().T) / 2, eigvals_only=True
    )
    result = SquareSumReport(
        identity=report,
        chain_constant=chain,
        chain_slack=min_eigenvalue(chain * summed - kk),
        measured_constant=max(float(values[-1]), 0.0),
        spectrum=scipy.linalg.eigvalsh(s @ s + t @ t),
        square_graph_constant=square_graph_constant(s, t),
        scale=max(operator_norm(kk), chain * operator_norm(summed), 1e-300),
    )
    logger.info("square-sum check: chain C=%.6g measured C=%.6g", chain, result.measured_constant)
    return result


# ---------------------------------------------------------------------------
# Interpolation family
# ---------------------------------------------------------------------------


@dataclass
class InterpolationPoint:
    z: complex
    norm: float
    """||P_z||."""

    p0_norm: float
    """||P_0||."""

    @property
    def ratio(self) -> float:
        return self.norm / self.p0_norm if self.p0_norm > 0 else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"re": self.z.real, "im": self.z.imag, "norm": self.norm, "p0_norm": self.p0_norm}


def interpolation_operator(S: Any, T: Any, z: complex) -> np.ndarray:
    """
    P_z = (1 + |D|)^-z K (1 + |D|)^(z-1) with D = S + T and K = [S, T]_+.

    Raises:
        ParameterException: If Re z is outside [0, 1]
    """
    z = complex(z)
    if not 0.0 <= z.real <= 1.0:
        raise ParameterException("Re z must lie in [0, 1]", {"z": z})
    s, t = as_array(S), as_array(T)
    d = self_adjoint(s + t)
    k = anticommutator_of(s, t, "+")
    left = as_array(func_calc(d, lambda x: (1.0 + np.abs(x)) ** (-z)))
    right = as_array(func_calc(d, lambda x: (1.0 + np.abs(x)) ** (z - 1.0)))
    return left @ k @ right


def p0_norm(S: Any, T: Any) -> float:
    """||K (1 + |D|)^-1||, the constant of the bound +-K <= ||P_0|| (1 + |D|)."""
    return operator_norm(interpolation_operator(S, T, 0.0))


def interpolation_family(S: Any, T: Any, z: complex) -> InterpolationPoint:
    """Evaluate ||P_z|| next to ||P_0||; the norm is maximal on the boundary of the strip."""
    point = InterpolationPoint(
        z=complex(z),
        norm=operator_norm(interpolation_operator(S, T, z)),
        p0_norm=p0_norm(S, T),
    )
    logger.debug("||P_z|| at z=%s: %.6g (P_0: %.6g)", z, point.norm, point.p0_norm)
    return point


def interpolation_grid(
    S: Any,
    T: Any,
    real_parts: Sequence[float] = DEFAULT_Z_REAL,
    imaginary_parts: Sequence[float] = DEFAULT_Z_IMAG,
) -> List[InterpolationPoint]:
    """interpolation_family over the product grid of real and imaginary parts."""
    return [interpolation_family(S, T, complex(a, b)) for a in real_parts for b in imaginary_parts]


# ---------------------------------------------------------------------------
# Relative bounds
# ---------------------------------------------------------------------------


@dataclass
class RelativeBoundCurve:
    """Certified C_eps with ||Kx|| <= C_eps ||x|| + eps ||(S+T)^2 x|| for all x."""

    samples: List[Tuple[float, float, float]] = field(default_factory=list)
    """(eps, certified C_eps, Monte Carlo lower estimate)."""

    falsification: float = 0.0
    """Largest ||Kx|| - C_eps ||x|| - eps ||D^2 x|| over the random unit vectors."""

    def is_monotone(self, tol: float = 1e-12) -> bool:
        ordered = sorted(self.samples)
        return all(b[1] <= a[1] + tol * max(a[1], 1.0) for a, b in zip(ordered, ordered[1:]))

    def to_csv_rows(self) -> List[List[float]]:
        return [list(sample) for sample in self.samples]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "columns": ["epsilon", "c_certified", "c_montecarlo"],
            "rows": self.to_csv_rows(),
            "falsification": self.falsification,
        }


def _relative_feasible(
    c: float, eps: float, d2: np.ndarray, k2: np.ndarray, tol: float
) -> bool:
    bound = c * np.eye(d2.shape[0]) + eps * d2
    gap = bound @ bound - k2
    return min_eigenvalue(gap) >= -tol * max(operator_norm(k2), 1e-300)


def kato_rellich_margin(
    S: Any,
    T: Any,
    epsilon_grid: Sequence[float] = DEFAULT_EPSILON_GRID,
    samples: int = 1000,
    seed: int = 0,
    tol: float = 1e-12,
) -> RelativeBoundCurve:
    """
    Relative bound of K against (S+T)^2 on an epsilon grid.

    C_eps is the bisection minimum of C with (C + eps D^2)^2 - K^2 >= 0, which implies the norm
    inequality. Random unit vectors give a lower estimate of the true minimal constant.

    Raises:
        ParameterException: If an epsilon is not positive
    """
    s, t = as_array(S), as_array(T)
    k = anticommutator_of(s, t, "+")
    d = s + t
    d2 = d @ d
    k2 = k @ k
    k_norm = operator_norm(k)
    rng = np.random.Generator(np.random.Philox(seed))
    dim = s.shape[0]
    vectors = rng.standard_normal((dim, samples)) + 1j * rng.standard_normal((dim, samples))
    vectors /= np.linalg.norm(vectors, axis=0)
    k_norms = np.linalg.norm(k @ vectors, axis=0)
    d2_norms = np.linalg.norm(d2 @ vectors, axis=0)

    curve = RelativeBoundCurve()
    for eps in sorted(epsilon_grid):
        if eps <= 0:
            raise ParameterException("epsilon must be positive", {"epsilon": eps})
        if _relative_feasible(0.0, eps, d2, k2, tol):
            c_eps = 0.0
        else:
            lo, hi = 0.0, k_norm
            for _ in range(_BISECTION_STEPS):
                mid = (lo + hi) / 2
                if _relative_feasible(mid, eps, d2, k2, tol):
                    hi = mid
                else:
                    lo = mid
                if hi - lo <= 1e-12 * max(hi, 1e-300):
                    break
            c_eps = hi
        c_mc = float(max(np.max(k_norms - eps * d2_norms), 0.0)) if samples else 0.0
        worst = float(np.max(k_norms - c_eps - eps * d2_norms)) if samples else 0.0
        curve.falsification = max(curve.falsification, worst)
        curve.samples.append((float(eps), float(c_eps), c_mc))
        logger.debug("relative bound eps=%.3g: certified %.6g, sampled %.6g", eps, c_eps, c_mc)
    return curve


# ---------------------------------------------------------------------------
# Iterated sums
# ---------------------------------------------------------------------------


@dataclass
class TripleCertificate:
    """Certificate for (S1 + S2, S3) propagated from pairwise certificates."""

    certificate: WacCertificate
    """Propagated constants."""

    unfolded: Tuple[float, float, float, float]
    """(C0', C1', C2', C3') before folding the S1, S2 terms into S1 + S2."""

    graph_constant: float
    """Graph-norm constant of (S1, S2)."""

    verification: CertificateVerification
    """Direct check of the propagated certificate."""

    direct: Optional[WacCertificate] = None
    """Certificate of (S1 + S2, S3) computed from scratch, for comparison."""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "certificate": self.certificate.to_dict(),
            "unfolded": list(self.unfolded),
            "graph_constant": self.graph_constant,
            "verification": self.verification.to_dict(),
            "direct": None if self.direct is None else self.direct.to_dict(),
        }


def triple_certify(
    S1: Any,
    S2: Any,
    S3: Any,
    pairwise: Mapping[Tuple[int, int], WacCertificate],
    compare_direct: bool = True,
) -> TripleCertificate:
    """
    Propagate pairwise anticommuting certificates to the pair (S1 + S2, S3).

    With K = [S1, S3]_+ + [S2, S3]_+ and ||a + b||^2 <= 2 ||a||^2 + 2 ||b||^2,

        C0' = 2 (C0^13 + C0^23), C1' = 2 C1^13, C2' = 2 C1^23, C3' = 2 (C2^13 + C2^23),

    and the S1, S2 terms are folded through I + S1^2 + S2^2 <= G (I + (S1+S2)^2):

        C0 = C0' + max(C1', C2') G,  C1 = max(C1', C2') G,  C2 = C3'.

    Args:
        S1: Self-adjoint operator
        S2: Self-adjoint operator
        S3: Self-adjoint operator
        pairwise: Certificates keyed (1, 2), (1, 3) and (2, 3)
        compare_direct: Also certify (S1 + S2, S3) from scratch

    Raises:
        CertificateException: If a pairwise certificate is missing or not anticommuting
    """
    for key in ((1, 2), (1, 3), (2, 3)):
        cert = pairwise.get(key)
        if cert is None or cert.sign != "anticommuting":
            raise CertificateException(
                "Missing pairwise anticommuting certificate", {"pair": f"{key[0]}{key[1]}"}
            )
    c13 = pairwise[(1, 3)]
    c23 = pairwise[(2, 3)]
    unfolded = (
        2 * (c13.c0 + c23.c0),
        2 * c13.c1,
        2 * c23.c1,
        2 * (c13.c2 + c23.c2),
    )
    s1, s2, s3 = as_array(S1), as_array(S2), as_array(S3)
    graph = graph_norm_constant(s1, s2).constant
    folded = max(unfolded[1], unfolded[2]) * graph
    cert = WacCertificate(
        c0=unfolded[0] + folded,
        c1=folded,
        c2=unfolded[3],
        sign="anticommuting",
        objective="propagated",
    )
    verification = verify_certificate(s1 + s2, s3, cert)
    cert.slack = verification.slack
    cert.scale = verification.scale
    direct = certify_wac(s1 + s2, s3, "+", lambda_grid=()) if compare_direct else None
    logger.info("propagated %s", cert)
    return TripleCertificate(
        certificate=cert,
        unfolded=unfolded,
        graph_constant=graph,
        verification=verification,
        direct=direct,
    )


@dataclass
class SumOfThreeReport:
    hermitian_defect: float
    """||D - D*|| for D = S1 + S2 + S3."""

    graph_constant: float
    """Pencil constant of (I + S1^2 + S2^2 + S3^2, I + (S1+S2+S3)^2)."""

    def to_dict(self) -> Dict[str, float]:
        return {"hermitian_defect": self.hermitian_defect, "graph_constant": self.graph_constant}


def sum_of_three_report(S1: Any, S2: Any, S3: Any) -> SumOfThreeReport:
    s1, s2, s3 = as_array(S1), as_array(S2), as_array(S3)
    identity = np.eye(s1.shape[0])
    total = s1 + s2 + s3
    joint = identity + s1 @ s1 + s2 @ s2 + s3 @ s3
    return SumOfThreeReport(
        hermitian_defect=operator_norm(total - total.conj().T),
        graph_constant=pencil_constant(joint, identity + total @ total),
    )

