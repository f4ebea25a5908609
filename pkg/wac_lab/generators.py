"""Seeded generation of operator pairs and the named reference pairs."""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.stats

from .algebra import SelfAdjointOperator, anticommutator, operator_norm
from .clifford import SIGMA_1, SIGMA_2, SIGMA_3
from .exceptions import GenerationException

logger = logging.getLogger(__name__)

CONSTRUCTIONS = ("clifford_tensor", "perturbed_exact", "user_matrix")

_ROTATION_GRID = 64
_BISECTION_STEPS = 80
_VANISHING = 1e-14

Pair = Tuple[SelfAdjointOperator, SelfAdjointOperator]


@dataclass(frozen=True)
class GeneratorSpec:
    """
    Recipe for a seeded pair on the module (M_k)^n, i.e. (n*k) x (n*k) operators.

    Example:
        >>> spec = GeneratorSpec(k=1, n=8, spectral_scale=2.0, anticommutator_target=1.0)
        >>> S, T = gen_pair(spec)
    """

    k: int = 1
    """Coefficient dimension."""

    n: int = 4
    """Module rank."""

    spectral_scale: float = 1.0
    """Spectra are drawn log-uniform in [1, 10^s]."""

    anticommutator_target: float = 0.0
    """Target ||[S, T]_+|| (clifford_tensor) or perturbation norm (perturbed_exact)."""

    construction: str = "clifford_tensor"
    seed: int = 0

    matrix_s: Optional[str] = None
    """Matrix file of S for user_matrix."""

    matrix_t: Optional[str] = None
    """Matrix file of T for user_matrix."""

    def __post_init__(self):
        """Validate the recipe."""
        if self.k <= 0 or self.n <= 0:
            raise ValueError("Dimensions k and n must be > 0")
        if self.construction not in CONSTRUCTIONS:
            raise ValueError(f"Construction must be one of {CONSTRUCTIONS}")
        if self.spectral_scale < 0 or not math.isfinite(self.spectral_scale):
            raise ValueError("Spectral scale must be finite and >= 0")
        if self.anticommutator_target < 0 or not math.isfinite(self.anticommutator_target):
            raise ValueError("Anticommutator target must be finite and >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("Seed must be an unsigned 64-bit integer")
        if self.construction == "user_matrix" and not (self.matrix_s and self.matrix_t):
            raise ValueError("user_matrix needs matrix_s and matrix_t")

    @property
    def dim(self) -> int:
        return self.n * self.k


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(seed))


def _log_uniform(rng: np.random.Generator, size: int, scale: float) -> np.ndarray:
    magnitudes = 10.0 ** rng.uniform(0.0, scale, size)
    signs = rng.choice((-1.0, 1.0), size)
    return magnitudes * signs


def _random_unitary(rng: np.random.Generator, size: int) -> np.ndarray:
    if size == 1:
        return np.ones((1, 1), dtype=complex)
    return scipy.stats.unitary_group.rvs(size, random_state=rng)


def _hermitian(rng: np.random.Generator, size: int) -> np.ndarray:
    raw = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    return (raw + raw.conj().T) / 2


def _commuting_factors(spec: GeneratorSpec, rng: np.random.Generator):
    if spec.dim % 2:
        raise GenerationException(
            "Clifford constructions need an even module dimension", {"dim": spec.dim}
        )
    half = spec.dim // 2
    u = _random_unitary(rng, half)
    a = u @ np.diag(_log_uniform(rng, half, spec.spectral_scale)) @ u.conj().T
    b = u @ np.diag(_log_uniform(rng, half, spec.spectral_scale)) @ u.conj().T
    return (a + a.conj().T) / 2, (b + b.conj().T) / 2, _hermitian(rng, half)


def _rotated(b: np.ndarray, generator: np.ndarray, theta: float) -> np.ndarray:
    rotation = scipy.linalg.expm(1j * theta * generator)
    rotated = rotation @ b @ rotation.conj().T
    return (rotated + rotated.conj().T) / 2


def _clifford_tensor(spec: GeneratorSpec, rng: np.random.Generator) -> Pair:
    """
    S = sigma_1 (x) A and T = sigma_2 (x) B with ||[S, T]_+|| = ||[A, B]_-|| = target.

    B is rotated off the common eigenbasis of A until the commutator reaches the target. When no
    rotation along the sampled generator reaches it, B is rotated to the largest sampled
    commutator and rescaled, since [A, B]_- is linear in B.
    """
    a, b, generator = _commuting_factors(spec, rng)
    target = spec.anticommutator_target

    def measured(theta: float) -> float:
        rotated = _rotated(b, generator, theta)
        return operator_norm(a @ rotated - rotated @ a)

    theta, scale = 0.0, 1.0
    if target > 0:
        grid = np.linspace(0.0, math.pi / 2, _ROTATION_GRID + 1)
        values = [measured(value) for value in grid]
        above = [i for i, value in enumerate(values) if value >= target]
        if above:
            low, high = grid[above[0] - 1], grid[above[0]]
            for _ in range(_BISECTION_STEPS):
                middle = (low + high) / 2
                if measured(middle) >= target:
                    high = middle
                else:
                    low = middle
            theta = high
        else:
            best = int(np.argmax(values))
            if values[best] <= _VANISHING * operator_norm(a) * operator_norm(b):
                raise GenerationException(
                    "Anticommutator target is not achievable",
                    {"target": target, "achievable": values[best]},
                )
            theta = grid[best]
        # scale is 1 up to roundoff after a bisection
        scale = target / measured(theta)
    b = scale * _rotated(b, generator, theta)
    S = SelfAdjointOperator(np.kron(SIGMA_1, a), spec.k)
    T = SelfAdjointOperator(np.kron(SIGMA_2, b), spec.k)
    logger.debug(
        "clifford_tensor pair: theta=%.6g scale=%.6g ||K||=%.6g",
        theta,
        scale,
        operator_norm(a @ b - b @ a),
    )
    return S, T


def _perturbed_exact(spec: GeneratorSpec, rng: np.random.Generator) -> Pair:
    a, b, _ = _commuting_factors(spec, rng)
    perturbation = _hermitian(rng, spec.dim)
    size = operator_norm(perturbation)
    if size > 0:
        perturbation = perturbation * (spec.anticommutator_target / size)
    S = SelfAdjointOperator(np.kron(SIGMA_1, a), spec.k)
    t = np.kron(SIGMA_2, b) + perturbation
    T = SelfAdjointOperator((t + t.conj().T) / 2, spec.k)
    return S, T


def _user_matrix(spec: GeneratorSpec) -> Pair:
    from .reports import load_matrix

    s = load_matrix(spec.matrix_s)
    t = load_matrix(spec.matrix_t)
    if s.shape != t.shape:
        raise GenerationException(
            "User matrices have different shapes", {"S": s.shape, "T": t.shape}
        )
    return SelfAdjointOperator(s, spec.k), SelfAdjointOperator(t, spec.k)


def gen_pair(spec: GeneratorSpec) -> Pair:
    """
    Generate a self-adjoint pair from a recipe.

    clifford_tensor builds S = sigma_1 (x) A and T = sigma_2 (x) B with ||[A, B]_-|| tuned to
    the target, so that ||[S, T]_+|| equals it. perturbed_exact adds a hermitian perturbation
    of the target norm to an exactly anticommuting pair.

    Raises:
        GenerationException: If the target cannot be reached or the dimension is odd
    """
    if spec.construction == "user_matrix":
        return _user_matrix(spec)
    rng = make_rng(spec.seed)
    if spec.construction == "clifford_tensor":
        S, T = _clifford_tensor(spec, rng)
    else:
        S, T = _perturbed_exact(spec, rng)
    logger.info(
        "generated %s pair: dim=%d seed=%d ||K||=%.6g",
        spec.construction,
        spec.dim,
        spec.seed,
        operator_norm(anticommutator(S, T)),
    )
    return S, T


# ---------------------------------------------------------------------------
# Reference pairs
# ---------------------------------------------------------------------------


def pauli_pair() -> Pair:
    """S = sigma_1, T = sigma_2: exactly anticommuting."""
    return SelfAdjointOperator(SIGMA_1), SelfAdjointOperator(SIGMA_2)


def pauli_perturbed_pair(epsilon: float = 0.1) -> Pair:
    """S = sigma_1, T = sigma_2 + epsilon E_11, with [S, T]_+ = epsilon sigma_1."""
    bump = np.diag([epsilon, 0.0])
    return SelfAdjointOperator(SIGMA_1), SelfAdjointOperator(SIGMA_2 + bump)


def anticommuting_pair(n: int = 2) -> Pair:
    """sigma_1 (x) A and sigma_2 (x) B with commuting diagonal A, B."""
    a = np.diag(np.arange(1.0, n + 1))
    b = np.diag(np.arange(float(n), 0.0, -1.0))
    return SelfAdjointOperator(np.kron(SIGMA_1, a)), SelfAdjointOperator(np.kron(SIGMA_2, b))


def unbounded_anticommutator_pair(scale: float = 10.0) -> Pair:
    """S = I + sigma_3 and T = scale sigma_1, so [S, T]_+ = 2 T grows with T."""
    return (
        SelfAdjointOperator(np.eye(2) + SIGMA_3),
        SelfAdjointOperator(scale * SIGMA_1),
    )


def anticommuting_triple(n: int = 2) -> Tuple[SelfAdjointOperator, ...]:
    """sigma_i (x) diag(1..n), pairwise anticommuting."""
    d = np.diag(np.arange(1.0, n + 1))
    return tuple(SelfAdjointOperator(np.kron(sigma, d)) for sigma in (SIGMA_1, SIGMA_2, SIGMA_3))


REFERENCE_PAIRS = {
    "pauli_pair": pauli_pair,
    "pauli_perturbed_pair": pauli_perturbed_pair,
    "anticommuting_pair": anticommuting_pair,
    "unbounded_anticommutator_pair": unbounded_anticommutator_pair,
}
