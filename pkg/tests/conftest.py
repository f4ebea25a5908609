"""Shared fixtures: reference pairs and seeded generated instances."""

import numpy as np
import pytest

from wac_lab.generators import (
    GeneratorSpec,
    anticommuting_pair,
    gen_pair,
    make_rng,
    pauli_pair,
    pauli_perturbed_pair,
)


@pytest.fixture
def pauli():
    """S = sigma_1, T = sigma_2."""
    return pauli_pair()


@pytest.fixture
def perturbed():
    """Pauli pair with a small non-anticommuting perturbation."""
    return pauli_perturbed_pair(0.1)


@pytest.fixture
def anticommuting():
    """Exactly anticommuting 4 x 4 pair."""
    return anticommuting_pair(2)


@pytest.fixture
def generated():
    """Seeded Clifford-tensor pair with ||[S, T]_+|| = 0.5."""
    spec = GeneratorSpec(k=1, n=6, spectral_scale=1.0, anticommutator_target=0.5, seed=7)
    return gen_pair(spec)


@pytest.fixture
def rng():
    """Seeded generator for random test data."""
    return make_rng(12345)


@pytest.fixture
def random_hermitian(rng):
    """Factory for seeded random hermitian matrices."""

    def build(dim: int, scale: float = 1.0) -> np.ndarray:
        raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        return scale * (raw + raw.conj().T) / 2

    return build
