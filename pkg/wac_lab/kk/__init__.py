"""Finite-dimensional Kasparov product toolkit for weakly anticommuting pairs."""

from .exceptions import KasparovDataException, KKException, LiftException, TensorProductException
from .identities import (
    DoubledPair,
    KMuSweep,
    doubled_pair,
    k_mu,
    k_mu_identities,
    k_mu_sweep,
    r_mu_identity,
    squared_resolvent_commutators,
)
from .modules import (
    GradedModule,
    KasparovTriple,
    TensorProduct,
    interior_tensor,
    isometry_defect,
    lift_graded_t,
    lift_s,
    restrict_representation,
    tensor_embed,
)
from .normalizing import ArctanBound, arctan_bound, chi
from .positivity import (
    ConnesSkandalisReport,
    FormBoundReport,
    RescaleReport,
    connes_skandalis_check,
    kk2_inequality,
    kk3_bound,
    p0_scaling,
    replacement_correction,
    rescale_for_kappa,
)

__all__ = [
    # Exceptions
    "KKException",
    "TensorProductException",
    "LiftException",
    "KasparovDataException",
    # Modules
    "GradedModule",
    "KasparovTriple",
    "TensorProduct",
    "interior_tensor",
    "lift_s",
    "lift_graded_t",
    "tensor_embed",
    "isometry_defect",
    "restrict_representation",
    # Normalizing function
    "chi",
    "arctan_bound",
    "ArctanBound",
    # Identities
    "DoubledPair",
    "doubled_pair",
    "k_mu",
    "k_mu_identities",
    "k_mu_sweep",
    "KMuSweep",
    "r_mu_identity",
    "squared_resolvent_commutators",
    # Positivity
    "FormBoundReport",
    "RescaleReport",
    "ConnesSkandalisReport",
    "kk2_inequality",
    "kk3_bound",
    "rescale_for_kappa",
    "replacement_correction",
    "connes_skandalis_check",
    "p0_scaling",
]
