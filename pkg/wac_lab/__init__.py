"""wac-lab - numerical laboratory for weakly anticommuting operator pairs on Hilbert modules."""

__version__ = "0.1.0"

# Exceptions
from .exceptions import (
    WacLabException,
    ShapeMismatchException,
    NotSelfAdjointException,
    SingularOperatorException,
    SpectrumException,
    CertificateException,
    ParameterException,
    QuadratureException,
    GenerationException,
    ConfigurationException,
    ReportIOException,
    CodecException,
)

# Algebra
from .algebra import (
    CStarElement,
    ModuleVector,
    ModuleOperator,
    SelfAdjointOperator,
    ResidualReport,
    self_adjoint,
    inner_product,
    is_positive,
    cauchy_schwarz_gap,
    func_calc,
    resolvent,
    graded_commutator,
    anticommutator,
    leibniz_residuals,
    resolvent_commutator_identities,
)

# Codecs
from .codec import Codec, CodecRegistry, register_codec, encode_matrix, decode_matrix

# Certifier
from .certifier import (
    CertificateObjective,
    WacCertificate,
    certify_wac,
    verify_certificate,
    graph_norm_constant,
    relative_gap,
    commuting_smallness,
    legacy_wac_check,
    form_norm_gap,
)

# Sum engine
from .sum_engine import (
    a_lambda,
    sum_identity_residuals,
    resolvent_equation_residual,
    fundamental_bounds,
    mu0_threshold,
    convergence_sweep,
    smoothing_approx,
)

# Clifford doubling
from .clifford import (
    clifford_generator,
    transform_pair,
    verify_doubling_relations,
    resolvent_lift_residuals,
    clifford_block_operators,
    transfer_certificates,
)

# Square sums and interpolation
from .square_sum import (
    square_sum_check,
    interpolation_family,
    interpolation_grid,
    kato_rellich_margin,
    triple_certify,
    sum_of_three_report,
)

# Sectorial operators and the Dunford approximant
from .dunford import (
    spectral_angle,
    keyhole_contour,
    dunford_p_lambda,
    dunford_residual,
    dunford_sweep,
    normalizing_b,
)

# Instances and experiments
from .generators import (
    GeneratorSpec,
    gen_pair,
    pauli_pair,
    pauli_perturbed_pair,
    anticommuting_pair,
    unbounded_anticommutator_pair,
    anticommuting_triple,
)
from .config import ExperimentConfig, load_config, parse_config
from .experiment import ExperimentReport, run_experiment

__all__ = [
    # Version
    "__version__",
    # Exceptions
    "WacLabException",
    "ShapeMismatchException",
    "NotSelfAdjointException",
    "SingularOperatorException",
    "SpectrumException",
    "CertificateException",
    "ParameterException",
    "QuadratureException",
    "GenerationException",
    "ConfigurationException",
    "ReportIOException",
    "CodecException",
    # Algebra
    "CStarElement",
    "ModuleVector",
    "ModuleOperator",
    "SelfAdjointOperator",
    "ResidualReport",
    "self_adjoint",
    "inner_product",
    "is_positive",
    "cauchy_schwarz_gap",
    "func_calc",
    "resolvent",
    "graded_commutator",
    "anticommutator",
    "leibniz_residuals",
    "resolvent_commutator_identities",
    # Codecs
    "Codec",
    "CodecRegistry",
    "register_codec",
    "encode_matrix",
    "decode_matrix",
    # Certifier
    "CertificateObjective",
    "WacCertificate",
    "certify_wac",
    "verify_certificate",
    "graph_norm_constant",
    "relative_gap",
    "commuting_smallness",
    "legacy_wac_check",
    "form_norm_gap",
    # Sum engine
    "a_lambda",
    "sum_identity_residuals",
    "resolvent_equation_residual",
    "fundamental_bounds",
    "mu0_threshold",
    "convergence_sweep",
    "smoothing_approx",
    # Clifford doubling
    "clifford_generator",
    "transform_pair",
    "verify_doubling_relations",
    "resolvent_lift_residuals",
    "clifford_block_operators",
    "transfer_certificates",
    # Square sums
    "square_sum_check",
    "interpolation_family",
    "interpolation_grid",
    "kato_rellich_margin",
    "triple_certify",
    "sum_of_three_report",
    # Dunford
    "spectral_angle",
    "keyhole_contour",
    "dunford_p_lambda",
    "dunford_residual",
    "dunford_sweep",
    "normalizing_b",
    # Instances and experiments
    "GeneratorSpec",
    "gen_pair",
    "pauli_pair",
    "pauli_perturbed_pair",
    "anticommuting_pair",
    "unbounded_anticommutator_pair",
    "anticommuting_triple",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "ExperimentReport",
    "run_experiment",
]
