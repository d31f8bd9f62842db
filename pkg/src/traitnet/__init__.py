"""Exact inference for discrete Bayesian networks, built for trait scoring.

Define a network of latent traits and question variables with conditional
probability tables, enter answer evidence, and compute posterior trait
distributions and derived scores.
"""

from .errors import (
    CycleError,
    EvidenceError,
    ImpossibleEvidenceError,
    ModelError,
    ScoringError,
)
from .factor import Factor, factor_from_cpt, marginalize, normalize, product, reduce, transpose
from .inference import (
    Engine,
    QueryResult,
    brute_force_joint,
    compile_network,
    elimination_order,
    query,
    query_joint,
)
from .model import (
    Cpt,
    Evidence,
    Network,
    Role,
    Variable,
    build_network,
    topological_order,
)
from .netdef import (
    ParseError,
    export_dot,
    export_result_json,
    export_samples,
    parse_network,
    serialize_network,
)
from .scoring import NoiseSpec, TraitScore, apply_slip_noise, score_trait
from .simulate import (
    SampleSet,
    ancestral_sample,
    empirical_marginals,
    likelihood_weighted_sample,
)

__version__ = "0.1.0"

__all__ = [
    "Cpt",
    "CycleError",
    "Engine",
    "Evidence",
    "EvidenceError",
    "Factor",
    "ImpossibleEvidenceError",
    "ModelError",
    "Network",
    "NoiseSpec",
    "ParseError",
    "QueryResult",
    "Role",
    "SampleSet",
    "ScoringError",
    "TraitScore",
    "Variable",
    "ancestral_sample",
    "apply_slip_noise",
    "brute_force_joint",
    "build_network",
    "compile_network",
    "elimination_order",
    "empirical_marginals",
    "export_dot",
    "export_result_json",
    "export_samples",
    "factor_from_cpt",
    "likelihood_weighted_sample",
    "marginalize",
    "normalize",
    "parse_network",
    "product",
    "query",
    "query_joint",
    "reduce",
    "score_trait",
    "serialize_network",
    "topological_order",
    "transpose",
]
