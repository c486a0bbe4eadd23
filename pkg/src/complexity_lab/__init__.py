"""Exact information-theoretic complexity measures of binary-node stochastic dynamics."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ComplexityLabError,
    ConvergenceError,
    DivergenceInfiniteError,
    InvalidArgumentError,
    InvalidStateError,
    ParseError,
    PreconditionError,
)
from .statespace import (  # noqa: E402
    JointDist,
    ProbVector,
    StochMatrix,
    SystemShape,
    decode_state,
    encode_state,
    entropy,
    kl_matrices,
    marginal,
)
from .dynamics import (  # noqa: E402
    AttractorSet,
    BoltzmannMachine,
    DeterministicMap,
    attractors,
    deterministic_map,
    energy,
    stationary_distribution,
    stationary_vertices,
    transition_matrix,
)
from .infogeo import ProjectionResult, SplitManifold, phi_g, project  # noqa: E402
from .measures import (  # noqa: E402
    FlowObjective,
    MeasureReport,
    measure_report,
    multi_information,
    mutual_information,
    synergistic_information,
    total_information_flow,
)
from .hopfield import (  # noqa: E402
    CapacityResult,
    PatternSet,
    capacity_curve,
    complexity_capacity,
    hebb_weights,
    learning_curve,
    random_patterns,
)

__all__ = [
    "__version__",
    "ComplexityLabError",
    "ConvergenceError",
    "DivergenceInfiniteError",
    "InvalidArgumentError",
    "InvalidStateError",
    "ParseError",
    "PreconditionError",
    "JointDist",
    "ProbVector",
    "StochMatrix",
    "SystemShape",
    "decode_state",
    "encode_state",
    "entropy",
    "kl_matrices",
    "marginal",
    "AttractorSet",
    "BoltzmannMachine",
    "DeterministicMap",
    "attractors",
    "deterministic_map",
    "energy",
    "stationary_distribution",
    "stationary_vertices",
    "transition_matrix",
    "ProjectionResult",
    "SplitManifold",
    "phi_g",
    "project",
    "FlowObjective",
    "MeasureReport",
    "measure_report",
    "multi_information",
    "mutual_information",
    "synergistic_information",
    "total_information_flow",
    "CapacityResult",
    "PatternSet",
    "capacity_curve",
    "complexity_capacity",
    "hebb_weights",
    "learning_curve",
    "random_patterns",
]
