"""qdistill: threshold distillation of multipartite GHZ/W entanglement and
steering assemblages, with closed-form performance checked against dense
numerics and Monte Carlo simulation."""

from .errors import (
    BadPartitionError,
    DenseCapExceededError,
    DimensionMismatchError,
    InvalidSpecError,
    InvalidSteeringScenarioError,
    NotHermitianError,
    NotPositiveError,
    PivotNotMaximalError,
    PivotNotMinimalError,
    QdistillError,
)
from .linalg import (
    DimsProfile,
    Ket,
    Operator,
    assemblage_member_fidelity,
    dense_cap,
    herm_sqrt,
    kron,
    partial_trace,
    pure_target_fidelity,
    state_fidelity,
)
from .states import (
    CompactState,
    Family,
    GhzSpec,
    WSpec,
    compact_to_dense,
    make_compact,
    make_dense,
    make_ghz_dense,
    make_w_dense,
    perfect_ghz,
    perfect_w,
)
from .filters import (
    FilterAssignment,
    IndexPartition,
    KrausPair,
    canonicalize_spec,
    ghz_partition_assignment,
    ghz_single_party_pair,
    validate_povm,
    w_assignment,
)
from .ted import (
    DistillationReport,
    ProtocolConfig,
    StateMixture,
    apply_filter_layer,
    closed_form_fidelity_ghz,
    closed_form_fidelity_w,
    distilled_state,
    overall_success,
    run_ted,
    success_prob_per_copy,
)
from .tsd import (
    Assemblage,
    MubFamily,
    SteeringConfig,
    SteeringReport,
    assemblage_fidelity,
    build_assemblage,
    distilled_assemblage,
    filter_assemblage,
    mub_family,
    run_tsd,
)
from .montecarlo import EmpiricalStats, TrialRecord, run_stats, simulate_trial

__version__ = "0.1.0"

__all__ = [
    "Assemblage",
    "BadPartitionError",
    "CompactState",
    "DenseCapExceededError",
    "DimensionMismatchError",
    "DimsProfile",
    "DistillationReport",
    "EmpiricalStats",
    "Family",
    "FilterAssignment",
    "GhzSpec",
    "IndexPartition",
    "InvalidSpecError",
    "InvalidSteeringScenarioError",
    "Ket",
    "KrausPair",
    "MubFamily",
    "NotHermitianError",
    "NotPositiveError",
    "Operator",
    "PivotNotMaximalError",
    "PivotNotMinimalError",
    "ProtocolConfig",
    "QdistillError",
    "StateMixture",
    "SteeringConfig",
    "SteeringReport",
    "TrialRecord",
    "WSpec",
    "apply_filter_layer",
    "assemblage_fidelity",
    "assemblage_member_fidelity",
    "build_assemblage",
    "canonicalize_spec",
    "closed_form_fidelity_ghz",
    "closed_form_fidelity_w",
    "compact_to_dense",
    "dense_cap",
    "distilled_assemblage",
    "distilled_state",
    "filter_assemblage",
    "ghz_partition_assignment",
    "ghz_single_party_pair",
    "herm_sqrt",
    "kron",
    "make_compact",
    "make_dense",
    "make_ghz_dense",
    "make_w_dense",
    "mub_family",
    "overall_success",
    "partial_trace",
    "perfect_ghz",
    "perfect_w",
    "pure_target_fidelity",
    "run_stats",
    "run_ted",
    "run_tsd",
    "simulate_trial",
    "state_fidelity",
    "success_prob_per_copy",
    "validate_povm",
    "w_assignment",
]
