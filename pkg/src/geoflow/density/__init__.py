"""Quantitative density machinery: visiting-time search with certificates,
explicit constants, and maximum-gap experiments."""

from .constants import (
    ConstantsLedger,
    HypothesisViolated,
    SymbolicPower,
    constants,
    log2_bounds,
    octagon_ledger,
)
from .visit import (
    EndpointSeparation,
    FinalEvent,
    OracleCapExceeded,
    OracleVisit,
    SplitStep,
    VisitCertificate,
    cascade_search,
    endpoint_distance,
    find_visit_oracle,
    locate_time,
    replay_certificate,
    verify_visit,
)
from .gaps import (
    AlignedSquare,
    FitReport,
    GapProfile,
    GapRow,
    GapTracker,
    SquareMiss,
    SquareVisit,
    aligned_square_visit,
    gap_profile,
    max_gap,
    superdensity_fit,
)

__all__ = [
    "ConstantsLedger",
    "HypothesisViolated",
    "SymbolicPower",
    "constants",
    "octagon_ledger",
    "log2_bounds",
    "VisitCertificate",
    "SplitStep",
    "FinalEvent",
    "OracleVisit",
    "OracleCapExceeded",
    "EndpointSeparation",
    "cascade_search",
    "find_visit_oracle",
    "replay_certificate",
    "verify_visit",
    "locate_time",
    "endpoint_distance",
    "GapProfile",
    "GapRow",
    "GapTracker",
    "max_gap",
    "gap_profile",
    "superdensity_fit",
    "FitReport",
    "AlignedSquare",
    "SquareVisit",
    "SquareMiss",
    "aligned_square_visit",
]
