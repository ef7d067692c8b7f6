"""Flexibility-graph analysis and design for parallel server systems.

The combinatorial half of the package works on exact rational data: instance
validation and feasibility, redundant-edge detection, resource-pooling
decomposition, sparsest-graph design, single-edge upgrades and multi-step
upgrade planning, and robustness margins under demand perturbation.  The
simulation half runs a discrete-time MaxWeight queueing system and checks the
heavy-traffic predictions the decomposition makes.
"""

from .errors import (
    AlreadyCrp,
    DuplicateEdge,
    EdgeAlreadyPresent,
    EdgeNotPresent,
    EdgeOutOfRange,
    GapUndefined,
    IndexOutOfRange,
    Infeasible,
    InternalMergeStuck,
    InvalidEpsilon,
    InvalidK,
    InvariantViolation,
    IsolatedServer,
    NegativeRate,
    NotAPartition,
    NotFeasiblePoint,
    ProcflexError,
    SizeLimitExceeded,
    TargetAboveDstarStar,
    UnbalancedTotals,
    ZeroVector,
)
from .core import (
    Assignment,
    ProblemInstance,
    SupportGraph,
    check_assignment,
    find_feasible_point,
    format_rational,
    gcd_combined,
    greedy_extreme_point,
    hall_feasible,
    is_extreme_point,
    is_feasible,
    make_instance,
    parse_rational,
    support_graph,
    validate_instance,
)
from .decomposition import (
    CrpDag,
    CrpDecomposition,
    SscBasis,
    crp_condition,
    crp_decomposition,
    crp_graph,
    erp_number,
    full_support_point,
    redundancy_oracle,
    redundant_edges,
    ssc_basis,
    verify_decomposition,
    witness_point,
)
from .design import (
    BalancedCover,
    DesignResult,
    d_star,
    design_flexibility,
    max_balanced_cover,
    min_edges,
)
from .augmentation import EdgeEffect, add_edge_effect, best_single_edge
from .planning import (
    ClosedFormReport,
    GreedyOptimalReport,
    Objective,
    PlanReport,
    Schedule,
    erp_trajectory,
    greedy_vs_optimal_report,
    make_objective,
    plan_schedule,
    structured_schedule,
)
from .robustness import (
    GapReport,
    PerturbationCheck,
    alt_crp_gap,
    check_perturbation,
    crp_gap,
    gap_redundancy_invariance,
)
from .queuesim import (
    ArrivalModel,
    HeavyTrafficReport,
    HeavyTrafficRow,
    SimStats,
    heavy_traffic_check,
    make_arrival_model,
    maxweight_schedule,
    simulate,
    ssc_ratio,
    step,
)

__version__ = "0.1.0"
