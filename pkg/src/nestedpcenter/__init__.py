"""Exact solvers, bounds, heuristics and MILP exporters for nested p-center
problems under sum-of-absolute-regret and min-max relative-regret objectives."""

from .bounds import (
    BoundSet,
    build_bounds,
    tighten_relative_lb,
    ub_global_trivial,
    ub_periods_averaged,
    ub_periods_combined,
    ub_periods_residual,
)
from .heuristics import (
    HeuristicResult,
    best_start,
    heuristic_count,
    heuristic_grow,
    heuristic_shrink,
    primal_from_scores,
)
from .instances import (
    Chain,
    Instance,
    ParseError,
    Schedule,
    build_euclidean_distances,
    build_graph_distances,
    eval_radius,
    load_instance,
    parse_pmed,
    parse_tsplib,
)
from .milp import (
    ModelDocument,
    ModelSpec,
    Verdict,
    canonical_assignment,
    emit_model,
    serialize_lp,
    validate_chain_against_model,
)
from .oracle import (
    OracleResult,
    OracleTooLarge,
    enumerate_nested,
    enumerate_pcenter,
    nested_chain_count,
    random_grid_instance,
)
from .pcenter import (
    CoverProblem,
    cover_feasible,
    critical_radius,
    solve_pcenter,
    solve_pcenter_sequence,
)
from .solver import (
    MemoryLimitExceeded,
    SearchNode,
    SolveOptions,
    SolveReport,
    compute_rc_ri,
    compute_regrets,
    node_bound_absolute,
    solve_absolute,
    solve_relative,
)

__all__ = [
    "BoundSet",
    "Chain",
    "CoverProblem",
    "HeuristicResult",
    "Instance",
    "MemoryLimitExceeded",
    "ModelDocument",
    "ModelSpec",
    "OracleResult",
    "OracleTooLarge",
    "ParseError",
    "Schedule",
    "SearchNode",
    "SolveOptions",
    "SolveReport",
    "Verdict",
    "best_start",
    "build_bounds",
    "build_euclidean_distances",
    "build_graph_distances",
    "canonical_assignment",
    "compute_rc_ri",
    "compute_regrets",
    "cover_feasible",
    "critical_radius",
    "emit_model",
    "enumerate_nested",
    "enumerate_pcenter",
    "eval_radius",
    "heuristic_count",
    "heuristic_grow",
    "heuristic_shrink",
    "load_instance",
    "nested_chain_count",
    "node_bound_absolute",
    "parse_pmed",
    "parse_tsplib",
    "primal_from_scores",
    "random_grid_instance",
    "serialize_lp",
    "solve_absolute",
    "solve_pcenter",
    "solve_pcenter_sequence",
    "solve_relative",
    "tighten_relative_lb",
    "ub_global_trivial",
    "ub_periods_averaged",
    "ub_periods_combined",
    "ub_periods_residual",
    "validate_chain_against_model",
]

__version__ = "0.1.0"
