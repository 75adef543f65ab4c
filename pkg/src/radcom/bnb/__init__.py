"""Globally optimal constant-modulus waveform design by branch-and-bound."""
from .arcs import ArcBox, arc_bounds, project_arc, project_hull
from .bounds import BoundResult, CmProblem, GpConfig, gp_lower_bound, gp_upper_bound
from .diagnostics import convergence_diagnostics
from .solver import (
    ARS,
    BRS,
    BnbConfig,
    BnbNode,
    BnbResult,
    TraceEntry,
    bnb_solve_column,
    column_problem,
    evaluate_node,
    solve_block,
    subdivide,
)

__all__ = [
    "ArcBox",
    "arc_bounds",
    "project_arc",
    "project_hull",
    "BoundResult",
    "CmProblem",
    "GpConfig",
    "gp_lower_bound",
    "gp_upper_bound",
    "convergence_diagnostics",
    "ARS",
    "BRS",
    "BnbConfig",
    "BnbNode",
    "BnbResult",
    "TraceEntry",
    "bnb_solve_column",
    "column_problem",
    "evaluate_node",
    "solve_block",
    "subdivide",
]
