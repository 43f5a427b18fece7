"""Online broadcast range assignment: strategies, offline oracles and lower-bound instances."""

from .core import (
    ArrivalInstance,
    AssignmentTrace,
    RangeAssignment,
    candidate_ranges,
    cost_alpha,
    is_broadcast_feasible,
    is_priority_feasible,
    verify_trace,
)
from .oracle import approx_5alpha, maximal_dual, minimal_tight_cover, solve_optimal
from .strategies import StrategyConfig, simulate

__all__ = [
    "ArrivalInstance",
    "AssignmentTrace",
    "RangeAssignment",
    "StrategyConfig",
    "approx_5alpha",
    "candidate_ranges",
    "cost_alpha",
    "is_broadcast_feasible",
    "is_priority_feasible",
    "maximal_dual",
    "minimal_tight_cover",
    "simulate",
    "solve_optimal",
    "verify_trace",
]
