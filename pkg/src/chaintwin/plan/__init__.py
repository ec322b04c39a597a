from .network import Arc, TimeExpandedNetwork, build_time_expanded
from .mincost import FlowSolution, solve_min_cost_flow
from .planner import (
    FlowPlan,
    PlanValidation,
    greedy_baseline,
    plan_flows,
    predicted_trace,
    strip_noise,
    validate_plan,
)

__all__ = [
    "Arc", "TimeExpandedNetwork", "build_time_expanded", "FlowSolution",
    "solve_min_cost_flow", "FlowPlan", "PlanValidation", "greedy_baseline",
    "plan_flows", "predicted_trace", "strip_noise", "validate_plan",
]
