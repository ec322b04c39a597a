from .scenario import ControlAction, Disturbance, FlowAssignment, Scenario, SimConfig
from .cost import CostModel, CostBreakdown, evaluate_cost
from .engine import (
    AppliedFlow,
    FixedPlanPolicy,
    GreedyPolicy,
    SimTrace,
    SimulationRun,
    run,
    step,
)
from .whatif import WhatIfResult, apply_patch, what_if

__all__ = [
    "ControlAction", "Disturbance", "FlowAssignment", "Scenario", "SimConfig",
    "CostModel", "CostBreakdown", "evaluate_cost", "AppliedFlow",
    "FixedPlanPolicy", "GreedyPolicy", "SimTrace", "SimulationRun", "run",
    "step", "WhatIfResult", "apply_patch", "what_if",
]
