from .pathing import plan_path
from .engine import AgentState, SimParams, SimulationTrace, run_simulation
from .forces import step_forces

__all__ = [
    "plan_path",
    "AgentState",
    "SimParams",
    "SimulationTrace",
    "run_simulation",
    "step_forces",
]
