"""In-house exact LP, transportation, and small-MILP solvers."""

from .lp import LinearProgram, SolveReport, SolverError, solve_lp
from .milp import MilpModel, NodeLimitExceeded, solve_max_milp
from .transportation import KERNEL, max_gain_flow, solve_transportation

__all__ = [
    "LinearProgram",
    "SolveReport",
    "SolverError",
    "solve_lp",
    "MilpModel",
    "NodeLimitExceeded",
    "solve_max_milp",
    "KERNEL",
    "max_gain_flow",
    "solve_transportation",
]
