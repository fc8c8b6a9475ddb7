"""Dynamic inequality generation on the quadratic formulation."""

from .cuts import Cut, CutPool
from .loop import digs_loop
from .master import MasterResult, solve_master
from .subproblem import SubproblemResult, solve_subproblem

__all__ = [
    "Cut",
    "CutPool",
    "MasterResult",
    "SubproblemResult",
    "digs_loop",
    "solve_master",
    "solve_subproblem",
]
