"""Block-diagonal SDPs, the interior-point solver and SDPA interop."""

from .problem import Block, BlockKind, Constraint, SdpProblem, StandardForm, smat, svec
from .sdpa import read_sdpa, write_sdpa
from .solver import InteriorPointSolver, SdpSolution, SolverOptions, SolverStatus, solve

__all__ = [
    "Block",
    "BlockKind",
    "Constraint",
    "InteriorPointSolver",
    "SdpProblem",
    "SdpSolution",
    "SolverOptions",
    "SolverStatus",
    "StandardForm",
    "read_sdpa",
    "smat",
    "solve",
    "svec",
    "write_sdpa",
]
