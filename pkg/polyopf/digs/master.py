"""Fixed-degree master relaxation with the current cuts."""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

from ..errors import RelaxationError, SolverFailureError
from ..poly import Monomial, PolyProgram
from ..relax import CliqueDecomposition, build_sparse_lasserre, read_moment_map
from ..sdp import SdpProblem, SdpSolution, SolverOptions, solve
from .cuts import CutPool

logger = logging.getLogger(__name__)

MASTER_DEGREE = 2


@dataclass
class MasterResult:
    bound: float
    moments: Dict[Monomial, float]  # degree ≤ 2
    sdp: SdpProblem
    solution: SdpSolution


def check_degree(pp: PolyProgram) -> None:
    if pp.degree > MASTER_DEGREE:
        raise RelaxationError(f"{pp.name or 'program'} has degree {pp.degree}; cut generation needs degree 2")


def solve_master(
    pp: PolyProgram,
    pool: CutPool,
    cd: CliqueDecomposition,
    options: Optional[SolverOptions] = None,
) -> MasterResult:
    """Level-one sparse relaxation of ``pp`` with every pooled cut as an inequality.

    Raises:
        SolverFailureError: if the SDP solver does not reach Optimal
    """
    check_degree(pp)
    augmented = pp.with_inequalities(pool.polynomials, pool.labels)
    sdp = build_sparse_lasserre(augmented, 1, cd)
    sdp.name = f"{pp.name}/master{len(pool)}"
    solution = solve(sdp, options)
    if not solution.optimal:
        raise SolverFailureError(solution.status.value, solution.message, solution.iterations)
    moments = read_moment_map(sdp).moment_vector(solution.X, MASTER_DEGREE)
    moments[Monomial.one()] = 1.0
    logger.info("master with %d cuts: bound %.8g", len(pool), solution.bound)
    return MasterResult(solution.bound, moments, sdp, solution)
