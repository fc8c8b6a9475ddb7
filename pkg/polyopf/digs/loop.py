"""Dynamic inequality generation: alternate master and cut subproblem."""

import logging
import math
import time
from typing import Optional, Tuple

from .. import config
from ..errors import SolverFailureError
from ..network import PowerNetwork
from ..poly import PolyProgram
from ..relax import CliqueDecomposition, build_csp, chordal_cliques, extract_solution
from ..reports import BoundReport, ReportStatus
from ..sdp import SolverOptions
from .cuts import CutPool
from .master import check_degree, solve_master
from .subproblem import solve_subproblem

logger = logging.getLogger(__name__)


def digs_loop(
    pp: PolyProgram,
    net: Optional[PowerNetwork] = None,
    max_iter: int = config.DIGS_MAX_ITER,
    eps: float = config.DIGS_EPS,
    time_budget: float = config.DIGS_TIME_BUDGET,
    cd: Optional[CliqueDecomposition] = None,
    options: Optional[SolverOptions] = None,
) -> Tuple[BoundReport, CutPool]:
    """Improve the level-one bound of ``pp`` with generated cuts.

    Stops when the subproblem objective is at least ``-eps * (1 + |bound|)``
    for the current master bound (an infinite eps stops right after the
    first master), after ``max_iter`` cut rounds, or once ``time_budget``
    seconds have elapsed. The report is certified only if ``net`` is given,
    the loop did not stop on a repeated cut and the final master passes
    extraction.
    """
    started = time.perf_counter()
    check_degree(pp)
    cd = cd or chordal_cliques(build_csp(pp), order=1, merge_threshold=config.MERGE_THRESHOLD)
    pool = CutPool()

    try:
        master = solve_master(pp, pool, cd, options)
    except SolverFailureError as exc:
        report = BoundReport(method="digs", status=ReportStatus.SOLVER_FAILURE, message=str(exc))
        report.wall_time = time.perf_counter() - started
        return report, pool
    pool.record(0, master.bound, float("nan"), time.perf_counter() - started)

    iteration = 0
    message = ""
    repeated = False
    while True:
        elapsed = time.perf_counter() - started
        if not math.isfinite(eps):
            message = "stopped after the first master (eps = inf)"
            break
        if iteration >= max_iter:
            message = f"iteration limit {max_iter} reached"
            break
        if elapsed > time_budget:
            message = f"time budget of {time_budget:g}s exhausted"
            break

        try:
            sub = solve_subproblem(master.moments, pp, pool, cd, options)
        except SolverFailureError as exc:
            message = f"subproblem failed: {exc}"
            break
        pool.history[-1]["subproblem_objective"] = sub.objective
        threshold = eps * (1.0 + abs(master.bound))
        if sub.objective >= -threshold:
            logger.info("no violated cut (objective %.3e >= -%.3e)", sub.objective, threshold)
            break

        iteration += 1
        added = 0
        for cand in sub.candidates:
            if cand.value < 0.0 and pool.add(cand.poly, iteration, cand.value, cand.clique):
                added += 1
        if not added:
            repeated = True
            message = "subproblem repeated an existing cut"
            logger.warning("%s: %s", pp.name, message)
            break

        try:
            master = solve_master(pp, pool, cd, options)
        except SolverFailureError as exc:
            message = f"master failed after {len(pool)} cuts: {exc}"
            break
        pool.record(iteration, master.bound, float("nan"), time.perf_counter() - started)
        logger.info("iteration %d: %d cuts, bound %.8g", iteration, len(pool), master.bound)

    if net is not None:
        report = extract_solution(master.sdp, master.solution, net)
    else:
        report = BoundReport(method="digs", lower_bound=master.bound, status=ReportStatus.BOUND_ONLY)
    if repeated:
        report.status = ReportStatus.BOUND_ONLY
    report.method = "digs"
    report.iterations = iteration
    report.history = list(pool.history)
    report.message = "; ".join(m for m in (message, report.message) if m)
    report.wall_time = time.perf_counter() - started
    return report, pool
