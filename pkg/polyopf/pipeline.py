"""End-to-end runs: case -> formulation -> relaxation -> solve -> extraction."""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .casedata import CaseData, load_case
from .digs import digs_loop
from .errors import InconsistentOverlapError, PolyOpfError
from .network import OpfMatrices, PowerNetwork, build_network, build_opf_matrices
from .poly import PolyProgram, build_op2, build_op4
from .relax import (
    CliqueDecomposition,
    build_csp,
    build_lasserre,
    build_lavaei_low_dual,
    build_sparse_lasserre,
    chordal_cliques,
    decompose_psd,
    extract_solution,
    largest_psd_block,
    relaxation_order,
)
from .reports import BoundReport, ReportStatus, SweepTable
from .run_config import RunConfig
from .sdp import SdpProblem, SolverOptions, solve

logger = logging.getLogger(__name__)

PHASES = ("parse", "build", "solve", "extract")


@dataclass
class Prepared:
    """Parsed case, network, OPF matrices and polynomial program of one run."""
    cfg: RunConfig
    case: CaseData
    net: PowerNetwork
    mats: OpfMatrices
    pp: PolyProgram
    timings: Dict[str, float] = field(default_factory=dict)


class _Timer:
    def __init__(self, timings: Dict[str, float], phase: str):
        self.timings = timings
        self.phase = phase

    def __enter__(self):
        self.started = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.timings[self.phase] = self.timings.get(self.phase, 0.0) + time.perf_counter() - self.started
        return False


def prepare(cfg: RunConfig) -> Prepared:
    """Load the case and build the network and the polynomial program."""
    cfg.validate()
    timings: Dict[str, float] = {}
    with _Timer(timings, "parse"):
        case = load_case(cfg.case, cfg.overrides)
        net = build_network(case)
        mats = build_opf_matrices(net)
    with _Timer(timings, "build"):
        pp = build_op2(net, mats) if cfg.formulation == "op2" else build_op4(net, mats)
    return Prepared(cfg, case, net, mats, pp, timings)


def clique_decomposition(prep: Prepared) -> CliqueDecomposition:
    order = relaxation_order(prep.pp, prep.cfg.level)
    return chordal_cliques(build_csp(prep.pp), order=order, merge_threshold=prep.cfg.merge_threshold)


def build_relaxation(prep: Prepared) -> SdpProblem:
    """The SDP a run solves (the first master for DIGS)."""
    cfg = prep.cfg
    with _Timer(prep.timings, "build"):
        if cfg.method == "lavaei-low":
            sdp = build_lavaei_low_dual(prep.net, prep.mats)
        elif cfg.method == "dense":
            sdp = build_lasserre(prep.pp, relaxation_order(prep.pp, cfg.level))
        else:
            order = 1 if cfg.method == "digs" else relaxation_order(prep.pp, cfg.level)
            sdp = build_sparse_lasserre(prep.pp, order, clique_decomposition(prep))
        if cfg.decompose:
            sdp = decompose_psd(sdp, largest_psd_block(sdp))
    return sdp


def _dimensions(sdp: SdpProblem) -> Dict[str, int]:
    psd = [sdp.blocks[b].size for b in sdp.psd_blocks()]
    return {
        "rows": sdp.num_constraints,
        "scalars": sdp.num_scalars,
        "blocks": len(sdp.blocks),
        "max_block": max(psd, default=0),
    }


def _finish(report: BoundReport, prep: Prepared) -> BoundReport:
    cfg = prep.cfg
    report.case = prep.case.name or cfg.case
    report.overrides = {k: f"{v:g}" for k, v in cfg.overrides.items()}
    report.method = cfg.method
    report.formulation = cfg.formulation
    report.level = cfg.level
    report.timings = {p: round(prep.timings.get(p, 0.0), 6) for p in PHASES}
    report.wall_time = sum(prep.timings.values())
    return report


def _run_digs(prep: Prepared) -> BoundReport:
    cfg = prep.cfg
    with _Timer(prep.timings, "build"):
        cd = clique_decomposition(prep)
    with _Timer(prep.timings, "solve"):
        report, pool = digs_loop(
            prep.pp, prep.net, max_iter=cfg.max_iter, eps=cfg.eps, time_budget=cfg.time_budget,
            cd=cd, options=SolverOptions(feas_tol=cfg.feas_tol, gap_tol=cfg.gap_tol),
        )
    report.solver_status = "Optimal" if report.status is not ReportStatus.SOLVER_FAILURE else "Failed"
    report.dimensions = {"cuts": len(pool)}
    return _finish(report, prep)


def run(cfg: RunConfig) -> BoundReport:
    """Execute one configured run.

    Configuration and input errors raise; solver trouble is reported
    through the status of the returned BoundReport.
    """
    prep = prepare(cfg)
    logger.info("running %s on %s", cfg.spec, prep.net.name)
    if cfg.method == "digs":
        return _run_digs(prep)

    sdp = build_relaxation(prep)
    with _Timer(prep.timings, "solve"):
        solution = solve(sdp, SolverOptions(feas_tol=cfg.feas_tol, gap_tol=cfg.gap_tol))

    if not solution.optimal:
        report = BoundReport(method=cfg.method, status=ReportStatus.SOLVER_FAILURE, message=solution.message)
    else:
        with _Timer(prep.timings, "extract"):
            try:
                report = extract_solution(sdp, solution, prep.net, prep.mats)
            except InconsistentOverlapError as exc:
                report = BoundReport(
                    method=cfg.method, lower_bound=solution.bound, status=ReportStatus.BOUND_ONLY, message=str(exc)
                )
    report.solver_status = solution.status.value
    report.iterations = solution.iterations
    report.dimensions = _dimensions(sdp)
    return _finish(report, prep)


# --- sweeps -----------------------------------------------------------------

def _run_cell(cfg: RunConfig) -> Union[BoundReport, str]:
    try:
        return run(cfg)
    except PolyOpfError as exc:
        return f"{type(exc).__name__}: {exc}"


def sweep(
    cfg: RunConfig,
    parameter: str,
    values: Sequence[float],
    methods: Sequence[str],
    jobs: Optional[int] = None,
) -> SweepTable:
    """One run per (value, method spec); failing cells are recorded, not raised.

    Raises:
        OverrideError: if ``parameter`` is not an override key of the case
    """
    values = [float(v) for v in values]
    methods = list(methods) or [cfg.spec]
    table = SweepTable(case=cfg.case, parameter=parameter, values=values, methods=methods)
    if not values:
        return table
    load_case(cfg.case, {parameter: values[0]})

    cells: List[Tuple[float, str, RunConfig]] = []
    for value in values:
        for spec in methods:
            cells.append((value, spec, cfg.with_override(parameter, value).with_method(spec)))

    jobs = jobs or cfg.jobs
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_cell, [c for _, _, c in cells]))
    else:
        outcomes = [_run_cell(c) for _, _, c in cells]

    for (value, spec, _), outcome in zip(cells, outcomes):
        table.set(value, spec, outcome)
        if isinstance(outcome, str):
            logger.warning("%s=%g %s failed: %s", parameter, value, spec, outcome)
    return table
