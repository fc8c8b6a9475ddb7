"""Rank-one extraction and global-optimality certification.

Voltage second moments ``W = E[x xᵀ]`` with ``x = (e, f) = (Re V, Im V)``
are folded into the Hermitian matrix ``H = E[V Vᴴ]``. A rank-one H gives
V up to a global phase; overlapping cliques are phase-aligned, the phase
is fixed at the first generator bus, and the point is certified when it
is feasible and its cost meets the relaxation bound.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la

from .. import config
from ..errors import InconsistentOverlapError
from ..network import OpfMatrices, PowerNetwork, build_opf_matrices, objective_value, residuals
from ..poly import Monomial, lift_values
from ..reports import BoundReport, ReportStatus
from ..sdp import SdpProblem, SdpSolution
from .moments import MomentMap

logger = logging.getLogger(__name__)


@dataclass
class CliqueVoltage:
    """Dominant-eigenvector voltages of one clique."""
    buses: Tuple[int, ...]
    voltage: np.ndarray  # complex, aligned with buses
    rank_gap: float


def hermitian_from_real(W: np.ndarray) -> np.ndarray:
    """H = W_ee + W_ff + j(W_fe − W_feᵀ) for a real 2n×2n second-moment matrix."""
    n = W.shape[0] // 2
    w_ee, w_ff, w_fe = W[:n, :n], W[n:, n:], W[n:, :n]
    return (w_ee + w_ff) + 1j * (w_fe - w_fe.T)


def rank_one_voltage(H: np.ndarray) -> Tuple[np.ndarray, float]:
    """√λ₁·u₁ and λ₂/λ₁ of a Hermitian matrix."""
    H = 0.5 * (H + H.conj().T)
    vals, vecs = la.eigh(H)
    top = float(vals[-1])
    second = float(vals[-2]) if vals.size > 1 else 0.0
    if top <= 0.0:
        return np.zeros(H.shape[0], dtype=complex), float("inf")
    return np.sqrt(top) * vecs[:, -1], max(second, 0.0) / top


def _moment_hermitian(moments: MomentMap, X: List[np.ndarray], buses: Sequence[int], n: int) -> np.ndarray:
    m = len(buses)
    W = np.zeros((2 * m, 2 * m))
    idx = list(buses) + [n + k for k in buses]
    for a in range(2 * m):
        for b in range(a, 2 * m):
            value = moments.moment(X, Monomial.from_indices([idx[a], idx[b]]))
            W[a, b] = W[b, a] = value
    return hermitian_from_real(W)


def clique_voltages(sdp: SdpProblem, solution: SdpSolution, n: int) -> List[CliqueVoltage]:
    """Per-clique voltage estimates from a solved moment or W-form relaxation."""
    voltage = sdp.metadata.get("voltage")
    if voltage is not None:
        blocks = solution.S if voltage["source"] == "S" else solution.X
        V, gap = rank_one_voltage(hermitian_from_real(np.asarray(blocks[voltage["block"]])))
        return [CliqueVoltage(tuple(range(n)), V, gap)]

    moments: MomentMap = sdp.metadata["moments"]
    out = []
    for group in moments.groups:
        members = set(group.variables)
        buses = tuple(k for k in range(n) if k in members and n + k in members)
        if not buses:
            continue
        V, gap = rank_one_voltage(_moment_hermitian(moments, solution.X, buses, n))
        out.append(CliqueVoltage(buses, V, gap))
    return out


def stitch(parts: Sequence[CliqueVoltage], n: int) -> np.ndarray:
    """Phase-align clique voltages on their overlaps into one vector.

    Raises:
        InconsistentOverlapError: if aligned overlaps still differ by more
            than the stitching tolerance
    """
    V = np.full(n, np.nan, dtype=complex)
    owner = np.full(n, -1)
    for c, part in enumerate(parts):
        buses = np.array(part.buses)
        local = part.voltage.copy()
        known = ~np.isnan(V[buses])
        if known.any():
            rotation = np.vdot(local[known], V[buses][known])
            if abs(rotation) > 0.0:
                local *= rotation / abs(rotation)
            deviation = float(np.max(np.abs(local[known] - V[buses][known])))
            if deviation > config.STITCH_TOL:
                others = sorted({int(o) for o in owner[buses][known]})
                raise InconsistentOverlapError(others + [c], deviation)
        fresh = ~known
        V[buses[fresh]] = local[fresh]
        owner[buses[fresh]] = c
    return V


def canonical_phase(net: PowerNetwork, V: np.ndarray) -> np.ndarray:
    """Rotate so that V at the lowest-index generator bus is real and nonnegative."""
    ref = min(net.gens) if net.gens else 0
    if abs(V[ref]) == 0.0:
        return V
    return V * np.exp(-1j * np.angle(V[ref]))


def auxiliary_consistency(
    sdp: SdpProblem, solution: SdpSolution, net: PowerNetwork, x: np.ndarray, mats: OpfMatrices
) -> Tuple[float, float]:
    """Check the auxiliary (non-voltage) variables of a moment relaxation.

    Returns the worst relative gap between a first moment y_a and its value
    lifted from ``x``, and the worst λ₂/λ₁ of [1 yᵀ; y Y] restricted to the
    auxiliaries whose square the objective prices. The second moments of the
    other auxiliaries are left free by the relaxation whenever their limit
    is slack, so only their first moments are compared.
    """
    moments: Optional[MomentMap] = sdp.metadata.get("moments")
    if moments is None or moments.nvars <= 2 * net.n:
        return 0.0, 0.0
    lifted = lift_values(moments.var_names, net, x, mats)
    mismatch = 0.0
    for a in range(2 * net.n, moments.nvars):
        if Monomial.var(a) not in moments.registry:
            continue
        y = moments.moment(solution.X, Monomial.var(a))
        mismatch = max(mismatch, abs(y - lifted[a]) / max(1.0, abs(lifted[a])))

    priced = {
        a
        for a in range(2 * net.n, moments.nvars)
        if sdp.objective.get(moments.registry.get(Monomial.var(a, 2), (-1, 0, 0)), 0.0) != 0.0
    }
    worst = 0.0
    for group in moments.groups:
        rows = [0] + [1 + pos for pos, a in enumerate(group.variables) if a in priced]
        if len(rows) < 2:
            continue
        M = moments.first_order_matrix(solution.X, group)[np.ix_(rows, rows)]
        vals = la.eigvalsh(0.5 * (M + M.T))
        worst = max(worst, max(float(vals[-2]), 0.0) / float(vals[-1]) if vals[-1] > 0.0 else float("inf"))
    return mismatch, worst


def extract_solution(
    sdp: SdpProblem,
    solution: SdpSolution,
    net: PowerNetwork,
    mats: Optional[OpfMatrices] = None,
    rank_tol: float = config.RANK_TOL,
    feasibility_tol: float = config.FEASIBILITY_TOL,
    certification_tol: float = config.CERTIFICATION_TOL,
) -> BoundReport:
    """Try to recover a globally optimal voltage vector from a solved relaxation.

    The returned report carries the bound, rank gap and, whenever a full
    voltage vector could be assembled, the point with its cost and worst
    residual. Run-level fields (case, method, timings) are left to the caller.
    """
    report = BoundReport(method="", lower_bound=solution.bound, status=ReportStatus.BOUND_ONLY)
    if "decomposed" in sdp.metadata:
        report.message = "extraction skipped on a decomposed problem"
        return report

    n = net.n
    parts = clique_voltages(sdp, solution, n)
    report.rank_gap = max((p.rank_gap for p in parts), default=float("inf"))
    covered = {k for p in parts for k in p.buses}
    if len(covered) < n:
        report.message = f"{n - len(covered)} buses not covered by any moment matrix"
        return report
    if report.rank_gap > rank_tol:
        logger.warning("%s: relaxation is not rank one (gap %.3e)", sdp.name, report.rank_gap)
        report.message = f"rank gap {report.rank_gap:.3e} above {rank_tol:g}"
        return report

    V = canonical_phase(net, stitch(parts, n))
    x = np.concatenate([V.real, V.imag])
    mats = mats or build_opf_matrices(net)
    feas = residuals(net, x, mats)
    cost = objective_value(net, x, mats)
    report.extracted_x = [float(v) for v in x]
    report.objective_at_x = float(cost)
    report.max_violation = float(max(feas.max_violation, 0.0))

    mismatch, aux_gap = auxiliary_consistency(sdp, solution, net, x, mats)
    if mismatch > config.AUX_TOL or aux_gap > rank_tol:
        report.message = (
            f"auxiliary moments inconsistent (first-order mismatch {mismatch:.3e}, rank gap {aux_gap:.3e})"
        )
        logger.warning("%s: %s", sdp.name, report.message)
        return report

    gap = abs(cost - solution.bound)
    if report.max_violation <= feasibility_tol and gap <= certification_tol * max(1.0, abs(solution.bound)):
        report.status = ReportStatus.GLOBAL_CERTIFIED
        logger.info("%s: certified global optimum %.6g", sdp.name, cost)
    else:
        report.message = f"extracted point violates {feas.worst} by {feas.max_violation:.3e}, cost {cost:.6g}"
        logger.warning("%s: %s", sdp.name, report.message)
    return report


def voltage_summary(net: PowerNetwork, x: Sequence[float]) -> Dict[str, Tuple[float, float]]:
    """Magnitude and angle (degrees) per bus label."""
    x = np.asarray(x, dtype=float)
    V = x[: net.n] + 1j * x[net.n :]
    return {net.bus_label(k): (float(abs(V[k])), float(np.degrees(np.angle(V[k])))) for k in range(net.n)}
