"""Explicit rank-relaxation SDPs of ACOPF over W ⪰ 0.

``build_lavaei_low_dual`` states the multiplier problem obtained by
matching coefficients of the first-level SOS certificate of the quadratic
formulation. ``build_lavaei_low_primal`` is the W-form rank relaxation.
Both must agree with the first-level moment relaxation of ``build_op2``.
"""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from ..network import OpfMatrices, PowerNetwork, build_opf_matrices
from ..sdp import BlockKind, SdpProblem

logger = logging.getLogger(__name__)


def _upper(mat: sp.spmatrix) -> Dict[Tuple[int, int], float]:
    """Upper-triangle entries (i <= j) of a symmetric sparse matrix."""
    coo = sp.coo_matrix(mat)
    out: Dict[Tuple[int, int], float] = {}
    for i, j, v in zip(coo.row, coo.col, coo.data):
        i, j = int(i), int(j)
        if i <= j and v != 0.0:
            out[(i, j)] = out.get((i, j), 0.0) + float(v)
    return out


def _trace(block: int, mat: sp.spmatrix, scale: float = 1.0) -> Dict[Tuple[int, int, int], float]:
    """Entry coefficients of ``scale * tr(mat W)`` for W in ``block``."""
    return {
        (block, i, j): scale * (v if i == j else 2.0 * v) for (i, j), v in _upper(mat).items()
    }


def _merge(*parts: Dict) -> Dict:
    out: Dict = {}
    for part in parts:
        for k, v in part.items():
            out[k] = out.get(k, 0.0) + v
    return out


def build_lavaei_low_dual(net: PowerNetwork, mats: Optional[OpfMatrices] = None) -> SdpProblem:
    """Maximize the certificate bound φ over the multipliers.

    Blocks: A (2n×2n PSD), B_k (2×2 PSD) per generator with c2 ≠ 0, C_lm
    (3×3 PSD) per flow-limited branch end, one nonnegative block for the
    inequality multipliers (λ̄, λ, γ̄, γ, μ̄, μ, a) and one free block for
    b_k, c_lm, d_lm and for bounds with equal limits. Flow blocks and
    multipliers come in pairs, one per end of a limited branch. The dual slack of
    block A is the voltage second-moment matrix W.
    """
    mats = mats or build_opf_matrices(net)
    n2 = 2 * net.n
    sdp = SdpProblem(name=f"{net.name}/lavaei-low-dual", maximize=True)
    a_blk = sdp.add_block(n2, BlockKind.PSD, "A")

    quad = [(pos, k) for pos, k in enumerate(net.gens) if net.c2[pos] != 0.0]
    b_blocks = {k: sdp.add_block(2, BlockKind.PSD, f"B[{net.bus_label(k)}]") for _, k in quad}
    ends = net.flow_ends
    c_blocks = [sdp.add_block(3, BlockKind.PSD, f"C[{end.label}]") for end in ends]

    # (matrix, objective coefficient, label) for signed and free multipliers
    signed: List[Tuple[Optional[sp.spmatrix], float, str]] = []
    free: List[Tuple[Optional[sp.spmatrix], float, str]] = []

    def bounded(mat, lo, hi, shift, label):
        # lo <= tr(mat W) + shift <= hi
        if lo == hi:
            free.append((mat, -(hi - shift), f"{label}_fix"))
            return
        if np.isfinite(hi):
            signed.append((mat, -(hi - shift), f"{label}_max"))
        if np.isfinite(lo):
            signed.append((-mat, (lo - shift), f"{label}_min"))

    for k in range(net.n):
        bus = net.bus_label(k)
        bounded(mats.Yk[k], net.pmin[k], net.pmax[k], net.pd[k], f"P[{bus}]")
        bounded(mats.Ybar_k[k], net.qmin[k], net.qmax[k], net.qd[k], f"Q[{bus}]")
        bounded(mats.Mk[k], net.vmin[k] ** 2, net.vmax[k] ** 2, 0.0, f"V[{bus}]")

    a_index = []
    for end in ends:
        a_index.append(len(signed))
        signed.append((None, -end.smax ** 2, f"a[{end.label}]"))

    b_index = {}
    for pos, k in quad:
        b_index[k] = len(free)
        free.append((mats.Yk[k], float(net.pd[k]), f"b[{net.bus_label(k)}]"))
    cd_index = []
    for e, end in enumerate(ends):
        cd_index.append(len(free))
        free.append((mats.Ylm[e], 0.0, f"c[{end.label}]"))
        free.append((mats.Ybar_lm[e], 0.0, f"d[{end.label}]"))

    sign_blk = sdp.add_block(len(signed), BlockKind.NONNEG, "multipliers") if signed else None
    free_blk = sdp.add_block(len(free), BlockKind.FREE, "free") if free else None

    # A = Σ_G c1 Y_k + Σ v · Mat_v, entrywise on the upper triangle
    rows: Dict[Tuple[int, int], Dict] = {(i, j): {(a_blk, i, j): 1.0} for j in range(n2) for i in range(j + 1)}
    rhs: Dict[Tuple[int, int], float] = {}
    for pos, k in enumerate(net.gens):
        for key, v in _upper(mats.Yk[k]).items():
            rhs[key] = rhs.get(key, 0.0) + float(net.c1[pos]) * v
    for blk, entries in ((sign_blk, signed), (free_blk, free)):
        for idx, (mat, _, _) in enumerate(entries):
            if mat is None:
                continue
            for key, v in _upper(mat).items():
                rows[key][(blk, idx, idx)] = rows[key].get((blk, idx, idx), 0.0) - v
    for j in range(n2):
        for i in range(j + 1):
            sdp.add_constraint(rows[(i, j)], rhs.get((i, j), 0.0), tag=f"A[{i},{j}]")

    for pos, k in quad:
        blk = b_blocks[k]
        bus = net.bus_label(k)
        sdp.add_constraint({(blk, 1, 1): 1.0}, float(net.c2[pos]), tag=f"B[{bus}]_c2")
        sdp.add_constraint({(blk, 0, 1): 2.0, (free_blk, b_index[k], b_index[k]): 1.0}, 0.0, tag=f"B[{bus}]_b")
        sdp.add_objective(blk, 0, 0, -1.0)

    for e, end in enumerate(ends):
        blk = c_blocks[e]
        label = end.label
        a = a_index[e]
        ci = cd_index[e]
        sdp.add_constraint({(blk, 1, 1): 1.0, (sign_blk, a, a): -1.0}, 0.0, tag=f"C[{label}]_11")
        sdp.add_constraint({(blk, 2, 2): 1.0, (sign_blk, a, a): -1.0}, 0.0, tag=f"C[{label}]_22")
        sdp.add_constraint({(blk, 1, 2): 1.0}, 0.0, tag=f"C[{label}]_12")
        sdp.add_constraint({(blk, 0, 1): 2.0, (free_blk, ci, ci): 1.0}, 0.0, tag=f"C[{label}]_c")
        sdp.add_constraint({(blk, 0, 2): 2.0, (free_blk, ci + 1, ci + 1): 1.0}, 0.0, tag=f"C[{label}]_d")
        sdp.add_objective(blk, 0, 0, -1.0)

    for blk, entries in ((sign_blk, signed), (free_blk, free)):
        for idx, (_, coef, _) in enumerate(entries):
            if coef != 0.0:
                sdp.add_objective(blk, idx, idx, float(coef))

    sdp.objective_offset = float(
        sum(net.c1[pos] * net.pd[k] + net.c0[pos] for pos, k in enumerate(net.gens))
    )
    sdp.metadata["voltage"] = {"block": a_blk, "source": "S"}
    sdp.metadata["multipliers"] = [label for _, _, label in signed]
    logger.info("%s", sdp.describe())
    return sdp


def build_lavaei_low_primal(net: PowerNetwork, mats: Optional[OpfMatrices] = None) -> SdpProblem:
    """Rank relaxation in W form with epigraph blocks for cost and flows."""
    mats = mats or build_opf_matrices(net)
    n2 = 2 * net.n
    sdp = SdpProblem(name=f"{net.name}/lavaei-low-primal")
    w = sdp.add_block(n2, BlockKind.PSD, "W")

    def bounded(mat, lo, hi, shift, label):
        coeffs = _trace(w, mat)
        if lo == hi:
            sdp.add_constraint(coeffs, lo - shift, tag=f"{label}_fix")
            return
        if np.isfinite(hi):
            sdp.add_constraint(_trace(w, mat, -1.0), shift - hi, sense=">=", tag=f"{label}_max")
        if np.isfinite(lo):
            sdp.add_constraint(coeffs, lo - shift, sense=">=", tag=f"{label}_min")

    for k in range(net.n):
        bus = net.bus_label(k)
        bounded(mats.Yk[k], net.pmin[k], net.pmax[k], net.pd[k], f"P[{bus}]")
        bounded(mats.Ybar_k[k], net.qmin[k], net.qmax[k], net.qd[k], f"Q[{bus}]")
        bounded(mats.Mk[k], net.vmin[k] ** 2, net.vmax[k] ** 2, 0.0, f"V[{bus}]")

    for pos, k in enumerate(net.gens):
        for key, v in _trace(w, mats.Yk[k], float(net.c1[pos])).items():
            sdp.add_objective(*key, v)
        if net.c2[pos] == 0.0:
            continue
        bus = net.bus_label(k)
        e = sdp.add_block(2, BlockKind.PSD, f"E[{bus}]")
        sdp.add_constraint({(e, 0, 0): 1.0}, 1.0, tag=f"E[{bus}]_one")
        sdp.add_constraint(_merge({(e, 0, 1): 1.0}, _trace(w, mats.Yk[k], -1.0)), float(net.pd[k]), tag=f"E[{bus}]_pg")
        sdp.add_objective(e, 1, 1, float(net.c2[pos]))

    for e, end in enumerate(net.flow_ends):
        label = end.label
        f = sdp.add_block(3, BlockKind.PSD, f"F[{label}]")
        sdp.add_constraint({(f, 0, 0): 1.0}, end.smax ** 2, tag=f"F[{label}]_s")
        sdp.add_constraint({(f, 1, 1): 1.0}, 1.0, tag=f"F[{label}]_11")
        sdp.add_constraint({(f, 2, 2): 1.0}, 1.0, tag=f"F[{label}]_22")
        sdp.add_constraint({(f, 1, 2): 1.0}, 0.0, tag=f"F[{label}]_12")
        sdp.add_constraint(_merge({(f, 0, 1): 1.0}, _trace(w, mats.Ylm[e], -1.0)), 0.0, tag=f"F[{label}]_p")
        sdp.add_constraint(_merge({(f, 0, 2): 1.0}, _trace(w, mats.Ybar_lm[e], -1.0)), 0.0, tag=f"F[{label}]_q")

    sdp.objective_offset = float(
        sum(net.c1[pos] * net.pd[k] + net.c0[pos] for pos, k in enumerate(net.gens))
    )
    sdp.metadata["voltage"] = {"block": w, "source": "X"}
    logger.info("%s", sdp.describe())
    return sdp
