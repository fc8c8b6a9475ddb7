"""Chordal conversion of one large PSD block into clique blocks.

Two conversions are available, chosen from how the block is used:

* domain: the block only enters through entries on a sparse aggregate
  pattern. It is replaced by one PSD block per clique of a chordal
  extension plus equalities identifying entries shared along the clique
  tree (PSD completion).
* range: every entry is used, but the entries outside a sparse pattern are
  pinned to zero by single-entry rows. The block is then a sum of PSD
  matrices supported on the cliques, and every row sums its clique copies.

A block that fits neither form is returned unchanged.
"""

import logging
from typing import Dict, List, Optional, Set, Tuple

from ..sdp import BlockKind, SdpProblem
from .sparsity import CliqueDecomposition, CspGraph, chordal_cliques

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]


def _block_pattern(sdp: SdpProblem, block: int) -> Tuple[Set[Pair], Set[int]]:
    """Off-diagonal entries of ``block`` in use, and the rows pinning one entry to zero."""
    used: Set[Pair] = set()
    pins: Set[int] = set()
    for key in sdp.objective:
        if key[0] == block and key[1] != key[2]:
            used.add((key[1], key[2]))
    for row, con in enumerate(sdp.constraints):
        keys = list(con.coeffs)
        if (
            con.sense == "="
            and con.rhs == 0.0
            and len(keys) == 1
            and keys[0][0] == block
            and keys[0][1] != keys[0][2]
        ):
            pins.add(row)
        for b, i, j in keys:
            if b == block and i != j:
                used.add((i, j))
    return used, pins


def _active_pattern(sdp: SdpProblem, block: int, pins: Set[int]) -> Set[Pair]:
    active = {(i, j) for (b, i, j) in sdp.objective if b == block and i != j}
    for row, con in enumerate(sdp.constraints):
        if row in pins:
            continue
        active.update((i, j) for (b, i, j) in con.coeffs if b == block and i != j)
    return active


def decompose_psd(
    sdp: SdpProblem, block: int, cd: Optional[CliqueDecomposition] = None
) -> SdpProblem:
    """Replace PSD block ``block`` by clique blocks; the optimal value is kept.

    ``cd`` may supply the cliques of the block's pattern; by default they
    come from the chordal extension of the aggregate sparsity.
    """
    target = sdp.blocks[block]
    if target.kind is not BlockKind.PSD:
        raise ValueError(f"block {block} of {sdp.name} is not a PSD block")
    n = target.size
    full = n * (n - 1) // 2

    used, pins = _block_pattern(sdp, block)
    if len(used) < full:
        mode, edges = "domain", used
    else:
        active = _active_pattern(sdp, block, pins)
        if len(active) == full:
            logger.info("block %d of %s is dense, nothing to decompose", block, sdp.name)
            return sdp
        mode, edges = "range", active

    cd = cd or chordal_cliques(CspGraph.from_edges(n, edges), merge_threshold=0)
    if len(cd) == 1:
        logger.info("block %d of %s has a single clique, nothing to decompose", block, sdp.name)
        return sdp

    out = SdpProblem(name=f"{sdp.name}/decomposed", maximize=sdp.maximize)
    block_map: Dict[int, int] = {}
    clique_blocks: List[int] = []
    for b, blk in enumerate(sdp.blocks):
        if b == block:
            for k, clique in enumerate(cd.cliques):
                clique_blocks.append(out.add_block(len(clique), BlockKind.PSD, f"{blk.label or b}[{k}]"))
        else:
            block_map[b] = out.add_block(blk.size, blk.kind, blk.label)
    local = [{v: pos for pos, v in enumerate(clique)} for clique in cd.cliques]
    holders: Dict[Pair, List[int]] = {}

    def cliques_of(i: int, j: int) -> List[int]:
        if (i, j) not in holders:
            owners = [k for k, clique in enumerate(local) if i in clique and j in clique]
            holders[(i, j)] = owners[:1] if mode == "domain" else owners
        return holders[(i, j)]

    def remap(coeffs):
        mapped: Dict[Tuple[int, int, int], float] = {}
        for (b, i, j), value in coeffs.items():
            if b != block:
                key = (block_map[b], i, j)
                mapped[key] = mapped.get(key, 0.0) + value
                continue
            for k in cliques_of(i, j):
                key = (clique_blocks[k], local[k][i], local[k][j])
                mapped[key] = mapped.get(key, 0.0) + value
        return mapped

    for (b, i, j), value in remap(sdp.objective).items():
        out.add_objective(b, i, j, value)
    out.objective_offset = sdp.objective_offset

    dropped = 0
    for con in sdp.constraints:
        coeffs = remap(con.coeffs)
        if not coeffs:
            dropped += 1
            continue
        out.add_constraint(coeffs, con.rhs, con.sense, con.tag)

    overlaps = 0
    if mode == "domain":
        for k, parent in enumerate(cd.parents):
            sep = cd.separator(k)
            for a_pos, a in enumerate(sep):
                for c in sep[a_pos:]:
                    out.add_constraint(
                        {
                            (clique_blocks[k], local[k][a], local[k][c]): 1.0,
                            (clique_blocks[parent], local[parent][a], local[parent][c]): -1.0,
                        },
                        0.0,
                        tag=f"overlap[{k},{parent}]",
                    )
                    overlaps += 1

    out.metadata = {
        key: value for key, value in sdp.metadata.items() if key not in ("moments", "voltage")
    }
    out.metadata["decomposed"] = {
        "block": block,
        "mode": mode,
        "cliques": [list(c) for c in cd.cliques],
    }
    logger.info(
        "%s: %s conversion of block %d into %d cliques (%d overlap rows, %d rows dropped)",
        sdp.name, mode, block, len(cd), overlaps, dropped,
    )
    return out


def largest_psd_block(sdp: SdpProblem) -> int:
    return max(sdp.psd_blocks(), key=lambda b: (sdp.blocks[b].size, -b))
