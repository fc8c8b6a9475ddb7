"""Moment relaxations of polynomial programs and their post-processing."""

from .completion import decompose_psd, largest_psd_block
from .dense import build_lasserre, relaxation_order
from .extraction import extract_solution, hermitian_from_real, rank_one_voltage
from .lavaei_low import build_lavaei_low_dual, build_lavaei_low_primal
from .moments import MomentMap, MomentRelaxationBuilder, read_moment_map
from .sparse import build_sparse_lasserre
from .sparsity import CliqueDecomposition, CspGraph, build_csp, chordal_cliques

__all__ = [
    "CliqueDecomposition",
    "CspGraph",
    "MomentMap",
    "MomentRelaxationBuilder",
    "build_csp",
    "build_lasserre",
    "build_lavaei_low_dual",
    "build_lavaei_low_primal",
    "build_sparse_lasserre",
    "chordal_cliques",
    "decompose_psd",
    "extract_solution",
    "hermitian_from_real",
    "largest_psd_block",
    "rank_one_voltage",
    "read_moment_map",
]
