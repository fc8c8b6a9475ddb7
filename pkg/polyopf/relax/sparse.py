"""Clique-sparse Lasserre hierarchy."""

import logging
from typing import Optional, Sequence

from .. import config
from ..errors import CoverageGapError
from ..poly import Monomial, Polynomial, PolyProgram
from ..sdp import SdpProblem
from .moments import MomentRelaxationBuilder
from .sparsity import SPREAD_LABELS, CliqueDecomposition

logger = logging.getLogger(__name__)


def clique_ball(pp: PolyProgram, clique: Sequence[int]) -> Optional[Polynomial]:
    """Σ_{i∈I} (b_i² − x_i²) from the variable box, or None without bounds."""
    if not pp.var_bounds:
        return None
    terms = {Monomial.var(i, 2): -1.0 for i in clique}
    terms[Monomial.one()] = float(sum(max(abs(lo), abs(hi)) ** 2 for lo, hi in (pp.var_bounds[i] for i in clique)))
    return Polynomial(pp.nvars, terms)


def build_sparse_lasserre(
    pp: PolyProgram, order: int, cd: CliqueDecomposition, basis_cap: Optional[int] = None
) -> SdpProblem:
    """Moment relaxation with one moment matrix per clique of ``cd``.

    Shared monomials of overlapping cliques are tied by equality rows.
    Each constraint is localized over the variables of its assigned clique;
    a spread inequality (the redundant ball) becomes one clique-restricted
    ball per clique.

    Raises:
        CoverageGapError: if a constraint other than a spread inequality has no
            covering clique, or its support is not inside its assigned clique
    """
    builder = MomentRelaxationBuilder(
        pp, order, name=f"{pp.name}/sparse{order}", basis_cap=basis_cap or config.BASIS_SIZE_CAP
    )
    for k, clique in enumerate(cd.cliques):
        builder.add_moment_matrix(clique, f"moment[{k}]")

    for idx, (label, g) in enumerate(zip(pp.inequality_labels, pp.inequalities)):
        k = cd.inequality_clique[idx] if idx < len(cd.inequality_clique) else cd.covering(g.support())
        if k is not None:
            _check_cover(g, cd.cliques[k], label)
            builder.add_localizing(g, cd.cliques[k], label)
            continue
        if label not in SPREAD_LABELS:
            raise CoverageGapError(label, g.support())
        for k, clique in enumerate(cd.cliques):
            ball = clique_ball(pp, clique)
            if ball is None:
                raise CoverageGapError(label, g.support())
            builder.add_localizing(ball, clique, f"{label}[{k}]")

    for idx, (label, h) in enumerate(zip(pp.equality_labels, pp.equalities)):
        k = cd.equality_clique[idx] if idx < len(cd.equality_clique) else cd.covering(h.support())
        if k is None:
            raise CoverageGapError(label, h.support())
        _check_cover(h, cd.cliques[k], label)
        builder.add_equality(h, cd.cliques[k], label)

    builder.set_objective(pp.objective)
    sdp = builder.build()
    sdp.metadata["cliques"] = cd
    return sdp


def _check_cover(poly: Polynomial, clique: Sequence[int], label: str) -> None:
    if not set(poly.support()).issubset(clique):
        raise CoverageGapError(label, poly.support())
