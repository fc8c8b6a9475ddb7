"""Cut subproblem: the most violated certified inequality for a master moment vector.

For each clique I_k the subproblem searches a polynomial p_k of degree ≤ 2
with a degree-4 certificate

    p_k = σ_k + Σ_{g assigned to k} g·σ_{g,k} + Σ_{h assigned to k} h·τ_{h,k}

where σ are Gram-represented SOS polynomials over the clique variables and
τ are free polynomials. Each p_k is nonnegative on the feasible set by
construction. The objective Σ_k ⟨p_k, Y⟩ is minimized subject to the Gram
traces summing to one.

p_k is not a variable of its own: its coefficients are the degree ≤ 2
part of the certificate, and only the degree 3 and 4 coefficients are
matched to zero. Products h·β of degree ≤ 2 are left out of τ (the master
already enforces them), and τ columns that are linearly dependent on the
matched rows are pruned, so the free part of the SDP has full column rank.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la

from ..errors import CoverageGapError, SolverFailureError
from ..poly import Monomial, Polynomial, PolyProgram, monomials_up_to
from ..relax import CliqueDecomposition
from ..relax.moments import half_degree
from ..relax.sparse import clique_ball
from ..relax.sparsity import SPREAD_LABELS
from ..sdp import BlockKind, SdpProblem, SolverOptions, solve
from .cuts import CutPool

logger = logging.getLogger(__name__)

CERTIFICATE_ORDER = 2  # half-degree of the certificate, degree d + 2 = 4
CUT_DEGREE = 2
COEFFICIENT_FLOOR = 1e-12
MULTIPLIER_RANK_TOL = 1e-9  # relative pivot below which a τ column is dependent

Entry = Tuple[int, int, int]


@dataclass
class CutCandidate:
    clique: int
    poly: Polynomial
    value: float  # ⟨p_k, Y⟩


@dataclass
class SubproblemResult:
    objective: float
    candidates: List[CutCandidate]

    @property
    def poly(self) -> Optional[Polynomial]:
        """Sum of the clique pieces."""
        if not self.candidates:
            return None
        total = self.candidates[0].poly
        for cand in self.candidates[1:]:
            total = total + cand.poly
        return total


class _CertificateBuilder:
    """Certificate coefficients keyed by (clique, monomial).

    Monomials of degree ≤ CUT_DEGREE make up the cut p_k, higher ones
    become rows matched to zero.
    """

    def __init__(self, name: str):
        self.sdp = SdpProblem(name=name)
        self.rows: Dict[Tuple[int, Monomial], Dict[Entry, float]] = {}
        self.cut: Dict[Tuple[int, Monomial], Dict[Entry, float]] = {}
        self.scope = 0  # clique whose certificate is being assembled
        self.gram_blocks: List[Tuple[int, int]] = []  # (block, size)

    def _add(self, mono: Monomial, key: Entry, value: float) -> None:
        target = self.cut if mono.degree <= CUT_DEGREE else self.rows
        row = target.setdefault((self.scope, mono), {})
        row[key] = row.get(key, 0.0) + value

    def gram(self, basis: Sequence[Monomial], multiplier: Polynomial, label: str) -> None:
        """Contribution of ``multiplier · bᵀ G b`` with G a new PSD block."""
        block = self.sdp.add_block(len(basis), BlockKind.PSD, label)
        self.gram_blocks.append((block, len(basis)))
        for j in range(len(basis)):
            for i in range(j + 1):
                weight = 1.0 if i == j else 2.0
                base = basis[i] * basis[j]
                for gamma, c in multiplier.items():
                    self._add(base * gamma, (block, i, j), weight * c)

    def free_multipliers(
        self, equalities: Sequence[Tuple[str, Polynomial]], degree: int, clique: Sequence[int]
    ) -> int:
        """One free block of independent h·β columns for the current clique.

        Returns the number of columns kept.
        """
        columns: List[List[Tuple[Monomial, float]]] = []
        for _, h in equalities:
            if h.degree > degree:
                continue
            for beta in monomials_up_to(clique, degree - h.degree):
                if h.degree + beta.degree > CUT_DEGREE:
                    columns.append([(gamma * beta, c) for gamma, c in h.items()])
        if not columns:
            return 0

        index: Dict[Monomial, int] = {}
        for column in columns:
            for mono, _ in column:
                if mono.degree > CUT_DEGREE:
                    index.setdefault(mono, len(index))
        mat = np.zeros((len(index), len(columns)))
        for a, column in enumerate(columns):
            for mono, c in column:
                if mono in index:
                    mat[index[mono], a] += c
        _, r, piv = la.qr(mat, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r))
        rank = int(np.sum(diag > MULTIPLIER_RANK_TOL * diag[0])) if diag.size else 0
        kept = sorted(piv[:rank])
        if not kept:
            return 0
        if len(kept) < len(columns):
            dropped = len(columns) - len(kept)
            logger.debug("clique %d: dropped %d dependent equality multipliers", self.scope, dropped)

        block = self.sdp.add_block(len(kept), BlockKind.FREE, f"tau[{self.scope}]")
        for b, a in enumerate(kept):
            for mono, c in columns[a]:
                self._add(mono, (block, b, b), c)
        return len(kept)

    def finish(self, moments: Mapping[Monomial, float]) -> SdpProblem:
        for scope, mono in sorted(self.rows, key=lambda key: (key[0], key[1].sort_key())):
            coeffs = {k: v for k, v in self.rows[(scope, mono)].items() if v != 0.0}
            if coeffs:
                self.sdp.add_constraint(coeffs, 0.0, tag=f"coef[{scope}]:{mono.render()}")
        trace = {(b, i, i): 1.0 for b, size in self.gram_blocks for i in range(size)}
        self.sdp.add_constraint(trace, 1.0, tag="trace")
        for (_, mono), coeffs in self.cut.items():
            value = moments.get(mono, 0.0)
            if value != 0.0:
                for (b, i, j), c in coeffs.items():
                    self.sdp.add_objective(b, i, j, value * c)
        return self.sdp

    def cut_polynomials(self, nvars: int, blocks: List[np.ndarray], count: int) -> List[Polynomial]:
        """p_k at solved block values, tiny coefficients dropped."""
        terms: List[Dict[Monomial, float]] = [{} for _ in range(count)]
        for (scope, mono), coeffs in self.cut.items():
            terms[scope][mono] = self.sdp.linear_value(coeffs, blocks)
        polys = []
        for piece in terms:
            scale = max((abs(c) for c in piece.values()), default=0.0)
            floor = COEFFICIENT_FLOOR * max(scale, 1.0)
            polys.append(Polynomial(nvars, {m: c for m, c in piece.items() if abs(c) > floor}))
        return polys


def _assigned(
    pp: PolyProgram, pool: CutPool, cd: CliqueDecomposition
) -> Tuple[Dict[int, List[Tuple[str, Polynomial]]], Dict[int, List[Tuple[str, Polynomial]]]]:
    """Inequalities (cuts and clique balls included) and equalities per clique.

    Raises:
        CoverageGapError: if a constraint other than a spread inequality, or a
            cut, has no covering clique
    """
    ineq: Dict[int, List[Tuple[str, Polynomial]]] = {k: [] for k in range(len(cd))}
    eq: Dict[int, List[Tuple[str, Polynomial]]] = {k: [] for k in range(len(cd))}
    for idx, (label, g) in enumerate(zip(pp.inequality_labels, pp.inequalities)):
        k = cd.inequality_clique[idx] if idx < len(cd.inequality_clique) else cd.covering(g.support())
        if k is not None:
            ineq[k].append((label, g))
            continue
        if label not in SPREAD_LABELS:
            raise CoverageGapError(label, g.support())
        for k, clique in enumerate(cd.cliques):
            ball = clique_ball(pp, clique)
            if ball is None:
                raise CoverageGapError(label, g.support())
            ineq[k].append((f"{label}[{k}]", ball))
    for label, cut in zip(pool.labels, pool.polynomials):
        k = cd.covering(cut.support())
        if k is None:
            raise CoverageGapError(label, cut.support())
        ineq[k].append((label, cut))
    for idx, (label, h) in enumerate(zip(pp.equality_labels, pp.equalities)):
        k = cd.equality_clique[idx] if idx < len(cd.equality_clique) else cd.covering(h.support())
        if k is None:
            raise CoverageGapError(label, h.support())
        eq[k].append((label, h))
    return ineq, eq


def solve_subproblem(
    moments: Mapping[Monomial, float],
    pp: PolyProgram,
    pool: CutPool,
    cd: CliqueDecomposition,
    options: Optional[SolverOptions] = None,
) -> SubproblemResult:
    """Minimize ⟨p, Y⟩ over certified degree-2 polynomials p, one piece per clique.

    Raises:
        CoverageGapError: if a constraint has no covering clique
        SolverFailureError: if the SDP solver does not reach Optimal
    """
    ineq, eq = _assigned(pp, pool, cd)
    builder = _CertificateBuilder(f"{pp.name}/subproblem{len(pool)}")
    one = Polynomial.constant(pp.nvars, 1.0)

    for k, clique in enumerate(cd.cliques):
        builder.scope = k
        builder.gram(monomials_up_to(clique, CERTIFICATE_ORDER), one, f"sigma[{k}]")
        for label, g in ineq[k]:
            order = CERTIFICATE_ORDER - half_degree(g)
            if order >= 0:
                builder.gram(monomials_up_to(clique, order), g, f"sigma[{k}:{label}]")
        builder.free_multipliers(eq[k], 2 * CERTIFICATE_ORDER, clique)

    sdp = builder.finish(moments)
    solution = solve(sdp, options)
    if not solution.optimal:
        raise SolverFailureError(solution.status.value, solution.message, solution.iterations)

    candidates = []
    for k, poly in enumerate(builder.cut_polynomials(pp.nvars, solution.X, len(cd))):
        value = sum(c * moments.get(m, 0.0) for m, c in poly.items())
        candidates.append(CutCandidate(k, poly, value))
    objective = float(solution.primal_objective)
    logger.info("subproblem with %d cuts: objective %.3e", len(pool), objective)
    return SubproblemResult(objective, candidates)
