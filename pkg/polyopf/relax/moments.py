"""Moment-form relaxations of polynomial programs.

A relaxation holds one moment matrix per variable group (a single group for
the dense hierarchy, one per clique for the sparse one). Every monomial
``α`` has one canonical entry carrying the moment ``y_α``; each further
occurrence of ``α`` in any moment matrix is tied to it by an equality row.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .. import config
from ..errors import BasisOverflowError, CoverageGapError, LevelTooLowError
from ..poly import Monomial, Polynomial, PolyProgram, monomials_up_to
from ..sdp import BlockKind, SdpProblem

logger = logging.getLogger(__name__)

Entry = Tuple[int, int, int]


class MomentBasis:
    """Monomials of degree ≤ order over a variable subset, graded-lex order."""

    def __init__(self, variables: Sequence[int], order: int):
        self.variables = tuple(sorted(variables))
        self.order = order
        self.monomials: List[Monomial] = monomials_up_to(self.variables, order)
        self.index: Dict[Monomial, int] = {m: i for i, m in enumerate(self.monomials)}

    @staticmethod
    def size_for(num_vars: int, order: int) -> int:
        return math.comb(num_vars + order, order)

    def __len__(self) -> int:
        return len(self.monomials)

    def __iter__(self):
        return iter(self.monomials)

    def position(self, mono: Monomial) -> int:
        return self.index[mono]


@dataclass
class MomentGroup:
    """One moment matrix: its SDP block and basis."""
    block: int
    basis: MomentBasis
    label: str = ""

    @property
    def variables(self) -> Tuple[int, ...]:
        return self.basis.variables


@dataclass
class MomentMap:
    """Where each moment lives in a built SdpProblem."""
    nvars: int
    order: int
    groups: List[MomentGroup] = field(default_factory=list)
    registry: Dict[Monomial, Entry] = field(default_factory=dict)
    var_names: List[str] = field(default_factory=list)

    def moment(self, X: List[np.ndarray], mono: Monomial) -> float:
        b, i, j = self.registry[mono]
        return float(X[b][i, j])

    def moment_vector(self, X: List[np.ndarray], max_degree: Optional[int] = None) -> Dict[Monomial, float]:
        return {
            m: float(X[b][i, j])
            for m, (b, i, j) in self.registry.items()
            if max_degree is None or m.degree <= max_degree
        }

    def first_order_matrix(self, X: List[np.ndarray], group: MomentGroup) -> np.ndarray:
        """[1 yᵀ; y Y] of a group: the moment submatrix on degree ≤ 1 monomials."""
        k = 1 + len(group.variables)
        return np.array(X[group.block][:k, :k])


def half_degree(poly: Polynomial) -> int:
    return (poly.degree + 1) // 2


class MomentRelaxationBuilder:
    """Assemble a moment-form SDP for ``pp`` at half-degree ``order``."""

    def __init__(self, pp: PolyProgram, order: int, name: str = "", basis_cap: int = config.BASIS_SIZE_CAP):
        required = max(1, half_degree(pp.objective), *(half_degree(p) for p in pp.constraints()))
        if order < required:
            raise LevelTooLowError(order, required)
        self.pp = pp
        self.order = order
        self.basis_cap = basis_cap
        self.sdp = SdpProblem(name=name or f"{pp.name}/order{order}")
        self.map = MomentMap(nvars=pp.nvars, order=order, var_names=list(pp.var_names))
        self.sdp.metadata["moments"] = self.map

    # moment matrices

    def add_moment_matrix(self, variables: Sequence[int], label: str = "") -> MomentGroup:
        size = MomentBasis.size_for(len(variables), self.order)
        if size > self.basis_cap:
            raise BasisOverflowError(size, self.basis_cap)
        basis = MomentBasis(variables, self.order)
        block = self.sdp.add_block(len(basis), BlockKind.PSD, label or f"moment{len(self.map.groups)}")
        registry = self.map.registry
        mons = basis.monomials
        for j in range(len(mons)):
            for i in range(j + 1):
                mono = mons[i] * mons[j]
                entry = (block, i, j)
                canon = registry.get(mono)
                if canon is None:
                    registry[mono] = entry
                    if not mono.powers:
                        self.sdp.add_constraint({entry: 1.0}, 1.0, tag="y0")
                else:
                    self.sdp.add_constraint(
                        {entry: 1.0, canon: -1.0}, 0.0, tag=f"moment:{mono.render(self.pp.var_names)}"
                    )
        group = MomentGroup(block, basis, label)
        self.map.groups.append(group)
        return group

    def entry(self, mono: Monomial, label: str = "") -> Entry:
        try:
            return self.map.registry[mono]
        except KeyError:
            raise CoverageGapError(label or mono.render(self.pp.var_names), mono.variables) from None

    def linearize(self, poly: Polynomial, shift: Monomial = Monomial.one(), label: str = "") -> Tuple[Dict[Entry, float], float]:
        """Riesz functional of ``poly * shift``: entry coefficients plus constant."""
        coeffs: Dict[Entry, float] = {}
        constant = 0.0
        for mono, coef in poly.items():
            prod = mono * shift
            if not prod.powers:
                constant += coef
                continue
            key = self.entry(prod, label)
            coeffs[key] = coeffs.get(key, 0.0) + coef
        return coeffs, constant

    # constraints

    def add_localizing(self, g: Polynomial, variables: Sequence[int], label: str = "") -> Optional[int]:
        """M_{order − ⌈deg g/2⌉}(g y) ⪰ 0 over ``variables``; a scalar row at order 0."""
        loc_order = self.order - half_degree(g)
        if loc_order == 0:
            coeffs, constant = self.linearize(g, label=label)
            self.sdp.add_constraint(coeffs, -constant, sense=">=", tag=f"ineq:{label}")
            return None
        basis = MomentBasis(variables, loc_order)
        block = self.sdp.add_block(len(basis), BlockKind.PSD, f"loc:{label}")
        mons = basis.monomials
        for j in range(len(mons)):
            for i in range(j + 1):
                coeffs, constant = self.linearize(g, mons[i] * mons[j], label)
                coeffs[(block, i, j)] = coeffs.get((block, i, j), 0.0) - 1.0
                self.sdp.add_constraint(coeffs, -constant, tag=f"loc:{label}")
        return block

    def add_equality(self, h: Polynomial, variables: Sequence[int], label: str = "") -> int:
        """L(h · β) = 0 for every monomial β over ``variables`` with deg β ≤ 2·order − deg h."""
        rows = 0
        for beta in monomials_up_to(variables, 2 * self.order - h.degree):
            coeffs, constant = self.linearize(h, beta, label)
            if not coeffs:
                continue
            self.sdp.add_constraint(coeffs, -constant, tag=f"eq:{label}")
            rows += 1
        return rows

    def set_objective(self, f: Polynomial) -> None:
        coeffs, constant = self.linearize(f, label="objective")
        for (b, i, j), c in coeffs.items():
            self.sdp.add_objective(b, i, j, c)
        self.sdp.objective_offset = constant

    def build(self) -> SdpProblem:
        logger.info("%s", self.sdp.describe())
        return self.sdp


def read_moment_map(sdp: SdpProblem) -> MomentMap:
    moments = sdp.metadata.get("moments")
    if moments is None:
        raise ValueError(f"{sdp.name} carries no moment map")
    return moments
