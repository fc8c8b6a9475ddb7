"""Dense Lasserre hierarchy."""

from typing import Optional

from .. import config
from ..errors import LevelTooLowError
from ..poly import PolyProgram
from ..sdp import SdpProblem
from .moments import MomentRelaxationBuilder


def relaxation_order(pp: PolyProgram, level: int) -> int:
    """Half-degree order of hierarchy level ``level`` (1 = first admissible).

    Level 1 is ⌈deg/2⌉: order 1 for quadratic programs, order 2 for
    quartic ones. A quartic formulation whose quartic terms all vanish
    (no quadratic costs, no flow limits) still counts from degree 4. Each
    further level adds one to the half-degree.
    """
    if level < 1:
        raise LevelTooLowError(level, 1)
    degree = max(pp.degree, pp.nominal_degree)
    return (degree + 1) // 2 + level - 1


def build_lasserre(pp: PolyProgram, order: int, basis_cap: Optional[int] = None) -> SdpProblem:
    """Moment relaxation of ``pp`` with one moment matrix over all variables.

    ``order`` is the half-degree: the moment matrix is indexed by monomials
    of degree ≤ order, and the SOS multipliers of the dual certificate have
    degree ≤ 2·order.

    Raises:
        LevelTooLowError: if 2·order is below the degree of some polynomial
        BasisOverflowError: if the moment basis exceeds ``basis_cap``
    """
    builder = MomentRelaxationBuilder(
        pp, order, name=f"{pp.name}/dense{order}", basis_cap=basis_cap or config.BASIS_SIZE_CAP
    )
    everything = tuple(range(pp.nvars))
    builder.add_moment_matrix(everything, "moment")
    for label, g in zip(pp.inequality_labels, pp.inequalities):
        builder.add_localizing(g, everything, label)
    for label, h in zip(pp.equality_labels, pp.equalities):
        builder.add_equality(h, everything, label)
    builder.set_objective(pp.objective)
    return builder.build()
