"""Polynomial algebra and the ACOPF polynomial programs."""

from .formulations import build_op2, build_op4, lift_point, lift_values
from .polynomial import Monomial, Polynomial, monomials_up_to
from .program import PolyProgram

__all__ = [
    "Monomial",
    "PolyProgram",
    "Polynomial",
    "build_op2",
    "build_op4",
    "lift_point",
    "lift_values",
    "monomials_up_to",
]
