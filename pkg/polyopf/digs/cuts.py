"""Pool of generated valid inequalities."""

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from .. import config
from ..poly import Monomial, Polynomial


@dataclass
class Cut:
    poly: Polynomial
    iteration: int
    objective: float  # subproblem value that produced it
    clique: int = 0

    @property
    def label(self) -> str:
        return f"cut{self.iteration}.{self.clique}"


@dataclass
class CutPool:
    """Cuts in generation order plus the per-iteration bound history."""
    cuts: List[Cut] = field(default_factory=list)
    history: List[Dict[str, float]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.cuts)

    @property
    def polynomials(self) -> List[Polynomial]:
        return [c.poly for c in self.cuts]

    @property
    def labels(self) -> List[str]:
        return [c.label for c in self.cuts]

    @staticmethod
    def _direction(poly: Polynomial) -> Dict[Monomial, float]:
        norm = float(np.sqrt(sum(c * c for c in poly.terms.values())))
        return {m: c / norm for m, c in poly.terms.items()} if norm > 0.0 else {}

    def is_duplicate(self, poly: Polynomial, tol: float = config.DUPLICATE_CUT_TOL) -> bool:
        """True if ``poly`` points along an existing cut (coefficients normalized to unit length)."""
        new = self._direction(poly)
        for cut in self.cuts:
            old = self._direction(cut.poly)
            keys = set(new) | set(old)
            if max((abs(new.get(k, 0.0) - old.get(k, 0.0)) for k in keys), default=0.0) <= tol:
                return True
        return False

    def add(self, poly: Polynomial, iteration: int, objective: float, clique: int = 0) -> bool:
        """Store ``poly`` unless it duplicates an existing cut."""
        if poly.degree > 2:
            raise ValueError(f"cut of degree {poly.degree} exceeds the master degree 2")
        if self.is_duplicate(poly):
            return False
        self.cuts.append(Cut(poly, iteration, objective, clique))
        return True

    def record(self, iteration: int, bound: float, subproblem_objective: float, seconds: float) -> None:
        self.history.append(
            {
                "iteration": iteration,
                "bound": float(bound),
                "subproblem_objective": float(subproblem_objective),
                "seconds": float(seconds),
            }
        )

    def bounds(self) -> List[float]:
        return [h["bound"] for h in self.history]
