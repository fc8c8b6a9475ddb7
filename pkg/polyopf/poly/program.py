"""Polynomial programs: min f(x) s.t. g_i(x) ≥ 0, h_j(x) = 0."""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from ..errors import VariableSpaceMismatchError
from .polynomial import Polynomial


@dataclass
class PolyProgram:
    nvars: int
    objective: Polynomial
    inequalities: List[Polynomial] = field(default_factory=list)
    equalities: List[Polynomial] = field(default_factory=list)
    var_names: List[str] = field(default_factory=list)
    var_bounds: Optional[List[Tuple[float, float]]] = None
    inequality_labels: List[str] = field(default_factory=list)
    equality_labels: List[str] = field(default_factory=list)
    name: str = ""
    nominal_degree: int = 0  # degree the hierarchy levels count from, if above the actual one

    def __post_init__(self):
        if not self.var_names:
            self.var_names = [f"x{i}" for i in range(self.nvars)]
        for poly in [self.objective, *self.inequalities, *self.equalities]:
            if poly.nvars != self.nvars:
                raise VariableSpaceMismatchError(self.nvars, poly.nvars)
        if len(self.inequality_labels) < len(self.inequalities):
            self.inequality_labels += [
                f"g{i}" for i in range(len(self.inequality_labels), len(self.inequalities))
            ]
        if len(self.equality_labels) < len(self.equalities):
            self.equality_labels += [
                f"h{i}" for i in range(len(self.equality_labels), len(self.equalities))
            ]

    @property
    def degree(self) -> int:
        return max(p.degree for p in self.constraints(include_objective=True))

    def constraints(self, include_objective: bool = False) -> List[Polynomial]:
        polys = list(self.inequalities) + list(self.equalities)
        return [self.objective] + polys if include_objective else polys

    def add_inequality(self, poly: Polynomial, label: str = "") -> None:
        """Append ``poly(x) ≥ 0``."""
        if poly.nvars != self.nvars:
            raise VariableSpaceMismatchError(self.nvars, poly.nvars)
        self.inequalities.append(poly)
        self.inequality_labels.append(label or f"g{len(self.inequalities) - 1}")

    def add_equality(self, poly: Polynomial, label: str = "") -> None:
        """Append ``poly(x) = 0``."""
        if poly.nvars != self.nvars:
            raise VariableSpaceMismatchError(self.nvars, poly.nvars)
        self.equalities.append(poly)
        self.equality_labels.append(label or f"h{len(self.equalities) - 1}")

    def with_inequalities(self, extra: Sequence[Polynomial], labels: Sequence[str] = ()) -> "PolyProgram":
        """Copy of this program with more ``≥ 0`` constraints appended."""
        labels = list(labels) + [f"cut{i}" for i in range(len(labels), len(extra))]
        return PolyProgram(
            nvars=self.nvars,
            objective=self.objective,
            inequalities=list(self.inequalities) + list(extra),
            equalities=list(self.equalities),
            var_names=list(self.var_names),
            var_bounds=list(self.var_bounds) if self.var_bounds else None,
            inequality_labels=list(self.inequality_labels) + labels,
            equality_labels=list(self.equality_labels),
            name=self.name,
            nominal_degree=self.nominal_degree,
        )

    def is_feasible(self, x, tol: float = 1e-8) -> bool:
        return all(g.evaluate(x) >= -tol for g in self.inequalities) and all(
            abs(h.evaluate(x)) <= tol for h in self.equalities
        )

    def dump(self) -> str:
        """Deterministic text form: one polynomial per line, graded-lex terms."""
        names = self.var_names
        lines = [f"# {self.name or 'program'}: {self.nvars} variables, degree {self.degree}"]
        lines.append("vars " + " ".join(names))
        if self.var_bounds:
            for name, (lo, hi) in zip(names, self.var_bounds):
                lines.append(f"bound {name} {lo:.17g} {hi:.17g}")
        lines.append(f"min {self.objective.render(names)}")
        for label, g in zip(self.inequality_labels, self.inequalities):
            lines.append(f"ge {label}: {g.render(names)}")
        for label, h in zip(self.equality_labels, self.equalities):
            lines.append(f"eq {label}: {h.render(names)}")
        return "\n".join(lines) + "\n"
