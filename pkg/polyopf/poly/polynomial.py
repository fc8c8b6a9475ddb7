"""Sparse multivariate polynomials with float coefficients."""

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from ..errors import VariableSpaceMismatchError

Scalar = Union[int, float]


@dataclass(frozen=True, order=False)
class Monomial:
    """Product of variables ``x_i ** e_i`` stored as sorted ``(i, e)`` pairs, e > 0."""

    powers: Tuple[Tuple[int, int], ...] = ()
    degree: int = field(init=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "degree", sum(e for _, e in self.powers))

    @classmethod
    def one(cls) -> "Monomial":
        return _ONE

    @classmethod
    def var(cls, index: int, exponent: int = 1) -> "Monomial":
        return cls(((index, exponent),)) if exponent else _ONE

    @classmethod
    def from_exponents(cls, exponents: Mapping[int, int]) -> "Monomial":
        return cls(tuple(sorted((i, e) for i, e in exponents.items() if e)))

    @classmethod
    def from_indices(cls, indices: Iterable[int]) -> "Monomial":
        """Monomial of a multiset of variable indices, e.g. (0, 0, 2) -> x0² x2."""
        counts: Dict[int, int] = {}
        for i in indices:
            counts[i] = counts.get(i, 0) + 1
        return cls.from_exponents(counts)

    @property
    def variables(self) -> Tuple[int, ...]:
        return tuple(i for i, _ in self.powers)

    @property
    def max_index(self) -> int:
        return self.powers[-1][0] if self.powers else -1

    def exponents(self) -> Dict[int, int]:
        return dict(self.powers)

    def __mul__(self, other: "Monomial") -> "Monomial":
        if not other.powers:
            return self
        if not self.powers:
            return other
        merged = self.exponents()
        for i, e in other.powers:
            merged[i] = merged.get(i, 0) + e
        return Monomial(tuple(sorted(merged.items())))

    def divides(self, other: "Monomial") -> bool:
        theirs = other.exponents()
        return all(theirs.get(i, 0) >= e for i, e in self.powers)

    def evaluate(self, x: Sequence[float]) -> float:
        value = 1.0
        for i, e in self.powers:
            value *= x[i] ** e
        return value

    def sort_key(self) -> Tuple:
        """Graded lexicographic key: 1, x0, x1, ..., x0², x0x1, x1², ..."""
        return (self.degree, tuple((i, -e) for i, e in self.powers))

    def __lt__(self, other: "Monomial") -> bool:
        return self.sort_key() < other.sort_key()

    def render(self, names: Optional[Sequence[str]] = None) -> str:
        if not self.powers:
            return "1"
        parts = []
        for i, e in self.powers:
            name = names[i] if names else f"x{i}"
            parts.append(name if e == 1 else f"{name}^{e}")
        return "*".join(parts)

    def __repr__(self) -> str:
        return f"Monomial({self.render()})"


_ONE = Monomial()


def monomials_up_to(variables: Sequence[int], degree: int) -> List[Monomial]:
    """All monomials over ``variables`` of total degree ≤ degree, graded-lex order."""
    ordered = sorted(variables)
    basis = [_ONE]
    for d in range(1, degree + 1):
        basis.extend(Monomial.from_indices(c) for c in combinations_with_replacement(ordered, d))
    return basis


class Polynomial:
    """Polynomial over a fixed variable space of ``nvars`` variables.

    Terms with zero coefficient are never stored. Arithmetic between two
    polynomials requires the same ``nvars``.
    """

    __slots__ = ("nvars", "_terms")
    __array_ufunc__ = None

    def __init__(self, nvars: int, terms: Optional[Mapping[Monomial, float]] = None):
        self.nvars = nvars
        self._terms: Dict[Monomial, float] = {}
        if terms:
            for mono, coef in terms.items():
                if mono.max_index >= nvars:
                    raise VariableSpaceMismatchError(nvars, mono.max_index + 1)
                if coef != 0.0:
                    self._terms[mono] = self._terms.get(mono, 0.0) + float(coef)
            self._terms = {m: c for m, c in self._terms.items() if c != 0.0}

    # construction

    @classmethod
    def constant(cls, nvars: int, value: float) -> "Polynomial":
        return cls(nvars, {_ONE: value})

    @classmethod
    def variable(cls, nvars: int, index: int, coef: float = 1.0) -> "Polynomial":
        return cls(nvars, {Monomial.var(index): coef})

    @classmethod
    def quadratic_form(cls, nvars: int, mat: sp.spmatrix, offset: int = 0) -> "Polynomial":
        """xᵀ mat x for a symmetric matrix acting on variables offset..offset+n-1."""
        coo = sp.coo_matrix(mat)
        terms: Dict[Monomial, float] = {}
        for i, j, v in zip(coo.row, coo.col, coo.data):
            if v == 0.0:
                continue
            mono = Monomial.from_indices((offset + int(i), offset + int(j)))
            terms[mono] = terms.get(mono, 0.0) + float(v)
        return cls(nvars, terms)

    # access

    @property
    def terms(self) -> Dict[Monomial, float]:
        return dict(self._terms)

    def items(self) -> List[Tuple[Monomial, float]]:
        """Terms in graded-lex order."""
        return sorted(self._terms.items(), key=lambda kv: kv[0].sort_key())

    def __iter__(self) -> Iterator[Monomial]:
        return iter(sorted(self._terms, key=Monomial.sort_key))

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, mono: Monomial) -> float:
        return self._terms.get(mono, 0.0)

    @property
    def degree(self) -> int:
        return max((m.degree for m in self._terms), default=0)

    def support(self) -> Tuple[int, ...]:
        """Sorted variable indices appearing in any term."""
        return tuple(sorted({i for m in self._terms for i in m.variables}))

    def is_zero(self) -> bool:
        return not self._terms

    def constant_term(self) -> float:
        return self._terms.get(_ONE, 0.0)

    # arithmetic

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise VariableSpaceMismatchError(self.nvars, other.nvars)
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Polynomial.constant(self.nvars, float(other))
        return NotImplemented

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms.get(m, 0.0) + c
        return Polynomial(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return self.scale(-1.0)

    def __sub__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self.scale(float(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms: Dict[Monomial, float] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = m1 * m2
                terms[m] = terms.get(m, 0.0) + c1 * c2
        return Polynomial(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        result = Polynomial.constant(self.nvars, 1.0)
        for _ in range(k):
            result = result * self
        return result

    def scale(self, factor: float) -> "Polynomial":
        return Polynomial(self.nvars, {m: c * factor for m, c in self._terms.items()})

    def evaluate(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.nvars:
            raise VariableSpaceMismatchError(self.nvars, x.shape[0])
        return float(sum(c * m.evaluate(x) for m, c in self._terms.items()))

    __call__ = evaluate

    def coefficient_vector(self, basis: Sequence[Monomial]) -> np.ndarray:
        return np.array([self._terms.get(m, 0.0) for m in basis])

    def is_close(self, other: "Polynomial", tol: float = 1e-12) -> bool:
        diff = self - other
        return all(abs(c) <= tol for c in diff._terms.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    __hash__ = None

    def render(self, names: Optional[Sequence[str]] = None) -> str:
        if not self._terms:
            return "0"
        return " ".join(f"{c:+.17g}*{m.render(names)}" for m, c in self.items())

    def __repr__(self) -> str:
        return f"Polynomial({self.render()})"
