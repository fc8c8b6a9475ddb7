"""Block-diagonal semidefinite programs and their vectorized standard form.

Entry convention: a coefficient ``c`` on entry ``(block, i, j)`` with
``i <= j`` multiplies the scalar value ``X[i, j]`` exactly once, so the
equivalent symmetric coefficient matrix holds ``c/2`` at ``(i, j)`` and
``(j, i)``. Non-PSD blocks are diagonal and only accept ``i == j``.

The standard form stacks every block into one vector: PSD blocks as
``svec`` (upper triangle, column-major, off-diagonals scaled by √2), the
nonnegative and free blocks as plain vectors. ``≥`` rows receive a
nonnegative slack.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np
import scipy.sparse as sp

Entry = Tuple[int, int, int]

SQRT2 = float(np.sqrt(2.0))


class BlockKind(str, Enum):
    PSD = "psd"
    NONNEG = "nonneg"
    FREE = "free"


@dataclass(frozen=True)
class Block:
    size: int
    kind: BlockKind = BlockKind.PSD
    label: str = ""

    @property
    def num_scalars(self) -> int:
        if self.kind is BlockKind.PSD:
            return self.size * (self.size + 1) // 2
        return self.size


@dataclass
class Constraint:
    coeffs: Dict[Entry, float]
    rhs: float
    sense: str = "="  # "=" or ">="
    tag: str = ""


def svec_index(i: int, j: int) -> int:
    """Position of (i, j), i <= j, inside the svec of a symmetric matrix."""
    if i > j:
        i, j = j, i
    return j * (j + 1) // 2 + i


def svec(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    rows, cols = np.triu_indices(n)
    order = np.lexsort((rows, cols))
    rows, cols = rows[order], cols[order]
    scale = np.where(rows == cols, 1.0, SQRT2)
    return mat[rows, cols] * scale


def smat(vec: np.ndarray, n: int) -> np.ndarray:
    rows, cols = np.triu_indices(n)
    order = np.lexsort((rows, cols))
    rows, cols = rows[order], cols[order]
    vals = np.where(rows == cols, vec, vec / SQRT2)
    mat = np.zeros((n, n))
    mat[rows, cols] = vals
    mat[cols, rows] = vals
    return mat


def svec_pairs(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Row/column index arrays (P, Q) with P <= Q in svec order."""
    rows, cols = np.triu_indices(n)
    order = np.lexsort((rows, cols))
    return rows[order], cols[order]


class SdpProblem:
    """min (or max) Σ c·X  s.t.  Σ a·X (= | ≥) b,  X block-diagonal in the cone."""

    def __init__(self, name: str = "", maximize: bool = False):
        self.name = name
        self.maximize = maximize
        self.blocks: List[Block] = []
        self.objective: Dict[Entry, float] = {}
        self.objective_offset = 0.0
        self.constraints: List[Constraint] = []
        self.metadata: Dict[str, Any] = {}

    # building

    def add_block(self, size: int, kind: BlockKind = BlockKind.PSD, label: str = "") -> int:
        self.blocks.append(Block(size, BlockKind(kind), label))
        return len(self.blocks) - 1

    def _entry(self, key: Entry) -> Entry:
        b, i, j = key
        if i > j:
            i, j = j, i
        block = self.blocks[b]
        if not (0 <= i and j < block.size):
            raise IndexError(f"entry ({i}, {j}) outside block {b} of size {block.size}")
        if block.kind is not BlockKind.PSD and i != j:
            raise IndexError(f"off-diagonal entry ({i}, {j}) in diagonal block {b}")
        return (b, i, j)

    def add_constraint(
        self, coeffs: Mapping[Entry, float], rhs: float, sense: str = "=", tag: str = ""
    ) -> int:
        if sense not in ("=", ">="):
            raise ValueError(f"unknown constraint sense {sense!r}")
        merged: Dict[Entry, float] = {}
        for key, value in coeffs.items():
            key = self._entry(key)
            merged[key] = merged.get(key, 0.0) + float(value)
        merged = {k: v for k, v in merged.items() if v != 0.0}
        self.constraints.append(Constraint(merged, float(rhs), sense, tag))
        return len(self.constraints) - 1

    def add_objective(self, block: int, i: int, j: int, value: float) -> None:
        key = self._entry((block, i, j))
        self.objective[key] = self.objective.get(key, 0.0) + float(value)

    # inspection

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    @property
    def num_scalars(self) -> int:
        return sum(b.num_scalars for b in self.blocks)

    def psd_blocks(self) -> List[int]:
        return [k for k, b in enumerate(self.blocks) if b.kind is BlockKind.PSD]

    def describe(self) -> str:
        sizes = ",".join(
            f"{b.size}{'' if b.kind is BlockKind.PSD else b.kind.value[0]}" for b in self.blocks
        )
        sense = "max" if self.maximize else "min"
        return f"{self.name or 'sdp'}: {sense}, {self.num_constraints} rows, blocks [{sizes}]"

    def objective_value(self, blocks: List[np.ndarray]) -> float:
        """Objective at block values (matrices for PSD, vectors otherwise)."""
        return self.objective_offset + _apply(self.objective, self.blocks, blocks)

    def linear_value(self, coeffs: Mapping[Entry, float], blocks: List[np.ndarray]) -> float:
        """Value of an arbitrary linear form over the entries at block values."""
        return _apply(coeffs, self.blocks, blocks)

    def constraint_values(self, blocks: List[np.ndarray]) -> np.ndarray:
        return np.array([_apply(c.coeffs, self.blocks, blocks) for c in self.constraints])

    def standard_form(self) -> "StandardForm":
        return StandardForm.compile(self)


def _apply(coeffs: Mapping[Entry, float], kinds: List[Block], values: List[np.ndarray]) -> float:
    total = 0.0
    for (b, i, j), c in coeffs.items():
        if kinds[b].kind is BlockKind.PSD:
            total += c * values[b][i, j]
        else:
            total += c * values[b][i]
    return total


@dataclass
class Cone:
    kind: BlockKind
    size: int
    offset: int
    length: int
    block: Optional[int]  # None for the ≥-slack cone


@dataclass
class StandardForm:
    """min cᵀx s.t. A x = b, with x partitioned into cones.

    The objective is always minimized here; ``sign`` is -1 when the source
    problem maximizes.
    """

    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    cones: List[Cone]
    sign: float = 1.0
    offset: float = 0.0
    tags: List[str] = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return self.c.shape[0]

    def free_mask(self) -> np.ndarray:
        mask = np.zeros(self.num_vars, dtype=bool)
        for cone in self.cones:
            if cone.kind is BlockKind.FREE:
                mask[cone.offset : cone.offset + cone.length] = True
        return mask

    @classmethod
    def compile(cls, problem: SdpProblem) -> "StandardForm":
        cones: List[Cone] = []
        offset = 0
        for k, block in enumerate(problem.blocks):
            cones.append(Cone(block.kind, block.size, offset, block.num_scalars, k))
            offset += block.num_scalars
        num_ge = sum(1 for c in problem.constraints if c.sense == ">=")
        if num_ge:
            cones.append(Cone(BlockKind.NONNEG, num_ge, offset, num_ge, None))
            offset += num_ge

        def column(key: Entry) -> Tuple[int, float]:
            b, i, j = key
            cone = cones[b]
            if cone.kind is BlockKind.PSD:
                if i == j:
                    return cone.offset + svec_index(i, j), 1.0
                return cone.offset + svec_index(i, j), 1.0 / SQRT2
            return cone.offset + i, 1.0

        rows: List[int] = []
        cols: List[int] = []
        vals: List[float] = []
        b = np.zeros(problem.num_constraints)
        slack = cones[-1].offset if num_ge else 0
        for r, con in enumerate(problem.constraints):
            for key, value in con.coeffs.items():
                col, scale = column(key)
                rows.append(r)
                cols.append(col)
                vals.append(value * scale)
            if con.sense == ">=":
                rows.append(r)
                cols.append(slack)
                vals.append(-1.0)
                slack += 1
            b[r] = con.rhs

        sign = -1.0 if problem.maximize else 1.0
        c = np.zeros(offset)
        for key, value in problem.objective.items():
            col, scale = column(key)
            c[col] += sign * value * scale

        A = sp.csr_matrix((vals, (rows, cols)), shape=(problem.num_constraints, offset))
        A.sum_duplicates()
        return cls(
            c=c,
            A=A,
            b=b,
            cones=cones,
            sign=sign,
            offset=problem.objective_offset,
            tags=[con.tag for con in problem.constraints],
        )

    def unpack(self, x: np.ndarray) -> List[np.ndarray]:
        """Split a standard-form vector into per-block values (slack cone dropped)."""
        out = []
        for cone in self.cones:
            if cone.block is None:
                continue
            seg = x[cone.offset : cone.offset + cone.length]
            out.append(smat(seg, cone.size) if cone.kind is BlockKind.PSD else seg.copy())
        return out

    def pack(self, blocks: Iterable[np.ndarray]) -> np.ndarray:
        x = np.zeros(self.num_vars)
        for cone, value in zip([c for c in self.cones if c.block is not None], blocks):
            seg = svec(value) if cone.kind is BlockKind.PSD else np.asarray(value, dtype=float)
            x[cone.offset : cone.offset + cone.length] = seg
        return x
