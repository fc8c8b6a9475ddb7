"""SDPA sparse format (``.dat-s``) reader and writer.

The file describes ``max tr(F0 Y) s.t. tr(Fi Y) = ci, Y ⪰ 0`` where Y is
block diagonal; negative block sizes denote diagonal (LP) blocks. Our
constraint rows become the Fi, a minimized objective is written negated
as F0. Free scalars are split into differences of two diagonal entries
and ``≥`` rows get a diagonal slack, so a written file always reads back
as an equivalent problem, not an identical one.
"""

import re
from typing import Dict, List, Tuple

from ..errors import SdpaFormatError
from .problem import BlockKind, SdpProblem

_OFFSET = re.compile(r"^\*\s*objective offset\s+(\S+)")


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_sdpa(problem: SdpProblem) -> str:
    """Serialize ``problem`` with 17 significant digits."""
    layout: List[int] = []  # 1-based file block of every problem block
    struct: List[int] = []
    for block in problem.blocks:
        if block.kind is BlockKind.PSD:
            struct.append(block.size)
        elif block.kind is BlockKind.NONNEG:
            struct.append(-block.size)
        else:
            struct.append(-2 * block.size)
        layout.append(len(struct))
    num_ge = sum(1 for c in problem.constraints if c.sense == ">=")
    if num_ge:
        struct.append(-num_ge)
    slack_block = len(struct)

    def entries(coeffs: Dict[Tuple[int, int, int], float]):
        for (b, i, j), value in sorted(coeffs.items()):
            blk = problem.blocks[b]
            fb = layout[b]
            if blk.kind is BlockKind.PSD:
                yield fb, i, j, value if i == j else value / 2.0
            elif blk.kind is BlockKind.NONNEG:
                yield fb, i, i, value
            else:
                yield fb, 2 * i, 2 * i, value
                yield fb, 2 * i + 1, 2 * i + 1, -value

    sign = 1.0 if problem.maximize else -1.0
    lines = [f'"{problem.describe()}']
    lines.append(f"* objective offset {_fmt(problem.objective_offset)}")
    lines.append(f"* sense {'max' if problem.maximize else 'min'}")
    lines.append(str(problem.num_constraints))
    lines.append(str(len(struct)))
    lines.append(" ".join(str(s) for s in struct))
    lines.append(" ".join(_fmt(c.rhs) for c in problem.constraints) or "")

    for fb, i, j, value in entries(problem.objective):
        lines.append(f"0 {fb} {i + 1} {j + 1} {_fmt(sign * value)}")
    slack = 0
    for row, con in enumerate(problem.constraints, start=1):
        for fb, i, j, value in entries(con.coeffs):
            lines.append(f"{row} {fb} {i + 1} {j + 1} {_fmt(value)}")
        if con.sense == ">=":
            lines.append(f"{row} {slack_block} {slack + 1} {slack + 1} {_fmt(-1.0)}")
            slack += 1
    return "\n".join(lines) + "\n"


def read_sdpa(text: str) -> SdpProblem:
    """Parse SDPA sparse text into a maximization SdpProblem.

    Raises:
        SdpaFormatError: on truncated headers, bad block structure or
            entries outside their block
    """
    offset = 0.0
    sense = "max"
    body: List[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line[0] in '"*':
            match = _OFFSET.match(line)
            if match:
                offset = float(match.group(1))
            elif line.startswith("* sense"):
                sense = line.split()[-1]
            continue
        body.append(line.replace(",", " ").replace("{", " ").replace("}", " ").replace("(", " ").replace(")", " "))

    header_lines = 2
    try:
        m = int(body[0].split()[0])
        nblocks = int(body[1].split()[0])
        struct_tokens: List[str] = []
        while len(struct_tokens) < nblocks:
            struct_tokens += body[header_lines].split()
            header_lines += 1
        struct = [int(t) for t in struct_tokens[:nblocks]]
        rhs_tokens = struct_tokens[nblocks:]
        while len(rhs_tokens) < m:
            rhs_tokens += body[header_lines].split()
            header_lines += 1
        rhs = [float(t) for t in rhs_tokens[:m]]
    except (IndexError, ValueError) as exc:
        raise SdpaFormatError(f"malformed SDPA header: {exc}") from exc

    if any(s == 0 for s in struct):
        raise SdpaFormatError("block size 0 in block structure")

    problem = SdpProblem(name="sdpa", maximize=(sense != "min"))
    for s in struct:
        problem.add_block(abs(s), BlockKind.PSD if s > 0 else BlockKind.NONNEG)

    rows: List[Dict[Tuple[int, int, int], float]] = [dict() for _ in range(m)]
    objective: Dict[Tuple[int, int, int], float] = {}
    for lineno, line in enumerate(body[header_lines:], start=header_lines + 1):
        parts = line.split()
        if len(parts) != 5:
            raise SdpaFormatError(f"entry line {lineno} has {len(parts)} fields")
        try:
            mat, blk, i, j = (int(p) for p in parts[:4])
            value = float(parts[4])
        except ValueError as exc:
            raise SdpaFormatError(f"entry line {lineno}: {exc}") from exc
        if not (0 <= mat <= m) or not (1 <= blk <= nblocks):
            raise SdpaFormatError(f"entry line {lineno} references matrix {mat}, block {blk}")
        size = abs(struct[blk - 1])
        if not (1 <= i <= size and 1 <= j <= size):
            raise SdpaFormatError(f"entry line {lineno} outside block {blk} of size {size}")
        if struct[blk - 1] < 0 and i != j:
            raise SdpaFormatError(f"entry line {lineno} off the diagonal of LP block {blk}")
        i, j = min(i, j) - 1, max(i, j) - 1
        coef = value if i == j else 2.0 * value
        target = objective if mat == 0 else rows[mat - 1]
        key = (blk - 1, i, j)
        target[key] = target.get(key, 0.0) + coef

    flip = 1.0 if problem.maximize else -1.0
    for key, value in objective.items():
        problem.add_objective(*key, flip * value)
    problem.objective_offset = offset
    for coeffs, b in zip(rows, rhs):
        problem.add_constraint(coeffs, b)
    return problem
