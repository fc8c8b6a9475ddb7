"""MATPOWER case file (.m) parser and writer.

Reads the ``mpc.baseMVA``, ``mpc.bus``, ``mpc.gen``, ``mpc.branch`` and
``mpc.gencost`` blocks of a MATPOWER case script. Columns beyond the ones
kept in :class:`CaseData` are read (so they are validated as numbers) and
ignored. ``%`` comments and ``...`` continuations are supported; rows end at
``;`` or at a line break, as in MATLAB.

Every malformed input raises a :class:`~polyopf.errors.CaseError` subclass.
"""

from __future__ import annotations

import logging
import math
import re
from typing import Dict, List, Tuple, Union

from ..errors import (
    CaseError,
    CaseInvariantError,
    DegenerateBranchError,
    MissingBlockError,
    NonNumericTokenError,
    RowArityError,
    UnknownBusError,
    UnsupportedCaseFeatureError,
)
from .case import BranchRow, BusRow, CaseData, GenCostRow, GenRow

logger = logging.getLogger(__name__)

# Minimum column counts (MATPOWER version 2 layout)
BUS_COLUMNS = 13
GEN_COLUMNS = 10
BRANCH_COLUMNS = 11
GENCOST_MIN_COLUMNS = 4

_REQUIRED_BLOCKS = ("baseMVA", "bus", "gen", "branch", "gencost")

_BLOCK_START = re.compile(r"mpc\s*\.\s*(\w+)\s*=\s*")
_CASE_NAME = re.compile(r"function\s+mpc\s*=\s*(\w+)")
_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-]?[Ii]nf")
_TOKEN = re.compile(r"[^\s,;]+")

Block = List[List[Tuple[float, int]]]


def parse_case(text: Union[str, bytes], name: str = "") -> CaseData:
    """Parse MATPOWER case text.

    Args:
        text: Content of a ``.m`` case file
        name: Case name used when the text has no ``function mpc = ...`` line

    Returns:
        Parsed CaseData with original bus ids

    Raises:
        CaseError: on any malformed or unsupported input
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")

    clean = _strip_comments(text)
    blocks = _extract_blocks(clean)
    for required in _REQUIRED_BLOCKS:
        if required not in blocks:
            raise MissingBlockError(required)

    base_rows = blocks["baseMVA"]
    if len(base_rows) != 1 or len(base_rows[0]) != 1:
        raise CaseError("mpc.baseMVA must be a single number")
    base_mva = base_rows[0][0][0]
    if not base_mva > 0:
        raise CaseInvariantError(f"baseMVA must be positive, got {base_mva}")

    buses = tuple(_bus_row(row, i) for i, row in enumerate(_check_arity(blocks, "bus", BUS_COLUMNS)))
    gens = tuple(_gen_row(row) for row in _check_arity(blocks, "gen", GEN_COLUMNS))
    branches = tuple(_branch_row(row) for row in _check_arity(blocks, "branch", BRANCH_COLUMNS))
    costs = _gencost_rows(_check_arity(blocks, "gencost", GENCOST_MIN_COLUMNS), len(gens))

    match = _CASE_NAME.search(clean)
    case = CaseData(
        base_mva=base_mva,
        bus_rows=buses,
        gen_rows=gens,
        branch_rows=branches,
        gencost_rows=costs,
        name=match.group(1) if match else name,
    )
    validate_case(case)
    return case


def validate_case(case: CaseData) -> None:
    """Check the CaseData invariants, raising a CaseError on the first violation."""
    seen = set()
    for row in case.bus_rows:
        if row.bus_id in seen:
            raise CaseInvariantError(f"duplicate bus id {row.bus_id}")
        seen.add(row.bus_id)
        if row.vmin > row.vmax:
            raise CaseInvariantError(f"bus {row.bus_id}: Vmin {row.vmin} > Vmax {row.vmax}")
        if row.vmin < 0:
            raise CaseInvariantError(f"bus {row.bus_id}: negative Vmin {row.vmin}")

    for i, gen in enumerate(case.gen_rows):
        if gen.bus_id not in seen:
            raise UnknownBusError(f"gen row {i} -> bus {gen.bus_id}")
        if gen.pmin > gen.pmax:
            raise CaseInvariantError(f"gen at bus {gen.bus_id}: Pmin > Pmax")
        if gen.qmin > gen.qmax:
            raise CaseInvariantError(f"gen at bus {gen.bus_id}: Qmin > Qmax")

    for i, br in enumerate(case.branch_rows):
        for end in (br.from_bus, br.to_bus):
            if end not in seen:
                raise UnknownBusError(f"branch row {i} -> bus {end}")
        if br.from_bus == br.to_bus:
            raise CaseInvariantError(f"branch row {i} is a self loop at bus {br.from_bus}")
        if br.r == 0.0 and br.x == 0.0:
            raise DegenerateBranchError(br.from_bus, br.to_bus)

    for i, cost in enumerate(case.gencost_rows):
        if min(cost.c2, cost.c1, cost.c0) < 0:
            raise CaseInvariantError(f"gencost row {i} has a negative coefficient")


def format_case(case: CaseData) -> str:
    """Write a CaseData back as MATPOWER text.

    Floats are printed with ``repr`` so reparsing is bit-exact. Columns that
    CaseData does not keep are written as neutral placeholders.
    """
    name = case.name or "case"
    lines = [
        f"function mpc = {name}",
        "mpc.version = '2';",
        f"mpc.baseMVA = {_num(case.base_mva)};",
        "",
        "%% bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin",
        "mpc.bus = [",
    ]
    for b in case.bus_rows:
        cols = [b.bus_id, b.type, b.pd, b.qd, b.gs, b.bs, 1, 1.0, 0.0, 0.0, 1, b.vmax, b.vmin]
        lines.append("\t" + "\t".join(_num(c) for c in cols) + ";")
    lines += ["];", "", "%% bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin", "mpc.gen = ["]
    for g in case.gen_rows:
        cols = [g.bus_id, 0.0, 0.0, g.qmax, g.qmin, 1.0, case.base_mva, g.status, g.pmax, g.pmin]
        lines.append("\t" + "\t".join(_num(c) for c in cols) + ";")
    lines += ["];", "", "%% fbus tbus r x b rateA rateB rateC ratio angle status angmin angmax", "mpc.branch = ["]
    for br in case.branch_rows:
        cols = [br.from_bus, br.to_bus, br.r, br.x, br.b, br.rate_a, 0.0, 0.0, 0.0, 0.0, br.status, -360, 360]
        lines.append("\t" + "\t".join(_num(c) for c in cols) + ";")
    lines += ["];", "", "%% 2 startup shutdown n c2 c1 c0", "mpc.gencost = ["]
    for c in case.gencost_rows:
        cols = [2, 0.0, 0.0, 3, c.c2, c.c1, c.c0]
        lines.append("\t" + "\t".join(_num(v) for v in cols) + ";")
    lines += ["];", ""]
    return "\n".join(lines)


def _num(value) -> str:
    if isinstance(value, int):
        return str(value)
    if math.isinf(value):
        return "Inf" if value > 0 else "-Inf"
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def _strip_comments(text: str) -> str:
    """Blank out comments and continuations, keeping character offsets."""
    out = []
    for line in text.splitlines(keepends=True):
        body = line.rstrip("\r\n")
        ending = line[len(body):]
        cut = body.find("%")
        if cut >= 0:
            body = body[:cut] + " " * (len(body) - cut)
        cont = body.find("...")
        if cont >= 0:
            # the line break that follows a continuation does not end a row
            body = body[:cont] + " " * (len(body) - cont)
            ending = " " * len(ending)
        out.append(body + ending)
    return "".join(out)


def _extract_blocks(text: str) -> Dict[str, Block]:
    """Find every ``mpc.<name> = ...`` assignment and tokenize its value."""
    blocks: Dict[str, Block] = {}
    pos = 0
    while True:
        match = _BLOCK_START.search(text, pos)
        if match is None:
            break
        key = match.group(1)
        start = match.end()
        if start < len(text) and text[start] == "[":
            end = text.find("]", start + 1)
            if end < 0:
                raise CaseError(f"mpc.{key} block is not closed with ']'")
            body_start, body_end = start + 1, end
            pos = end + 1
        else:
            end = _scalar_end(text, start)
            body_start, body_end = start, end
            pos = end
        if text[body_start:body_end].lstrip().startswith(("'", "{")):
            continue
        blocks[key] = _tokenize(text, body_start, body_end)
    return blocks


def _scalar_end(text: str, start: int) -> int:
    for i in range(start, len(text)):
        if text[i] in ";\n":
            return i
    return len(text)


def _tokenize(text: str, start: int, end: int) -> Block:
    rows: Block = []
    row: List[Tuple[float, int]] = []
    segment = text[start:end]
    # split on row separators while tracking absolute offsets
    for piece in re.finditer(r"[^;\n]+|[;\n]", segment):
        chunk = piece.group(0)
        if chunk in (";", "\n"):
            if row:
                rows.append(row)
                row = []
            continue
        base = start + piece.start()
        for tok in _TOKEN.finditer(chunk):
            raw = tok.group(0)
            if not _NUMBER.fullmatch(raw):
                raise NonNumericTokenError(base + tok.start(), raw)
            row.append((float(raw), base + tok.start()))
    if row:
        rows.append(row)
    return rows


def _check_arity(blocks: Dict[str, Block], name: str, expected: int) -> List[List[float]]:
    rows = []
    for i, row in enumerate(blocks[name]):
        if len(row) < expected:
            raise RowArityError(name, i, expected, len(row))
        rows.append([value for value, _ in row])
    return rows


def _as_int(value: float, what: str) -> int:
    if not math.isfinite(value) or value != int(value):
        raise CaseError(f"{what} must be an integer, got {value}")
    return int(value)


def _bus_row(cols: List[float], index: int) -> BusRow:
    return BusRow(
        bus_id=_as_int(cols[0], f"bus row {index} id"),
        type=_as_int(cols[1], f"bus row {index} type"),
        pd=cols[2],
        qd=cols[3],
        gs=cols[4],
        bs=cols[5],
        vmax=cols[11],
        vmin=cols[12],
    )


def _gen_row(cols: List[float]) -> GenRow:
    return GenRow(
        bus_id=_as_int(cols[0], "gen bus"),
        qmax=cols[3],
        qmin=cols[4],
        status=_as_int(cols[7], "gen status"),
        pmax=cols[8],
        pmin=cols[9],
    )


def _branch_row(cols: List[float]) -> BranchRow:
    return BranchRow(
        from_bus=_as_int(cols[0], "branch from bus"),
        to_bus=_as_int(cols[1], "branch to bus"),
        r=cols[2],
        x=cols[3],
        b=cols[4],
        rate_a=cols[5],
        status=_as_int(cols[10], "branch status"),
    )


def _gencost_rows(rows: List[List[float]], num_gens: int) -> Tuple[GenCostRow, ...]:
    if len(rows) < num_gens:
        raise CaseError(f"mpc.gencost has {len(rows)} rows for {num_gens} generators")
    if len(rows) > num_gens:
        logger.debug("ignoring %d reactive-power cost rows", len(rows) - num_gens)

    costs = []
    for i, cols in enumerate(rows[:num_gens]):
        model = _as_int(cols[0], f"gencost row {i} model")
        if model != 2:
            raise UnsupportedCaseFeatureError(
                f"gencost row {i}: only polynomial cost (model 2) is supported"
            )
        ncoef = _as_int(cols[3], f"gencost row {i} n")
        if len(cols) < 4 + ncoef:
            raise RowArityError("gencost", i, 4 + ncoef, len(cols))
        coeffs = cols[4:4 + ncoef]
        if ncoef > 3 and any(c != 0.0 for c in coeffs[:ncoef - 3]):
            raise UnsupportedCaseFeatureError(f"gencost row {i}: degree above 2")
        padded = [0.0, 0.0, 0.0] + list(coeffs)
        c2, c1, c0 = padded[-3:]
        costs.append(GenCostRow(c2=c2, c1=c1, c0=c0))
    return tuple(costs)
