"""Bundled test-case corpus and parameter-sweep overrides."""

from __future__ import annotations

import dataclasses
import logging
import os
import re
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Union

from ..config import CASES_ENV_VAR
from ..errors import OverrideError, UnknownCaseError
from .case import CaseData
from .parser import parse_case, validate_case

logger = logging.getLogger(__name__)

# Default corpus location (package data)
DEFAULT_CORPUS_DIR = Path(__file__).parent / "cases"

_BUS_LIMIT = re.compile(r"^([VPQ])(\d+)(max|min)$")
_BUS_DEMAND = re.compile(r"^(Pd|Qd)(\d+)$")
_FLOW_LIMIT = re.compile(r"^S(\d+)[-_,](\d+)max$")
_FLOW_LIMIT_SHORT = re.compile(r"^S(\d)(\d)max$")


def corpus_dir() -> Path:
    """Directory holding the case files (``POLYOPF_CASES`` wins over the package data)."""
    override = os.environ.get(CASES_ENV_VAR)
    return Path(override) if override else DEFAULT_CORPUS_DIR


def list_corpus(directory: Optional[Path] = None) -> List[str]:
    """Names of all cases in the corpus directory."""
    directory = directory or corpus_dir()
    if not directory.is_dir():
        return []
    return sorted(p.stem for p in directory.glob("*.m"))


def read_case_file(path: Path) -> CaseData:
    """Parse a case file from disk."""
    with open(path, encoding="utf-8", errors="replace") as f:
        return parse_case(f.read(), name=path.stem)


def corpus_case(name: str, overrides: Optional[Mapping[str, float]] = None,
                directory: Optional[Path] = None, **more: float) -> CaseData:
    """Load a bundled case, optionally with swept fields overridden.

    Args:
        name: Case name, e.g. ``WB2`` (matched case-insensitively)
        overrides: Mapping such as ``{"V2max": 0.976}``
        directory: Corpus directory (defaults to :func:`corpus_dir`)
        **more: Overrides given as keywords, ``corpus_case("WB2", V2max=0.976)``

    Returns:
        CaseData with the overrides applied

    Raises:
        UnknownCaseError: if no file with that name exists
    """
    directory = directory or corpus_dir()
    path = directory / f"{name}.m"
    if not path.exists():
        for candidate in directory.glob("*.m"):
            if candidate.stem.lower() == name.lower():
                path = candidate
                break
        else:
            raise UnknownCaseError(name)

    case = read_case_file(path)
    merged: Dict[str, float] = dict(overrides or {})
    merged.update(more)
    return apply_overrides(case, merged) if merged else case


def load_case(name_or_path: Union[str, Path],
              overrides: Optional[Mapping[str, float]] = None) -> CaseData:
    """Load a case by corpus name or by file path."""
    path = Path(name_or_path)
    if path.suffix == ".m" and path.exists():
        case = read_case_file(path)
        return apply_overrides(case, overrides) if overrides else case
    return corpus_case(str(name_or_path), overrides)


def apply_overrides(case: CaseData, overrides: Mapping[str, float]) -> CaseData:
    """Return a copy of ``case`` with the named fields replaced.

    Keys: ``V<bus>max|min`` (p.u.), ``P<bus>max|min`` (MW), ``Q<bus>max|min``
    (MVAr) for the generator at that bus, ``Pd<bus>`` / ``Qd<bus>`` (demand),
    and ``S<from>-<to>max`` (MVA) for the branch between two buses. Bus ids
    are the ids written in the case file.
    """
    buses = list(case.bus_rows)
    gens = list(case.gen_rows)
    branches = list(case.branch_rows)

    for key, raw in overrides.items():
        value = float(raw)
        m = _BUS_LIMIT.match(key)
        if m:
            quantity, bus_id, side = m.group(1), int(m.group(2)), m.group(3)
            if quantity == "V":
                i = _bus_position(case, key, bus_id)
                buses[i] = dataclasses.replace(buses[i], **{f"v{side}": value})
            else:
                j = _gen_position(gens, key, bus_id)
                gens[j] = dataclasses.replace(gens[j], **{f"{quantity.lower()}{side}": value})
            continue

        m = _BUS_DEMAND.match(key)
        if m:
            i = _bus_position(case, key, int(m.group(2)))
            buses[i] = dataclasses.replace(buses[i], **{m.group(1).lower(): value})
            continue

        m = _FLOW_LIMIT.match(key) or _FLOW_LIMIT_SHORT.match(key)
        if m:
            ends = {int(m.group(1)), int(m.group(2))}
            hits = [k for k, br in enumerate(branches) if {br.from_bus, br.to_bus} == ends]
            if not hits:
                raise OverrideError(key, f"no branch between buses {sorted(ends)}")
            for k in hits:
                branches[k] = dataclasses.replace(branches[k], rate_a=value)
            continue

        raise OverrideError(key, "unrecognised override key")

    updated = dataclasses.replace(
        case,
        bus_rows=tuple(buses),
        gen_rows=tuple(gens),
        branch_rows=tuple(branches),
        bus_index=None,
    )
    validate_case(updated)
    logger.debug("applied overrides %s to %s", dict(overrides), case.name)
    return updated


def _bus_position(case: CaseData, key: str, bus_id: int) -> int:
    if bus_id not in case.bus_index:
        raise OverrideError(key, f"no bus {bus_id}")
    return case.bus_index[bus_id]


def _gen_position(gens, key: str, bus_id: int) -> int:
    for j, gen in enumerate(gens):
        if gen.bus_id == bus_id and gen.status > 0:
            return j
    raise OverrideError(key, f"no generator at bus {bus_id}")
