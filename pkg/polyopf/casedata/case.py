"""Raw case data as read from a MATPOWER case file (MW / MVAr / p.u.)."""

from dataclasses import dataclass, field
from typing import Dict, Tuple


@dataclass(frozen=True)
class BusRow:
    bus_id: int
    type: int
    pd: float  # MW
    qd: float  # MVAr
    gs: float  # MW at V = 1 p.u.
    bs: float  # MVAr at V = 1 p.u.
    vmax: float  # p.u.
    vmin: float  # p.u.


@dataclass(frozen=True)
class GenRow:
    bus_id: int
    pmax: float  # MW
    pmin: float  # MW
    qmax: float  # MVAr
    qmin: float  # MVAr
    status: int = 1


@dataclass(frozen=True)
class BranchRow:
    from_bus: int
    to_bus: int
    r: float  # p.u.
    x: float  # p.u.
    b: float  # total line charging, p.u.
    rate_a: float  # MVA, 0 means unlimited
    status: int = 1


@dataclass(frozen=True)
class GenCostRow:
    c2: float  # $/MW^2h
    c1: float  # $/MWh
    c0: float  # $/h


@dataclass(frozen=True)
class CaseData:
    """A parsed network case.

    Bus ids are kept as written in the file; ``bus_index`` maps them to the
    dense 0-based index every downstream module uses.
    """

    base_mva: float
    bus_rows: Tuple[BusRow, ...]
    gen_rows: Tuple[GenRow, ...]
    branch_rows: Tuple[BranchRow, ...]
    gencost_rows: Tuple[GenCostRow, ...]
    name: str = ""
    bus_index: Dict[int, int] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.bus_index is None:
            index = {row.bus_id: i for i, row in enumerate(self.bus_rows)}
            object.__setattr__(self, "bus_index", index)

    @property
    def num_buses(self) -> int:
        return len(self.bus_rows)

    def summary(self) -> Dict[str, object]:
        """Short description used by the CLI and web listings."""
        return {
            "name": self.name,
            "base_mva": self.base_mva,
            "buses": len(self.bus_rows),
            "generators": sum(1 for g in self.gen_rows if g.status > 0),
            "branches": sum(1 for br in self.branch_rows if br.status > 0),
            "flow_limited": sum(
                1 for br in self.branch_rows if br.status > 0 and br.rate_a > 0
            ),
            "total_load_mw": sum(b.pd for b in self.bus_rows),
        }
