"""Per-unit network model built from raw case data."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from ..casedata import CaseData
from ..errors import DegenerateBranchError, UnsupportedCaseFeatureError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Branch:
    """A Π-model branch between internal bus indices."""
    from_idx: int
    to_idx: int
    g: float  # series conductance, p.u.
    b: float  # series susceptance, p.u.
    charging: float  # total line charging b̄, p.u.
    smax: Optional[float]  # apparent-power limit, p.u.; None if unlimited
    label: str = ""


@dataclass(frozen=True)
class FlowEnd:
    """Apparent-power limit on the flow leaving ``sending`` along a branch."""
    branch: int  # index into PowerNetwork.branches
    sending: int
    receiving: int
    smax: float
    label: str  # "<sending bus>-<receiving bus>"


@dataclass
class PowerNetwork:
    """Network data in per-unit on ``base_mva``.

    The complex bus admittance matrix is held as two real sparse matrices
    ``y_re`` and ``y_im``. Per-bus arrays are indexed by internal bus index;
    generator cost arrays are aligned with ``gens``. Costs are rescaled so a
    per-unit generation ``p`` costs ``c2*p**2 + c1*p + c0`` dollars per hour.
    """

    name: str
    base_mva: float
    bus_ids: Tuple[int, ...]
    gens: Tuple[int, ...]
    c2: np.ndarray
    c1: np.ndarray
    c0: np.ndarray
    branches: Tuple[Branch, ...]
    flow_limited: Tuple[int, ...]
    y_re: sp.csr_matrix
    y_im: sp.csr_matrix
    pd: np.ndarray
    qd: np.ndarray
    pmin: np.ndarray
    pmax: np.ndarray
    qmin: np.ndarray
    qmax: np.ndarray
    vmin: np.ndarray
    vmax: np.ndarray

    @property
    def n(self) -> int:
        return len(self.bus_ids)

    def gen_position(self, bus: int) -> Optional[int]:
        """Position of the generator at internal bus ``bus`` in ``gens``."""
        try:
            return self.gens.index(bus)
        except ValueError:
            return None

    def bus_label(self, k: int) -> str:
        return str(self.bus_ids[k])

    @property
    def flow_ends(self) -> Tuple[FlowEnd, ...]:
        """Both ends of every flow-limited branch, the from-end first."""
        ends = []
        for idx in self.flow_limited:
            br = self.branches[idx]
            l, m = br.from_idx, br.to_idx
            ends.append(FlowEnd(idx, l, m, br.smax, br.label))
            ends.append(FlowEnd(idx, m, l, br.smax, f"{self.bus_label(m)}-{self.bus_label(l)}"))
        return tuple(ends)

    def total_demand(self) -> float:
        return float(self.pd.sum())


def build_network(case: CaseData) -> PowerNetwork:
    """Convert CaseData into a per-unit PowerNetwork.

    Out-of-service generators and branches are dropped. Transformer taps and
    phase shifts are ignored (every branch is stamped at nominal ratio).

    Raises:
        DegenerateBranchError: for a branch with r = x = 0
        UnsupportedCaseFeatureError: for more than one generator on a bus
    """
    base = case.base_mva
    n = case.num_buses
    index = case.bus_index

    pd = np.array([row.pd for row in case.bus_rows]) / base
    qd = np.array([row.qd for row in case.bus_rows]) / base
    vmin = np.array([row.vmin for row in case.bus_rows], dtype=float)
    vmax = np.array([row.vmax for row in case.bus_rows], dtype=float)
    pmin, pmax = np.zeros(n), np.zeros(n)
    qmin, qmax = np.zeros(n), np.zeros(n)

    gen_costs = {}
    for gen, cost in zip(case.gen_rows, case.gencost_rows):
        if gen.status <= 0:
            continue
        k = index[gen.bus_id]
        if k in gen_costs:
            raise UnsupportedCaseFeatureError(f"more than one generator at bus {gen.bus_id}")
        pmin[k], pmax[k] = gen.pmin / base, gen.pmax / base
        qmin[k], qmax[k] = gen.qmin / base, gen.qmax / base
        gen_costs[k] = (cost.c2 * base * base, cost.c1 * base, cost.c0)
    gens = tuple(sorted(gen_costs))

    rows: List[int] = []
    cols: List[int] = []
    re_vals: List[float] = []
    im_vals: List[float] = []

    def stamp(i, j, g, b):
        rows.append(i)
        cols.append(j)
        re_vals.append(g)
        im_vals.append(b)

    branches = []
    for row in case.branch_rows:
        if row.status <= 0:
            continue
        denom = row.r * row.r + row.x * row.x
        if denom == 0.0:
            raise DegenerateBranchError(row.from_bus, row.to_bus)
        l, m = index[row.from_bus], index[row.to_bus]
        g, b = row.r / denom, -row.x / denom
        half = row.b / 2.0
        stamp(l, l, g, b + half)
        stamp(m, m, g, b + half)
        stamp(l, m, -g, -b)
        stamp(m, l, -g, -b)
        smax = row.rate_a / base if row.rate_a > 0 else None
        branches.append(Branch(l, m, g, b, row.b, smax, f"{row.from_bus}-{row.to_bus}"))

    for k, bus in enumerate(case.bus_rows):
        stamp(k, k, bus.gs / base, bus.bs / base)

    y_re = sp.csr_matrix((re_vals, (rows, cols)), shape=(n, n))
    y_im = sp.csr_matrix((im_vals, (rows, cols)), shape=(n, n))
    flow_limited = tuple(i for i, br in enumerate(branches) if br.smax is not None)

    net = PowerNetwork(
        name=case.name,
        base_mva=base,
        bus_ids=tuple(row.bus_id for row in case.bus_rows),
        gens=gens,
        c2=np.array([gen_costs[k][0] for k in gens]),
        c1=np.array([gen_costs[k][1] for k in gens]),
        c0=np.array([gen_costs[k][2] for k in gens]),
        branches=tuple(branches),
        flow_limited=flow_limited,
        y_re=y_re,
        y_im=y_im,
        pd=pd,
        qd=qd,
        pmin=pmin,
        pmax=pmax,
        qmin=qmin,
        qmax=qmax,
        vmin=vmin,
        vmax=vmax,
    )
    logger.info(
        "network %s: %d buses, %d branches (%d flow-limited), %d generators",
        net.name, n, len(branches), len(flow_limited), len(gens),
    )
    return net
