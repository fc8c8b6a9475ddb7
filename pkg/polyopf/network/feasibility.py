"""Constraint residuals and cost of a voltage vector."""

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from ..errors import DimensionMismatchError
from .matrices import OpfMatrices, build_opf_matrices
from .model import PowerNetwork


@dataclass
class FeasibilityReport:
    """Signed violation of every ACOPF constraint at a point (positive = violated).

    Power bounds are in p.u., voltage bounds in p.u.² (|V|² against V²
    limits) and flow limits in p.u.² (P² + Q² against S²).
    """
    violations: Dict[str, float] = field(default_factory=dict)
    p_gen: Optional[np.ndarray] = None
    q_gen: Optional[np.ndarray] = None

    @property
    def max_violation(self) -> float:
        return max(self.violations.values()) if self.violations else 0.0

    @property
    def worst(self) -> str:
        if not self.violations:
            return ""
        return max(self.violations, key=self.violations.get)

    def violated(self, tol: float = 0.0) -> Dict[str, float]:
        return {k: v for k, v in self.violations.items() if v > tol}


def _check(net: PowerNetwork, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != 2 * net.n:
        raise DimensionMismatchError(2 * net.n, x.shape[0])
    return x


def bus_injections(net: PowerNetwork, x, mats: Optional[OpfMatrices] = None):
    """Generation (P^g_k, Q^g_k) every bus needs at voltage vector x."""
    x = _check(net, x)
    mats = mats or build_opf_matrices(net)
    p = np.array([x @ (mats.Yk[k] @ x) for k in range(net.n)]) + net.pd
    q = np.array([x @ (mats.Ybar_k[k] @ x) for k in range(net.n)]) + net.qd
    return p, q


def residuals(net: PowerNetwork, x, mats: Optional[OpfMatrices] = None) -> FeasibilityReport:
    """Evaluate every ACOPF constraint at ``x = (Re V, Im V)``."""
    x = _check(net, x)
    mats = mats or build_opf_matrices(net)
    p, q = bus_injections(net, x, mats)

    report = FeasibilityReport(p_gen=p, q_gen=q)
    v = report.violations
    for k in range(net.n):
        bus = net.bus_label(k)
        vsq = float(x @ (mats.Mk[k] @ x))
        v[f"P_max[{bus}]"] = p[k] - net.pmax[k]
        v[f"P_min[{bus}]"] = net.pmin[k] - p[k]
        v[f"Q_max[{bus}]"] = q[k] - net.qmax[k]
        v[f"Q_min[{bus}]"] = net.qmin[k] - q[k]
        v[f"V_max[{bus}]"] = vsq - net.vmax[k] ** 2
        v[f"V_min[{bus}]"] = net.vmin[k] ** 2 - vsq

    for e, end in enumerate(net.flow_ends):
        pf = float(x @ (mats.Ylm[e] @ x))
        qf = float(x @ (mats.Ybar_lm[e] @ x))
        v[f"S_max[{end.label}]"] = pf * pf + qf * qf - end.smax ** 2
    return report


def objective_value(net: PowerNetwork, x, mats: Optional[OpfMatrices] = None) -> float:
    """Generation cost in $/h at voltage vector x."""
    p, _ = bus_injections(net, x, mats)
    pg = p[list(net.gens)]
    return float(np.sum(net.c2 * pg * pg + net.c1 * pg + net.c0))
