"""ACOPF as polynomial programs in rectangular voltage coordinates.

Both builders use ``x = (Re V_0..Re V_{n-1}, Im V_0..Im V_{n-1})`` as the
first 2n variables. ``build_op4`` keeps the voltage variables only, so the
quadratic cost and the apparent-power limits are quartic. ``build_op2``
lifts those quartic terms with auxiliary variables and stays quadratic.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..network import OpfMatrices, PowerNetwork, build_opf_matrices
from .polynomial import Monomial, Polynomial
from .program import PolyProgram

logger = logging.getLogger(__name__)


def _voltage_names(net: PowerNetwork) -> List[str]:
    return [f"ReV[{b}]" for b in net.bus_ids] + [f"ImV[{b}]" for b in net.bus_ids]


def _add_bounded(pp: PolyProgram, expr: Polynomial, lo: float, hi: float, label: str) -> None:
    """lo ≤ expr ≤ hi as two inequalities, or one equality when lo == hi."""
    if lo == hi:
        pp.add_equality(expr - lo, f"{label}_fix")
        return
    if np.isfinite(hi):
        pp.add_inequality(hi - expr, f"{label}_max")
    if np.isfinite(lo):
        pp.add_inequality(expr - lo, f"{label}_min")


def _ball(net: PowerNetwork, nvars: int) -> Polynomial:
    """Σ_k Vmax_k² − Σ_k |V_k|², redundant but keeps the feasible set bounded."""
    terms = {Monomial.var(i, 2): -1.0 for i in range(2 * net.n)}
    terms[Monomial.one()] = float(np.sum(net.vmax ** 2))
    return Polynomial(nvars, terms)


def _bus_constraints(pp: PolyProgram, net: PowerNetwork, mats: OpfMatrices) -> List[Polynomial]:
    """Power and voltage limits per bus; returns the P^g_k expressions."""
    nv = pp.nvars
    p_exprs = []
    for k in range(net.n):
        bus = net.bus_label(k)
        p_k = Polynomial.quadratic_form(nv, mats.Yk[k]) + float(net.pd[k])
        q_k = Polynomial.quadratic_form(nv, mats.Ybar_k[k]) + float(net.qd[k])
        v_k = Polynomial.quadratic_form(nv, mats.Mk[k])
        _add_bounded(pp, p_k, float(net.pmin[k]), float(net.pmax[k]), f"P[{bus}]")
        _add_bounded(pp, q_k, float(net.qmin[k]), float(net.qmax[k]), f"Q[{bus}]")
        _add_bounded(pp, v_k, float(net.vmin[k]) ** 2, float(net.vmax[k]) ** 2, f"V[{bus}]")
        p_exprs.append(p_k)
    return p_exprs


def _voltage_bounds(net: PowerNetwork) -> List[Tuple[float, float]]:
    vmax = [float(v) for v in net.vmax]
    return [(-v, v) for v in vmax + vmax]


def build_op4(net: PowerNetwork, mats: Optional[OpfMatrices] = None) -> PolyProgram:
    """Quartic program over the 2n voltage variables only."""
    mats = mats or build_opf_matrices(net)
    nv = 2 * net.n
    pp = PolyProgram(
        nvars=nv,
        objective=Polynomial.constant(nv, 0.0),
        var_names=_voltage_names(net),
        var_bounds=_voltage_bounds(net),
        name=f"{net.name}/op4",
        nominal_degree=4,
    )
    p_exprs = _bus_constraints(pp, net, mats)

    for e, end in enumerate(net.flow_ends):
        p_lm = Polynomial.quadratic_form(nv, mats.Ylm[e])
        q_lm = Polynomial.quadratic_form(nv, mats.Ybar_lm[e])
        pp.add_inequality(end.smax ** 2 - p_lm * p_lm - q_lm * q_lm, f"S[{end.label}]_max")

    pp.add_inequality(_ball(net, nv), "ball")

    objective = Polynomial.constant(nv, 0.0)
    for pos, k in enumerate(net.gens):
        pg = p_exprs[k]
        objective = objective + float(net.c2[pos]) * (pg * pg) + float(net.c1[pos]) * pg + float(net.c0[pos])
    pp.objective = objective
    logger.debug("op4 %s: %d ineq, %d eq", net.name, len(pp.inequalities), len(pp.equalities))
    return pp


def build_op2(net: PowerNetwork, mats: Optional[OpfMatrices] = None) -> PolyProgram:
    """Quadratic program: voltages, P^g for quadratic-cost generators, and the flows at both ends of each limited branch."""
    mats = mats or build_opf_matrices(net)
    quad_gens = [(pos, k) for pos, k in enumerate(net.gens) if net.c2[pos] != 0.0]
    ends = net.flow_ends

    names = _voltage_names(net)
    bounds = _voltage_bounds(net)
    pg_index = {}
    for pos, k in quad_gens:
        pg_index[k] = len(names)
        names.append(f"Pg[{net.bus_label(k)}]")
        bounds.append((float(net.pmin[k]), float(net.pmax[k])))
    flow_index = {}
    for e, end in enumerate(ends):
        flow_index[e] = len(names)
        names += [f"P[{end.label}]", f"Q[{end.label}]"]
        bounds += [(-end.smax, end.smax), (-end.smax, end.smax)]

    nv = len(names)
    pp = PolyProgram(
        nvars=nv,
        objective=Polynomial.constant(nv, 0.0),
        var_names=names,
        var_bounds=bounds,
        name=f"{net.name}/op2",
    )
    p_exprs = _bus_constraints(pp, net, mats)

    for pos, k in quad_gens:
        aux = Polynomial.variable(nv, pg_index[k])
        pp.add_equality(aux - p_exprs[k], f"Pg[{net.bus_label(k)}]_def")

    for e, end in enumerate(ends):
        p_var = Polynomial.variable(nv, flow_index[e])
        q_var = Polynomial.variable(nv, flow_index[e] + 1)
        pp.add_equality(p_var - Polynomial.quadratic_form(nv, mats.Ylm[e]), f"P[{end.label}]_def")
        pp.add_equality(q_var - Polynomial.quadratic_form(nv, mats.Ybar_lm[e]), f"Q[{end.label}]_def")
        pp.add_inequality(end.smax ** 2 - p_var * p_var - q_var * q_var, f"S[{end.label}]_max")

    pp.add_inequality(_ball(net, nv), "ball")

    objective = Polynomial.constant(nv, 0.0)
    for pos, k in enumerate(net.gens):
        if k in pg_index:
            aux = Polynomial.variable(nv, pg_index[k])
            objective = objective + float(net.c2[pos]) * (aux * aux)
        objective = objective + float(net.c1[pos]) * p_exprs[k] + float(net.c0[pos])
    pp.objective = objective
    logger.debug("op2 %s: %d vars, %d ineq, %d eq", net.name, nv, len(pp.inequalities), len(pp.equalities))
    return pp


def lift_point(pp: PolyProgram, net: PowerNetwork, x, mats: Optional[OpfMatrices] = None) -> np.ndarray:
    """Extend a voltage vector to the variable space of ``pp`` by evaluating its lifting equalities."""
    return lift_values(pp.var_names, net, x, mats)


def lift_values(
    var_names: Sequence[str], net: PowerNetwork, x, mats: Optional[OpfMatrices] = None
) -> np.ndarray:
    """Values of named variables (voltages first, then Pg[..], P[..], Q[..]) at a voltage vector."""
    mats = mats or build_opf_matrices(net)
    x = np.asarray(x, dtype=float)
    full = np.zeros(len(var_names))
    full[: 2 * net.n] = x
    for i, name in enumerate(var_names[2 * net.n:], start=2 * net.n):
        label = name[name.index("[") + 1 : -1]
        if name.startswith("Pg["):
            k = net.bus_ids.index(int(label))
            full[i] = float(x @ (mats.Yk[k] @ x)) + net.pd[k]
        else:
            e = next(j for j, end in enumerate(net.flow_ends) if end.label == label)
            mat = mats.Ylm[e] if name.startswith("P[") else mats.Ybar_lm[e]
            full[i] = float(x @ (mat @ x))
    return full
