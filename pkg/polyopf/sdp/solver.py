"""Primal-dual interior-point method for block-diagonal SDPs.

Infeasible-start path following on the HKM direction with a Mehrotra
predictor-corrector. Works on the standard form produced by
``SdpProblem.standard_form``: PSD cones in svec coordinates, nonnegative
orthants elementwise, free variables eliminated through the Schur
complement.
"""

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .. import config
from .problem import BlockKind, SdpProblem, StandardForm, smat, svec, svec_pairs

logger = logging.getLogger(__name__)


class SolverStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITER = "MaxIter"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class SolverOptions:
    feas_tol: float = config.FEAS_TOL
    gap_tol: float = config.GAP_TOL
    max_iterations: int = config.MAX_ITERATIONS
    step_fraction: float = config.STEP_FRACTION


@dataclass
class SdpSolution:
    """Primal blocks X, dual vector y and dual slack blocks S.

    Objectives are reported in the sense of the source problem. ``bound``
    is the side that is valid as a bound on the relaxed polynomial
    program: the dual objective when minimizing, the primal objective when
    maximizing.
    """

    status: SolverStatus
    X: List[np.ndarray]
    S: List[np.ndarray]
    y: np.ndarray
    primal_objective: float
    dual_objective: float
    iterations: int
    maximize: bool = False
    residuals: Dict[str, float] = field(default_factory=dict)
    message: str = ""
    condition: float = float("nan")
    solve_time: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status is SolverStatus.OPTIMAL

    @property
    def bound(self) -> float:
        return self.primal_objective if self.maximize else self.dual_objective


class _NumericalTrouble(Exception):
    pass


@dataclass
class _ConeSpec:
    kind: BlockKind
    size: int
    start: int  # offset inside the conic (non-free) vector
    length: int
    support: Optional[np.ndarray] = None  # PSD: svec positions touched by A
    pairs: Optional[Tuple[np.ndarray, np.ndarray]] = None
    alpha: Optional[np.ndarray] = None
    A_sub: Optional[sp.csr_matrix] = None

    def slice(self) -> slice:
        return slice(self.start, self.start + self.length)


def _drop_dependent_rows(A: sp.csr_matrix, tol: float) -> np.ndarray:
    """Indices of a maximal independent row subset (pivoted QR of A Aᵀ)."""
    m = A.shape[0]
    if m == 0:
        return np.arange(0)
    gram = (A @ A.T).toarray()
    _, r, piv = la.qr(gram, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return np.arange(0)
    rank = int(np.sum(diag > tol * diag[0]))
    return np.sort(piv[:rank])


class InteriorPointSolver:
    """Solve one SdpProblem. Instances are single use and not thread-safe."""

    def __init__(self, problem: SdpProblem, options: Optional[SolverOptions] = None):
        self.problem = problem
        self.options = options or SolverOptions()
        self.form: StandardForm = problem.standard_form()

    # setup

    def _prepare(self):
        form = self.form
        A = form.A.tocsr()
        free = form.free_mask()

        keep = _drop_dependent_rows(A, config.DEPENDENT_ROW_TOL)
        self.kept_rows = keep
        dropped = A.shape[0] - keep.size
        if dropped:
            logger.warning("%s: dropped %d linearly dependent constraint rows", self.problem.name or "sdp", dropped)
        A = A[keep]
        b = form.b[keep]

        norms = np.sqrt(np.asarray(A.multiply(A).sum(axis=1)).ravel())
        norms[norms == 0.0] = 1.0
        self.row_scale = 1.0 / norms
        A = sp.diags(self.row_scale) @ A
        b = b * self.row_scale
        self.b_orig_norm = float(np.linalg.norm(form.b))
        self.c_orig_norm = float(np.linalg.norm(form.c))
        self.bscale = max(1.0, float(np.linalg.norm(b)))
        self.cscale = max(1.0, float(np.linalg.norm(form.c)))

        self.free = free
        A = A.tocsc()
        self.A = A[:, np.flatnonzero(~free)].tocsr()
        self.Af = A[:, np.flatnonzero(free)].toarray()
        self.b = b / self.bscale
        self.c = form.c[~free] / self.cscale
        self.cf = form.c[free] / self.cscale

        specs: List[_ConeSpec] = []
        start = 0
        Acsc = self.A.tocsc()
        for cone in form.cones:
            if cone.kind is BlockKind.FREE:
                continue
            spec = _ConeSpec(cone.kind, cone.size, start, cone.length)
            block = Acsc[:, start : start + cone.length]
            touched = np.flatnonzero(np.diff(block.indptr))
            spec.support = touched
            spec.A_sub = block[:, touched].tocsr()
            if cone.kind is BlockKind.PSD:
                p, q = svec_pairs(cone.size)
                spec.pairs = (p[touched], q[touched])
                spec.alpha = np.where(p[touched] == q[touched], 0.5, 1.0 / np.sqrt(2.0))
            specs.append(spec)
            start += cone.length
        self.specs = specs
        self.nu = sum(s.size for s in specs)

    def _initial_point(self):
        m = self.A.shape[0]
        x = np.zeros(self.A.shape[1])
        s = np.zeros_like(x)
        Acsc = self.A.tocsc()
        for spec in self.specs:
            n = spec.size
            block = Acsc[:, spec.slice()]
            row_norms = np.sqrt(np.asarray(block.multiply(block).sum(axis=1)).ravel()) if m else np.zeros(0)
            c_norm = float(np.linalg.norm(self.c[spec.slice()]))
            ratio = np.max((1.0 + np.abs(self.b)) / (1.0 + row_norms)) if m else 1.0
            xi = max(10.0, np.sqrt(n), np.sqrt(n) * ratio)
            eta = max(10.0, np.sqrt(n), float(np.max(row_norms, initial=0.0)), c_norm)
            ident = svec(np.eye(n)) if spec.kind is BlockKind.PSD else np.ones(n)
            x[spec.slice()] = xi * ident
            s[spec.slice()] = eta * ident
        return x, np.zeros(self.Af.shape[1]), np.zeros(m), s

    # cone algebra

    def _mats(self, vec: np.ndarray, spec: _ConeSpec) -> np.ndarray:
        return smat(vec[spec.slice()], spec.size)

    @staticmethod
    def _sym(mat: np.ndarray) -> np.ndarray:
        return 0.5 * (mat + mat.T)

    def _max_step(self, v: np.ndarray, dv: np.ndarray) -> float:
        step = np.inf
        for spec in self.specs:
            if spec.kind is BlockKind.PSD:
                mat = self._mats(v, spec)
                dmat = self._mats(dv, spec)
                try:
                    low = la.cholesky(mat, lower=True)
                except la.LinAlgError:
                    return 0.0
                tmp = la.solve_triangular(low, dmat, lower=True)
                tmp = la.solve_triangular(low, tmp.T, lower=True)
                lam = la.eigvalsh(self._sym(tmp))[0]
                if lam < 0:
                    step = min(step, -1.0 / lam)
            else:
                seg, dseg = v[spec.slice()], dv[spec.slice()]
                neg = dseg < 0
                if np.any(neg):
                    step = min(step, float(np.min(-seg[neg] / dseg[neg])))
        return step

    # Newton system

    def _factor(self, x: np.ndarray, s: np.ndarray):
        m = self.A.shape[0]
        M = np.zeros((m, m))
        cache = []
        for spec in self.specs:
            if spec.kind is BlockKind.PSD:
                X = self._mats(x, spec)
                S = self._mats(s, spec)
                try:
                    s_chol = la.cho_factor(S, lower=True)
                except la.LinAlgError as exc:
                    raise _NumericalTrouble("dual slack lost definiteness") from exc
                Si = self._sym(la.cho_solve(s_chol, np.eye(spec.size)))
                cache.append((X, Si))
                if spec.support.size:
                    P, Q = spec.pairs
                    G = (
                        X[np.ix_(Q, P)] * Si[np.ix_(P, Q)]
                        + X[np.ix_(Q, Q)] * Si[np.ix_(P, P)]
                        + X[np.ix_(P, P)] * Si[np.ix_(Q, Q)]
                        + X[np.ix_(P, Q)] * Si[np.ix_(Q, P)]
                    )
                    G *= np.outer(spec.alpha, spec.alpha)
                    AG = spec.A_sub @ G
                    M += spec.A_sub @ AG.T
            else:
                ratio = x[spec.slice()] / s[spec.slice()]
                cache.append(ratio)
                if spec.support.size:
                    sub = spec.A_sub
                    M += (sub @ sp.diags(ratio[spec.support]) @ sub.T).toarray()

        M = self._sym(M)
        try:
            chol = la.cho_factor(M, lower=True)
        except la.LinAlgError:
            shift = 1e-13 * max(1.0, float(np.max(np.diag(M)))) if m else 0.0
            try:
                chol = la.cho_factor(M + shift * np.eye(m), lower=True)
            except la.LinAlgError as exc:
                raise _NumericalTrouble("Schur complement is not positive definite") from exc
        diag = np.abs(np.diag(chol[0]))
        self.condition = float((diag.max() / max(diag.min(), 1e-300)) ** 2) if diag.size else 1.0

        schur_free = None
        if self.Af.shape[1]:
            MiAf = la.cho_solve(chol, self.Af)
            schur_free = (self.Af.T @ MiAf, MiAf)
        return chol, cache, schur_free

    def _direction(self, factors, x, s, rp, rd, rf, targets):
        """Solve the Newton system for given complementarity targets.

        ``targets`` holds, per cone, the right-hand side R with the meaning
        dX = R − sym(X dS S⁻¹) (elementwise for orthants).
        """
        chol, cache, schur_free = factors
        tmp = np.zeros_like(x)
        for spec, target, data in zip(self.specs, targets, cache):
            if spec.kind is BlockKind.PSD:
                X, Si = data
                Rd = self._mats(rd, spec)
                tmp[spec.slice()] = svec(target - self._sym(X @ Rd @ Si))
            else:
                tmp[spec.slice()] = target - data * rd[spec.slice()]
        h = rp - self.A @ tmp

        if schur_free is not None:
            sf_mat, MiAf = schur_free
            rhs = MiAf.T @ h - rf
            try:
                dxf = la.solve(sf_mat, rhs, assume_a="sym")
            except la.LinAlgError:
                dxf = np.linalg.lstsq(sf_mat, rhs, rcond=None)[0]
            dy = la.cho_solve(chol, h - self.Af @ dxf)
        else:
            dxf = np.zeros(0)
            dy = la.cho_solve(chol, h)

        ds = rd - self.A.T @ dy
        dx = np.zeros_like(x)
        for spec, target, data in zip(self.specs, targets, cache):
            if spec.kind is BlockKind.PSD:
                X, Si = data
                dS = self._mats(ds, spec)
                dx[spec.slice()] = svec(target - self._sym(X @ dS @ Si))
            else:
                dx[spec.slice()] = target - data * ds[spec.slice()]
        return dx, dxf, dy, ds

    def _targets(self, x, s, cache, sigma_mu, correction=None):
        targets = []
        for idx, (spec, data) in enumerate(zip(self.specs, cache)):
            if spec.kind is BlockKind.PSD:
                X, Si = data
                target = sigma_mu * Si - X
                if correction is not None:
                    dX = self._mats(correction[0], spec)
                    dS = self._mats(correction[1], spec)
                    target = target - self._sym(dX @ dS @ Si)
            else:
                xs, ss = x[spec.slice()], s[spec.slice()]
                target = sigma_mu / ss - xs
                if correction is not None:
                    target = target - correction[0][spec.slice()] * correction[1][spec.slice()] / ss
            targets.append(target)
        return targets

    # main loop

    def _unscale(self, x, xf, y, s):
        n = self.form.num_vars
        x_full = np.zeros(n)
        x_full[~self.free] = x * self.bscale
        x_full[self.free] = xf * self.bscale
        s_full = np.zeros(n)
        s_full[~self.free] = s * self.cscale
        y_full = np.zeros(self.form.A.shape[0])
        y_full[self.kept_rows] = self.row_scale * y * self.cscale
        return x_full, y_full, s_full

    def _measures(self, x_full, y_full, s_full) -> Dict[str, float]:
        form = self.form
        rp = form.b - form.A @ x_full
        rd = form.c - form.A.T @ y_full - s_full
        pobj = float(form.c @ x_full)
        dobj = float(form.b @ y_full)
        return {
            "primal": float(np.linalg.norm(rp)) / (1.0 + self.b_orig_norm),
            "dual": float(np.linalg.norm(rd)) / (1.0 + self.c_orig_norm),
            "gap": abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj)),
            "pobj": pobj,
            "dobj": dobj,
        }

    def solve(self) -> SdpSolution:
        started = time.perf_counter()
        opts = self.options
        self.condition = float("nan")
        self._prepare()
        name = self.problem.name or "sdp"
        logger.debug("%s: %d rows, %d scalars, %d free", name, self.A.shape[0], self.form.num_vars, self.Af.shape[1])

        x, xf, y, s = self._initial_point()
        status = SolverStatus.MAX_ITER
        message = ""
        short_steps = 0
        iteration = 0

        for iteration in range(1, opts.max_iterations + 1):
            measures = self._measures(*self._unscale(x, xf, y, s))
            logger.debug(
                "%s it %3d: pobj %+.8e dobj %+.8e pinf %.2e dinf %.2e gap %.2e",
                name, iteration, measures["pobj"], measures["dobj"],
                measures["primal"], measures["dual"], measures["gap"],
            )
            if (
                measures["primal"] <= opts.feas_tol
                and measures["dual"] <= opts.feas_tol
                and measures["gap"] <= opts.gap_tol
            ):
                status = SolverStatus.OPTIMAL
                break
            if float(self.b @ y) > config.DIVERGENCE_LIMIT:
                status, message = SolverStatus.INFEASIBLE, "dual objective diverged"
                break
            if -float(self.c @ x) - float(self.cf @ xf) > config.DIVERGENCE_LIMIT:
                status, message = SolverStatus.UNBOUNDED, "primal objective diverged"
                break

            rp = self.b - self.A @ x - self.Af @ xf
            rd = self.c - self.A.T @ y - s
            rf = self.cf - self.Af.T @ y
            mu = float(x @ s) / self.nu

            try:
                factors = self._factor(x, s)
                cache = factors[1]
                pred = self._direction(factors, x, s, rp, rd, rf, self._targets(x, s, cache, 0.0))
                ap = min(1.0, self._max_step(x, pred[0]))
                ad = min(1.0, self._max_step(s, pred[3]))
                mu_aff = float((x + ap * pred[0]) @ (s + ad * pred[3])) / self.nu
                sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.0
                targets = self._targets(x, s, cache, sigma * mu, correction=(pred[0], pred[3]))
                dx, dxf, dy, ds = self._direction(factors, x, s, rp, rd, rf, targets)
            except _NumericalTrouble as exc:
                status, message = SolverStatus.NUMERICAL_FAILURE, str(exc)
                break

            ap = min(1.0, opts.step_fraction * self._max_step(x, dx))
            ad = min(1.0, opts.step_fraction * self._max_step(s, ds))
            x = x + ap * dx
            xf = xf + ap * dxf
            y = y + ad * dy
            s = s + ad * ds

            short_steps = short_steps + 1 if max(ap, ad) < config.MIN_STEP else 0
            if short_steps >= config.STAGNATION_LIMIT:
                status, message = SolverStatus.NUMERICAL_FAILURE, "step length stagnated"
                break
        else:
            message = f"no convergence after {opts.max_iterations} iterations"

        x_full, y_full, s_full = self._unscale(x, xf, y, s)
        measures = self._measures(x_full, y_full, s_full)
        if status is SolverStatus.OPTIMAL:
            status, message = self._certify(x_full, s_full, measures)
        if status is SolverStatus.NUMERICAL_FAILURE:
            message = f"{message} at iteration {iteration} (condition ~{self.condition:.1e})"

        form = self.form
        solution = SdpSolution(
            status=status,
            X=form.unpack(x_full),
            S=form.unpack(s_full),
            y=y_full,
            primal_objective=form.sign * measures["pobj"] + form.offset,
            dual_objective=form.sign * measures["dobj"] + form.offset,
            iterations=iteration,
            maximize=self.problem.maximize,
            residuals={k: measures[k] for k in ("primal", "dual", "gap")},
            message=message,
            condition=self.condition,
            solve_time=time.perf_counter() - started,
        )
        log = logger.info if solution.optimal else logger.warning
        log(
            "%s: %s after %d iterations, objective %.8g (%.2fs)",
            name, status.value, iteration, solution.bound, solution.solve_time,
        )
        return solution

    def _certify(self, x_full, s_full, measures) -> Tuple[SolverStatus, str]:
        """Recheck the optimality certificate from the unscaled solution."""
        opts = self.options
        form = self.form
        dropped = np.setdiff1d(np.arange(form.A.shape[0]), self.kept_rows)
        if dropped.size:
            bad = np.abs(form.b[dropped] - form.A[dropped] @ x_full)
            if np.max(bad) > 1e3 * opts.feas_tol * (1.0 + self.b_orig_norm):
                return SolverStatus.INFEASIBLE, "dropped dependent rows are inconsistent"
        if measures["primal"] > opts.feas_tol or measures["dual"] > opts.feas_tol:
            return SolverStatus.NUMERICAL_FAILURE, "certificate recheck failed on residuals"
        if measures["gap"] > opts.gap_tol:
            return SolverStatus.NUMERICAL_FAILURE, "certificate recheck failed on duality gap"
        for cone in form.cones:
            if cone.kind is BlockKind.FREE:
                continue
            seg = x_full[cone.offset : cone.offset + cone.length]
            low = la.eigvalsh(smat(seg, cone.size))[0] if cone.kind is BlockKind.PSD else float(np.min(seg))
            if low < -opts.feas_tol:
                return SolverStatus.NUMERICAL_FAILURE, "primal block left the cone"
        return SolverStatus.OPTIMAL, ""


def solve(problem: SdpProblem, options: Optional[SolverOptions] = None) -> SdpSolution:
    """Solve ``problem``; the outcome is reported through ``SdpSolution.status``."""
    return InteriorPointSolver(problem, options).solve()
