"""Minimum-divergence estimation: estimating equation, solver, asymptotics.

The estimator solves ``sum_x kernel(delta(x)) f(x)**(1+alpha) u(x) = 0``
where u is the likelihood score and the kernel is the penalized one for
the penalized estimator (empty cells weighted -h) or the plain one for the
ordinary estimator (empty cells weighted -1/data_exp, only defined for a
positive data exponent).

The solver always locates candidate roots from a coarse scan of the
objective and the estimating function over a bracket around the data
scale, polishes each candidate by damped Newton (finite-difference
Jacobian) with bisection as a fallback, and returns the root with the
smallest objective value. Families of penalty cells (many h and beta on
one dataset) share the scan, which keeps Monte-Carlo sweeps cheap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divergence import (
    LIMIT_THRESHOLD,
    LOG_PMF_FLOOR,
    DivergenceParams,
    Regime,
    _cell_kernel_terms,
    _cell_objective_terms,
    _truncation,
    derive_exponents,
    penalized_s_divergence,
    s_divergence,
)
from .exceptions import EmptyCellUndefinedError, SingularInformationError
from .frequency import FrequencyTable
from .models import DEFAULT_TAIL_EPS, DiscreteModel

RESIDUAL_TOL = 1e-8
MAX_NEWTON_ITER = 200
MAX_BISECT_ITER = 200
SCAN_POINTS = 96

MODES = ("msde", "mpsde")


@dataclass
class EstimationResult:
    """Outcome of one minimum-divergence fit.

    ``residual_norm`` is the estimating-function norm at the estimate,
    normalized by the local Jacobian and the parameter scale so that it
    reads as a relative root error. ``method`` records the path that
    produced the estimate: "newton", "bisection_fallback" or "grid_refine".
    """

    theta_hat: float
    objective: float
    residual_norm: float
    iterations: int
    converged: bool
    method: str
    mode: str
    params: DivergenceParams


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def estimating_function(table: FrequencyTable, model: DiscreteModel, theta,
                        params: DivergenceParams, mode="mpsde", *,
                        tail_eps=DEFAULT_TAIL_EPS) -> np.ndarray:
    """Estimating function at theta; the estimator is a root of it.

    Returns an array of shape (param_dim,). The empty-cell block is
    computed by complement against the truncated-support weighted power
    sum, so the infinite empty region enters exactly up to tail mass.
    """
    _check_mode(mode)
    data_exp, model_exp, regime = derive_exponents(params.alpha, params.lam)
    x_max, log_f_all, log_f_obs, complete = _truncation(table, model, theta, tail_eps)
    log_r = np.log(table.rel_freqs)
    u_all = np.asarray(model.score(theta, np.arange(x_max + 1)), dtype=np.float64)
    u_obs = u_all[table.support]

    kern = _cell_kernel_terms(np.maximum(log_f_obs, LOG_PMF_FLOOR), log_r,
                              params.alpha, data_exp, regime)
    core = kern @ u_obs

    if mode == "msde":
        if complete:
            return core
        if data_exp <= LIMIT_THRESHOLD:
            raise EmptyCellUndefinedError(params.alpha, params.lam, data_exp)
        weight, exponent = 1.0 / data_exp, 1.0 + params.alpha
    else:
        beta = params.beta_eff
        weight = params.h * (1.0 + beta) / (1.0 + params.alpha)
        exponent = 1.0 + beta
    empty_block = (np.exp(exponent * log_f_all) @ u_all
                   - np.exp(exponent * log_f_obs) @ u_obs)
    return core - weight * empty_block


# ---------------------------------------------------------------------------
# Solver internals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Cell:
    mode: str
    h: float
    beta: float


@dataclass
class _Root:
    theta: float
    objective: float
    residual: float
    iterations: int
    method: str
    converged: bool


@dataclass(frozen=True)
class _Task:
    """One candidate root of one cell, queued for the batched polisher."""
    cell_index: int
    theta0: float
    bracket: tuple | None
    guard: tuple
    weights: tuple


class _FamilyEngine:
    """Fits many penalty cells of one (alpha, lam) family on one dataset.

    All cells share one scan of the bracket; per-cell objective and
    estimating-function values on the grid are affine in the penalty
    factor, so the grid work is done once.
    """

    def __init__(self, table, model, alpha, lam, tail_eps=DEFAULT_TAIL_EPS):
        if model.param_dim != 1:
            raise NotImplementedError("the solver handles one-parameter models")
        self.table = table
        self.model = model
        self.alpha = float(alpha)
        self.lam = float(lam)
        self.tail_eps = tail_eps
        self.data_exp, self.model_exp, self.regime = derive_exponents(alpha, lam)
        self.log_r = np.log(table.rel_freqs)
        self.scale = model.initial_estimate(table)
        self.lo = max(1e-3, 0.05 * self.scale)
        self.hi = 20.0 * self.scale

    # -- evaluation -------------------------------------------------------

    def _parts(self, thetas, x_max, exponents):
        """Core and empty-complement pieces at a batch of parameter values.

        Returns (core_obj, core_est, {e: em_obj}, {e: em_est}), each an
        array over the batch.
        """
        thetas = np.asarray(thetas, dtype=np.float64)
        x_all = np.arange(x_max + 1)
        lf_all = self.model.log_pmf(thetas[:, None], x_all[None, :])
        u_all = np.asarray(self.model.score(thetas[:, None], x_all[None, :]))[..., 0]
        lf_obs = lf_all[:, self.table.support]
        u_obs = u_all[:, self.table.support]
        lf_obs_f = np.maximum(lf_obs, LOG_PMF_FLOOR)

        core_obj = _cell_objective_terms(
            lf_obs_f, self.log_r, self.alpha, self.data_exp, self.model_exp,
            self.regime).sum(axis=-1)
        core_est = (_cell_kernel_terms(
            lf_obs_f, self.log_r, self.alpha, self.data_exp, self.regime)
            * u_obs).sum(axis=-1)

        em_obj, em_est = {}, {}
        for e in exponents:
            p_all = np.exp(e * lf_all)
            p_obs = np.exp(e * lf_obs)
            em_obj[e] = p_all.sum(axis=-1) - p_obs.sum(axis=-1)
            em_est[e] = (p_all * u_all).sum(axis=-1) - (p_obs * u_obs).sum(axis=-1)
        return core_obj, core_est, em_obj, em_est

    def _cell_weights(self, cell, complete_at_init):
        """(objective weight, estimating weight, exponent) for one cell."""
        if cell.mode == "msde":
            if self.data_exp > LIMIT_THRESHOLD:
                return 1.0 / self.data_exp, 1.0 / self.data_exp, 1.0 + self.alpha
            if complete_at_init:
                return 0.0, 0.0, 1.0 + self.alpha
            raise EmptyCellUndefinedError(self.alpha, self.lam, self.data_exp)
        w_obj = cell.h
        w_est = cell.h * (1.0 + cell.beta) / (1.0 + self.alpha)
        return w_obj, w_est, 1.0 + cell.beta

    def _eval_cell(self, thetas, x_max, weights):
        w_obj, w_est, e = weights
        core_obj, core_est, em_obj, em_est = self._parts(thetas, x_max, (e,))
        return core_obj + w_obj * em_obj[e], core_est - w_est * em_est[e]

    def _est_many(self, thetas, x_max, w_est_arr, e_arr):
        """Estimating-function values where every position carries its own
        cell weight and penalty exponent."""
        exponents = tuple(dict.fromkeys(e_arr.tolist()))
        _, core_est, _, em_est = self._parts(thetas, x_max, exponents)
        est = core_est.copy()
        for e in exponents:
            mask = e_arr == e
            est[mask] -= w_est_arr[mask] * em_est[e][mask]
        return est

    @staticmethod
    def _scaled_residual(est_value, jac, theta):
        denom = max(1.0, abs(jac) * max(1.0, abs(theta)))
        return abs(est_value) / denom

    # -- scan -------------------------------------------------------------

    def _scan_grid(self):
        knee = 4.0 * self.scale
        if self.hi > knee > self.lo:
            low = np.geomspace(self.lo, knee, 2 * SCAN_POINTS // 3)
            high = np.geomspace(knee, self.hi, SCAN_POINTS // 3 + 1)[1:]
            return [low, high]
        return [np.geomspace(self.lo, self.hi, SCAN_POINTS)]

    def scan(self, exponents):
        """Shared grid pieces over the bracket, concatenated across segments."""
        grids, cobj, cest = [], [], []
        em_obj = {e: [] for e in exponents}
        em_est = {e: [] for e in exponents}
        for seg in self._scan_grid():
            x_max = self.model.support_cutoff(seg[-1], self.tail_eps,
                                              min_cover=self.table.max_x)
            o, s, eo, ee = self._parts(seg, x_max, exponents)
            grids.append(seg)
            cobj.append(o)
            cest.append(s)
            for e in exponents:
                em_obj[e].append(eo[e])
                em_est[e].append(ee[e])
        cat = np.concatenate
        return (cat(grids), cat(cobj), cat(cest),
                {e: cat(v) for e, v in em_obj.items()},
                {e: cat(v) for e, v in em_est.items()})

    # -- root polishing ---------------------------------------------------
    #
    # Every candidate of every cell is polished on one shared truncation
    # (the cutoff at the top of the bracket). That keeps a task's Newton
    # trajectory a pure function of the dataset and its own cell, so a cell
    # fitted alone, inside an h sweep, or inside an (h, beta) sweep yields
    # bit-identical results.

    def _fit_x_max(self):
        return self.model.support_cutoff(self.hi, self.tail_eps,
                                         min_cover=self.table.max_x)

    def _newton_batch(self, tasks, x_max, max_sweeps=40):
        """Damped Newton with central-difference Jacobians, advanced in
        lockstep across tasks so evaluations batch into single passes."""
        t_count = len(tasks)
        theta = np.array([t.theta0 for t in tasks], dtype=np.float64)
        w_est = np.array([t.weights[1] for t in tasks], dtype=np.float64)
        expo = np.array([t.weights[2] for t in tasks], dtype=np.float64)
        guard_lo = np.array([t.guard[0] for t in tasks], dtype=np.float64)
        guard_hi = np.array([t.guard[1] for t in tasks], dtype=np.float64)
        resid = np.full(t_count, np.inf)
        iters = np.zeros(t_count, dtype=np.int64)
        converged = np.zeros(t_count, dtype=bool)
        failed = np.zeros(t_count, dtype=bool)
        stalled = np.zeros(t_count, dtype=bool)

        for _ in range(max_sweeps):
            active = ~(converged | failed)
            if not active.any():
                break
            ai = np.nonzero(active)[0]
            th = theta[ai]
            d = 1e-5 * np.maximum(1.0, np.abs(th))
            est = self._est_many(np.concatenate([th - d, th, th + d]), x_max,
                                 np.tile(w_est[ai], 3), np.tile(expo[ai], 3))
            k = ai.size
            f_minus, f0, f_plus = est[:k], est[k:2 * k], est[2 * k:]
            jac = (f_plus - f_minus) / (2.0 * d)
            iters[ai] += 1
            denom = np.maximum(1.0, np.abs(jac) * np.maximum(1.0, np.abs(th)))
            r_now = np.abs(f0) / denom
            resid[ai] = r_now
            ok = r_now < RESIDUAL_TOL
            converged[ai[ok]] = True
            bad = (~ok) & ((jac == 0.0) | ~np.isfinite(jac) | ~np.isfinite(f0)
                           | stalled[ai])
            failed[ai[bad]] = True

            live = np.nonzero(~(ok | bad))[0]
            if live.size == 0:
                continue
            li = ai[live]
            step = -f0[live] / jac[live]
            base = np.abs(f0[live])
            scale = np.ones(live.size)
            moved = np.zeros(live.size, dtype=bool)
            for _round in range(6):
                todo = np.nonzero(~moved)[0]
                if todo.size == 0:
                    break
                cand = theta[li[todo]] + scale[todo] * step[todo]
                in_dom = (guard_lo[li[todo]] < cand) & (cand < guard_hi[li[todo]])
                ev = np.nonzero(in_dom)[0]
                passed = np.zeros(todo.size, dtype=bool)
                if ev.size:
                    fc = self._est_many(cand[ev], x_max,
                                        w_est[li[todo[ev]]], expo[li[todo[ev]]])
                    passed[ev] = np.abs(fc) < base[todo[ev]]
                hit = todo[passed]
                theta[li[hit]] = cand[passed]
                tiny = (np.abs(scale[hit] * step[hit])
                        < 1e-14 * np.maximum(1.0, np.abs(theta[li[hit]])))
                stalled[li[hit[tiny]]] = True
                moved[hit] = True
                scale[todo[~passed]] *= 0.5
            failed[li[~moved]] = True
        return theta, resid, iters, converged

    def _bisect(self, lo, hi, f_lo, weights, x_max):
        w_arr = np.array([weights[1]])
        e_arr = np.array([weights[2]])
        iterations = 0
        sign_lo = math.copysign(1.0, f_lo)
        for _ in range(MAX_BISECT_ITER):
            iterations += 1
            mid = 0.5 * (lo + hi)
            f_mid = float(self._est_many(np.array([mid]), x_max, w_arr, e_arr)[0])
            if f_mid == 0.0:
                lo = hi = mid
                break
            if math.copysign(1.0, f_mid) == sign_lo:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-13 * max(1.0, abs(mid)):
                break
        theta = 0.5 * (lo + hi)
        d = 1e-5 * max(1.0, abs(theta))
        est = self._est_many(np.array([theta - d, theta, theta + d]), x_max,
                             np.repeat(w_arr, 3), np.repeat(e_arr, 3))
        jac = (est[2] - est[0]) / (2.0 * d)
        resid = self._scaled_residual(est[1], jac, theta)
        return theta, resid, iterations, resid < RESIDUAL_TOL

    def _grid_refine(self, center_idx, grid, weights, x_max):
        lo = grid[max(center_idx - 1, 0)]
        hi = grid[min(center_idx + 1, len(grid) - 1)]
        iterations = 0
        best = grid[center_idx]
        for _ in range(2):
            sub = np.geomspace(max(lo, 1e-12), hi, 33)
            obj, _ = self._eval_cell(sub, x_max, weights)
            i = int(np.argmin(obj))
            best = float(sub[i])
            lo, hi = sub[max(i - 1, 0)], sub[min(i + 1, len(sub) - 1)]
            iterations += len(sub)
        d = 1e-5 * max(1.0, abs(best))
        est = self._est_many(np.array([best - d, best, best + d]), x_max,
                             np.array([weights[1]] * 3), np.array([weights[2]] * 3))
        jac = (est[2] - est[0]) / (2.0 * d)
        resid = self._scaled_residual(est[1], jac, best)
        return best, resid, iterations

    # -- candidate discovery + selection ----------------------------------

    @staticmethod
    def _candidates(grid, obj, est):
        """Grid positions worth polishing: local objective minima plus
        minimum-type crossings of the estimating function (positive to
        negative, since the estimating function is the negative objective
        slope up to a constant). Maximum-type crossings can never win the
        objective comparison and are skipped.

        Plateaus count once (their entry point), and sign flips below the
        numerical noise floor of the grid values are ignored; both show up
        on the far side of the bracket where the objective goes flat.
        """
        finite = np.isfinite(obj)
        interior = (finite[1:-1] & (obj[1:-1] < obj[:-2]) & (obj[1:-1] <= obj[2:]))
        cands = [(float(grid[i + 1]), None) for i in np.nonzero(interior)[0]]

        magnitude = np.abs(est[np.isfinite(est)])
        noise = 1e-12 * (magnitude.max() if magnitude.size else 0.0)
        downward = (np.isfinite(est[:-1]) & np.isfinite(est[1:])
                    & (est[:-1] > 0.0) & (est[1:] < 0.0)
                    & (np.maximum(np.abs(est[:-1]), np.abs(est[1:])) > noise))
        for i in np.nonzero(downward)[0]:
            bracket = (float(grid[i]), float(grid[i + 1]), float(est[i]))
            cands.append((math.sqrt(grid[i] * grid[i + 1]), bracket))

        cands.sort(key=lambda c: c[0])
        merged = []
        for theta, bracket in cands:
            if merged and abs(theta - merged[-1][0]) < 0.08 * merged[-1][0]:
                if bracket is not None and merged[-1][1] is None:
                    merged[-1] = (merged[-1][0], bracket)
                continue
            merged.append((theta, bracket))
        return merged

    def fit_cells(self, cells, init=None, robust_init=False):
        """Fit every cell; returns one EstimationResult per cell, in order."""
        theta_init = float(init) if init is not None else self.model.initial_estimate(
            self.table, robust=robust_init)
        complete_at_init = self._complete_at(theta_init)
        weights = [self._cell_weights(c, complete_at_init) for c in cells]
        exponents = tuple(dict.fromkeys(w[2] for w in weights))
        grid, core_obj, core_est, em_obj, em_est = self.scan(exponents)
        x_max = self._fit_x_max()

        tasks = []
        cell_grids = []
        for ci, (cell, w) in enumerate(zip(cells, weights)):
            w_obj, w_est, e = w
            obj_g = core_obj + w_obj * em_obj[e]
            est_g = core_est - w_est * em_est[e]
            cell_grids.append(obj_g)
            for theta0, bracket in self._candidates(grid, obj_g, est_g):
                guard = ((bracket[0] / 2.0, bracket[1] * 2.0) if bracket
                         else (theta0 / 8.0, theta0 * 8.0))
                tasks.append(_Task(ci, theta0, bracket, guard, w))

        roots_by_cell = [[] for _ in cells]
        if tasks:
            theta, resid, iters, ok = self._newton_batch(tasks, x_max)
            for i, task in enumerate(tasks):
                if ok[i]:
                    root = _Root(float(theta[i]), math.nan, float(resid[i]),
                                 int(iters[i]), "newton", True)
                elif task.bracket is not None:
                    b_theta, b_resid, b_its, b_ok = self._bisect(
                        task.bracket[0], task.bracket[1], task.bracket[2],
                        task.weights, x_max)
                    root = _Root(b_theta, math.nan, b_resid,
                                 int(iters[i]) + b_its, "bisection_fallback", b_ok)
                else:
                    root = _Root(float(theta[i]), math.nan, float(resid[i]),
                                 int(iters[i]), "newton", False)
                # selection compares objectives on the shared truncation;
                # the winner is re-reported on the exact one afterwards
                obj, _ = self._eval_cell([root.theta], x_max, task.weights)
                root.objective = float(obj[0])
                roots_by_cell[task.cell_index].append(root)

        results = []
        for ci, cell in enumerate(cells):
            picked = self._select(cell, roots_by_cell[ci], grid, cell_grids[ci],
                                  weights[ci], theta_init, x_max)
            picked.objective = self._objective_at(picked.theta_hat, cell)
            results.append(picked)
        return results

    def _complete_at(self, theta):
        x_max = self.model.support_cutoff(theta, self.tail_eps,
                                          min_cover=self.table.max_x)
        return self.table.support.size == x_max + 1

    def _objective_at(self, theta, cell):
        params = DivergenceParams(self.alpha, self.lam, h=cell.h, beta=cell.beta)
        if cell.mode == "msde":
            return s_divergence(self.table, self.model, theta, params,
                                tail_eps=self.tail_eps)
        return penalized_s_divergence(self.table, self.model, theta, params,
                                      tail_eps=self.tail_eps)

    def _select(self, cell, roots, grid, obj_g, weights, theta_init, x_max):
        params = DivergenceParams(self.alpha, self.lam, h=cell.h, beta=cell.beta)
        converged = [r for r in roots if r.converged and math.isfinite(r.objective)]
        pool = converged or [r for r in roots if math.isfinite(r.objective)]
        best = None
        if pool:
            top = min(r.objective for r in pool)
            ties = [r for r in pool
                    if r.objective <= top + 1e-10 * (1.0 + abs(top))]
            best = min(ties, key=lambda r: abs(r.theta - theta_init))

        # A boundary minimum of the scan that undercuts every root means the
        # objective keeps falling where no root was found; report the refined
        # grid point honestly as non-converged.
        finite = np.where(np.isfinite(obj_g), obj_g, np.inf)
        i_min = int(np.argmin(finite))
        boundary = i_min <= 1 or i_min >= len(grid) - 2
        need_refine = best is None or (
            boundary and finite[i_min] < best.objective - 1e-8 * (1.0 + abs(best.objective)))
        if need_refine:
            theta, resid, its = self._grid_refine(i_min, grid, weights, x_max)
            refined_obj = float(self._eval_cell([theta], x_max, weights)[0][0])
            if best is None or refined_obj < best.objective - 1e-8 * (1.0 + abs(best.objective)):
                return EstimationResult(
                    theta_hat=theta, objective=refined_obj, residual_norm=resid,
                    iterations=its, converged=resid < RESIDUAL_TOL,
                    method="grid_refine", mode=cell.mode, params=params)
        return EstimationResult(
            theta_hat=best.theta, objective=best.objective,
            residual_norm=best.residual, iterations=best.iterations,
            converged=best.converged, method=best.method,
            mode=cell.mode, params=params)


def fit(table: FrequencyTable, model: DiscreteModel, params: DivergenceParams,
        mode="mpsde", init=None, *, robust_init=False,
        tail_eps=DEFAULT_TAIL_EPS) -> EstimationResult:
    """Minimum-divergence fit of the model to a frequency table.

    Scans the estimating function and the objective over a bracket around
    the data scale, polishes every candidate root, and returns the root
    with the smallest objective value (ties broken toward the
    initializer). ``converged`` is honest: a False flag means the residual
    tolerance was not met and ``theta_hat`` is the best candidate found.

    Raises
    ------
    EmptyCellUndefinedError
        mode "msde" with a non-positive data exponent on data whose
        truncated support contains an empty cell.
    """
    _check_mode(mode)
    engine = _FamilyEngine(table, model, params.alpha, params.lam, tail_eps)
    cell = _Cell(mode, params.h, params.beta_eff)
    return engine.fit_cells([cell], init=init, robust_init=robust_init)[0]


def fit_penalty_family(table: FrequencyTable, model: DiscreteModel, alpha, lam,
                       h_values, beta_values=None, mode="mpsde", *, init=None,
                       robust_init=False, tail_eps=DEFAULT_TAIL_EPS):
    """Fit one dataset at every (h, beta) on a shared scan.

    Returns a dict keyed by (h, beta) -> EstimationResult. Results are
    identical to calling ``fit`` cell by cell; the scan over the bracket is
    simply shared, which is what makes dense penalty sweeps affordable.
    """
    _check_mode(mode)
    betas = [alpha] if beta_values is None else list(beta_values)
    engine = _FamilyEngine(table, model, alpha, lam, tail_eps)
    cells = [_Cell(mode, float(h), float(b)) for h in h_values for b in betas]
    results = engine.fit_cells(cells, init=init, robust_init=robust_init)
    return {(c.h, c.beta): r for c, r in zip(cells, results)}


# ---------------------------------------------------------------------------
# Asymptotic variance
# ---------------------------------------------------------------------------

@dataclass
class AsymptoticVariance:
    """Sandwich covariance pieces at the model; all shapes (p, p) or (p,).

    The sandwich depends on alpha only: the second tuning parameter never
    enters these formulas, so estimators across that whole direction of
    the family share one asymptotic distribution at the model.
    """

    m_alpha: np.ndarray
    m_2alpha: np.ndarray
    n_alpha: np.ndarray
    j: np.ndarray
    v: np.ndarray
    sandwich: np.ndarray


def asymptotic_variance(model: DiscreteModel, theta, alpha, *,
                        tail_eps=DEFAULT_TAIL_EPS) -> AsymptoticVariance:
    """Model-based sandwich variance of the estimator at theta.

    ``j = sum u u^T f^(1+alpha)``, ``v = sum u u^T f^(1+2 alpha) - n n^T``
    with ``n = sum u f^(1+alpha)``; the sandwich is ``j^-1 v j^-1``.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    x_max = model.support_cutoff(theta, tail_eps, min_cover=0)
    x = np.arange(x_max + 1)
    log_f = model.log_pmf(theta, x)
    u = np.asarray(model.score(theta, x), dtype=np.float64)
    fa = np.exp((1.0 + alpha) * log_f)
    f2a = np.exp((1.0 + 2.0 * alpha) * log_f)
    m_alpha = np.einsum("xi,xj,x->ij", u, u, fa)
    m_2alpha = np.einsum("xi,xj,x->ij", u, u, f2a)
    n_alpha = u.T @ fa
    v = m_2alpha - np.outer(n_alpha, n_alpha)
    if not np.all(np.isfinite(m_alpha)) or np.linalg.cond(m_alpha) > 1e12:
        raise SingularInformationError(
            f"information matrix is singular at theta={theta}, alpha={alpha}")
    half = np.linalg.solve(m_alpha, v)
    sandwich = np.linalg.solve(m_alpha, half.T).T
    return AsymptoticVariance(m_alpha=m_alpha, m_2alpha=m_2alpha,
                              n_alpha=n_alpha, j=m_alpha, v=v, sandwich=sandwich)
