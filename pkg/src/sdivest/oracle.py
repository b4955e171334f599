"""Brute-force verification layer, independent of the primary code paths.

Objectives are re-evaluated here in plain linear space (guarded) and
minimized by exhaustive grid search; power sums are re-accumulated term by
term with compensated summation. Nothing below imports the estimation
solver or the divergence evaluation helpers, so agreement between the two
routes is meaningful evidence. Speed is explicitly not a goal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import EmptyCellUndefinedError
from .frequency import FrequencyTable
from .models import PoissonModel, replicate_rng

_LIMIT = 1e-9
_CHUNK = 4096


@dataclass(frozen=True)
class OracleConfig:
    """Exhaustive-search layout for the verification grid."""

    theta_lo: float = 0.05
    theta_hi: float = 10.0
    step: float = 5e-4
    long_sum_cutoff: int = 500

    def __post_init__(self):
        if not self.theta_lo < self.theta_hi:
            raise ValueError("theta_lo must be below theta_hi")
        if not 0 < self.step <= (self.theta_hi - self.theta_lo) / 10:
            raise ValueError("step must be positive and resolve the range")


def _naive_objective_chunk(thetas, model, table, alpha, lam, weight, exponent, x_all):
    """Objective values for a chunk of parameter values, linear space."""
    data_exp = 1.0 + lam * (1.0 - alpha)
    model_exp = alpha - lam * (1.0 - alpha)
    r = table.rel_freqs
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        f_all = np.asarray(model.pmf(thetas[:, None], x_all[None, :]), dtype=np.float64)
        f_obs = np.maximum(f_all[:, table.support], 1e-320)
        fa = f_obs ** (1.0 + alpha)
        ra = r ** (1.0 + alpha)
        if abs(data_exp) < _LIMIT:
            core = (fa * np.log(f_obs / r) - (fa - ra) / (1.0 + alpha)).sum(axis=1)
        elif abs(model_exp) < _LIMIT:
            core = (ra * np.log(r / f_obs) - (ra - fa) / (1.0 + alpha)).sum(axis=1)
        else:
            cross = f_obs ** model_exp * r ** data_exp
            core = (fa / data_exp
                    - (1.0 + alpha) / (data_exp * model_exp) * cross
                    + ra / model_exp).sum(axis=1)
        empty = ((f_all ** exponent).sum(axis=1) - (f_obs ** exponent).sum(axis=1))
        values = core + weight * empty
    return np.where(np.isfinite(values), values, np.inf)


def grid_minimize(table: FrequencyTable, model, params, mode,
                  config: OracleConfig) -> float:
    """Exact argmin of the (penalized) objective over the config grid.

    Whether the data carry empty cells is probed against the model mass at
    the middle of the grid: bounded-support models fully covered by the
    data have none, in which case the plain divergence is defined for any
    exponent pair.

    Raises
    ------
    EmptyCellUndefinedError
        mode "msde" with non-positive data exponent and empty cells present.
    """
    data_exp = 1.0 + params.lam * (1.0 - params.alpha)
    count = int(round((config.theta_hi - config.theta_lo) / config.step)) + 1
    thetas = config.theta_lo + config.step * np.arange(count)
    x_top = max(table.max_x,
                int(config.theta_hi + 16.0 * math.sqrt(config.theta_hi + 1.0) + 90.0))
    x_all = np.arange(x_top + 1)

    mid = 0.5 * (config.theta_lo + config.theta_hi)
    f_mid = np.asarray(model.pmf(mid, x_all), dtype=np.float64)
    empties_present = f_mid.sum() - f_mid[table.support].sum() > 1e-15
    if mode == "msde":
        if not empties_present:
            weight = 0.0
        elif data_exp > _LIMIT:
            weight = 1.0 / data_exp
        else:
            raise EmptyCellUndefinedError(params.alpha, params.lam, data_exp)
        exponent = 1.0 + params.alpha
    else:
        weight, exponent = params.h, 1.0 + params.beta_eff

    best_val, best_theta = np.inf, thetas[0]
    for start in range(0, count, _CHUNK):
        chunk = thetas[start:start + _CHUNK]
        values = _naive_objective_chunk(chunk, model, table, params.alpha,
                                        params.lam, weight, exponent, x_all)
        i = int(np.argmin(values))
        if values[i] < best_val:
            best_val, best_theta = float(values[i]), float(chunk[i])
    return best_theta


def long_sum_check(model, theta, c, cutoff=500) -> float:
    """Power sum re-accumulated term by term with compensated summation."""
    if c <= 0:
        raise ValueError("exponent must be positive")
    return math.fsum(float(model.pmf(theta, x)) ** c for x in range(cutoff + 1))


# ---------------------------------------------------------------------------
# Randomized cross-check harness (the verify surface of the CLI)
# ---------------------------------------------------------------------------

VERIFY_ALPHAS = (0.0, 0.1, 0.25, 0.5)
VERIFY_LAMBDAS = (0.0, -0.5, -1.0, -1.5, -2.0)
VERIFY_N = (10, 20, 50)
VERIFY_TOL = 5e-4
POWER_SUM_TOL = 1e-10


def run_verification(cases=100, seed=7, perturb=0.0, step=2.5e-4) -> dict:
    """Randomized fit-vs-grid agreement plus power-sum cross-checks.

    ``perturb`` shifts every fit by that amount before comparison; it
    exists as a negative control so the failure path can be exercised.
    Returns a JSON-serializable report with a top-level "pass" flag.
    """
    from .divergence import DivergenceParams, derive_exponents
    from .estimation import fit

    model = PoissonModel()
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    case_reports = []
    worst = 0.0
    for index in range(int(cases)):
        alpha = float(rng.choice(VERIFY_ALPHAS))
        lam = float(rng.choice(VERIFY_LAMBDAS))
        n = int(rng.choice(VERIFY_N))
        theta = float(rng.uniform(1.0, 9.0))
        h = float(rng.choice((0.5, 1.0)))
        data_exp = derive_exponents(alpha, lam)[0]
        mode = "msde" if data_exp > _LIMIT and index % 2 == 0 else "mpsde"
        table = model.sample(theta, n, replicate_rng(seed, n, theta, index))
        while len(table) < 2:  # degenerate one-cell samples carry no signal
            theta = float(rng.uniform(1.0, 9.0))
            table = model.sample(theta, n, replicate_rng(seed, n, theta, index))
        params = DivergenceParams(alpha, lam, h=h)
        result = fit(table, model, params, mode=mode)
        hi = max(10.0, 3.0 * table.mean)
        config = OracleConfig(theta_lo=0.05, theta_hi=hi, step=step)
        grid_theta = grid_minimize(table, model, params, mode, config)
        diff = abs(result.theta_hat + perturb - grid_theta)
        worst = max(worst, diff)
        case_reports.append({
            "case": index, "n": n, "theta": theta, "alpha": alpha,
            "lambda": lam, "h": h, "mode": mode,
            "fit": result.theta_hat, "grid": grid_theta, "abs_diff": diff,
            "converged": result.converged,
            "ok": bool(diff <= VERIFY_TOL and result.converged),
        })

    power_reports = []
    for theta in (0.3, 3.0, 9.0):
        for c in (1.0, 1.5, 2.0):
            fast = model.power_sum(theta, c, min_cover=500)
            slow = long_sum_check(model, theta, c, cutoff=500)
            power_reports.append({
                "theta": theta, "c": c, "power_sum": fast, "long_sum": slow,
                "abs_diff": abs(fast - slow),
                "ok": bool(abs(fast - slow) <= POWER_SUM_TOL),
            })

    ok = all(c["ok"] for c in case_reports) and all(p["ok"] for p in power_reports)
    return {
        "pass": ok,
        "cases": case_reports,
        "power_sums": power_reports,
        "max_abs_diff": worst,
        "tolerance": VERIFY_TOL,
        "seed": int(seed),
        "grid_step": step,
    }
