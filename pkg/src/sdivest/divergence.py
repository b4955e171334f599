"""Two-parameter divergence family between frequency data and a model pmf.

The family is indexed by (alpha, lam). Each member is evaluated cell-wise;
two derived exponents control the cell terms:

    data_exp  = 1 + lam * (1 - alpha)   (applied to relative frequencies)
    model_exp = alpha - lam * (1 - alpha)   (applied to model probabilities)

They always satisfy ``data_exp + model_exp == 1 + alpha``. When either
derived exponent vanishes the member is defined by its continuous limit,
which replaces the general three-term cell value with a logarithmic form.
All powers are taken in log space so that cells with model mass as small
as 1e-300 evaluate without overflow.

The penalized variant replaces the weight the divergence puts on empty
cells (observed count zero) by an explicit penalty factor ``h`` times the
model mass there, optionally with its own exponent ``1 + beta``. It is
finite for every (alpha, lam), unlike the plain divergence, which is
undefined for ``data_exp <= 0`` as soon as one empty cell exists.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import EmptyCellUndefinedError
from .frequency import FrequencyTable
from .models import DEFAULT_TAIL_EPS, DiscreteModel

# Below this magnitude a derived exponent is routed to its limit form:
# double-precision cancellation in expm1(e * t) / e degrades past it.
LIMIT_THRESHOLD = 1e-9

# Model log-probabilities on observed cells are floored here so that the
# cell residuals stay finite while preserving ordering.
LOG_PMF_FLOOR = math.log(1e-320)


class Regime(enum.Enum):
    """Which evaluation form a parameter pair requires."""

    GENERAL = "general"
    DATA_EXP_ZERO = "data_exp_zero"
    MODEL_EXP_ZERO = "model_exp_zero"


def derive_exponents(alpha: float, lam: float):
    """Exponent pair and regime for tuning parameters (alpha, lam).

    Returns
    -------
    (data_exp, model_exp, regime)
        ``data_exp + model_exp == 1 + alpha`` exactly. Both exponents can
        never vanish together for alpha >= 0 since they sum to at least 1.
    """
    data_exp = 1.0 + lam * (1.0 - alpha)
    model_exp = alpha - lam * (1.0 - alpha)
    if abs(data_exp) < LIMIT_THRESHOLD:
        regime = Regime.DATA_EXP_ZERO
    elif abs(model_exp) < LIMIT_THRESHOLD:
        regime = Regime.MODEL_EXP_ZERO
    else:
        regime = Regime.GENERAL
    return data_exp, model_exp, regime


@dataclass(frozen=True)
class DivergenceParams:
    """Tuning parameters of one divergence family member.

    Parameters
    ----------
    alpha : float
        Density-power tuning parameter, >= 0.
    lam : float
        Family tuning parameter (any real).
    h : float
        Penalty factor applied to the model mass on empty cells in the
        penalized variant, >= 0. Ignored by the plain divergence.
    beta : float, optional
        Exponent tuning for the empty-cell penalty term; defaults to alpha.
    """

    alpha: float
    lam: float
    h: float = 1.0
    beta: float | None = None

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.h < 0:
            raise ValueError(f"penalty factor h must be >= 0, got {self.h}")
        if self.beta is not None and self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")

    @property
    def data_exp(self) -> float:
        return derive_exponents(self.alpha, self.lam)[0]

    @property
    def model_exp(self) -> float:
        return derive_exponents(self.alpha, self.lam)[1]

    @property
    def regime(self) -> Regime:
        return derive_exponents(self.alpha, self.lam)[2]

    @property
    def beta_eff(self) -> float:
        return self.alpha if self.beta is None else self.beta


def _maybe_scalar(values, scalar_in):
    return float(values) if scalar_in else values


def residual_kernel(delta, params: DivergenceParams):
    """Kernel applied to the cell residual delta = r/f - 1.

    Evaluates ``((delta + 1)**data_exp - 1) / data_exp`` through
    ``expm1(data_exp * log1p(delta))``, and ``log1p(delta)`` in the
    zero-data-exponent limit. Undefined at delta == -1 unless the data
    exponent is positive.
    """
    scalar_in = np.isscalar(delta)
    delta = np.asarray(delta, dtype=np.float64)
    if np.any(delta < -1):
        raise ValueError("residuals live in [-1, inf)")
    data_exp = params.data_exp
    at_floor = delta == -1.0
    if np.any(at_floor) and data_exp <= LIMIT_THRESHOLD:
        raise EmptyCellUndefinedError(params.alpha, params.lam, data_exp)
    with np.errstate(divide="ignore"):
        t = np.log1p(delta)
    if params.regime is Regime.DATA_EXP_ZERO:
        return _maybe_scalar(t, scalar_in)
    return _maybe_scalar(np.expm1(data_exp * t) / data_exp, scalar_in)


def penalized_residual_kernel(delta, params: DivergenceParams):
    """Penalized kernel: equals ``residual_kernel`` away from delta == -1,
    and the constant ``-h`` exactly there."""
    scalar_in = np.isscalar(delta)
    delta = np.asarray(delta, dtype=np.float64)
    if np.any(delta < -1):
        raise ValueError("residuals live in [-1, inf)")
    at_floor = delta == -1.0
    out = np.full(delta.shape, -params.h, dtype=np.float64)
    if not np.all(at_floor):
        out[~at_floor] = residual_kernel(delta[~at_floor], params)
    return _maybe_scalar(out, scalar_in)


# ---------------------------------------------------------------------------
# Cell-level building blocks shared with the estimation module. log_f may
# carry leading broadcast axes (e.g. a grid of parameter values); log_r is
# the per-cell log relative frequency. All return per-cell arrays.
# ---------------------------------------------------------------------------

def _cell_objective_terms(log_f, log_r, alpha, data_exp, model_exp, regime):
    """Objective contribution of non-empty cells, elementwise."""
    fa = np.exp((1.0 + alpha) * log_f)
    ra = np.exp((1.0 + alpha) * log_r)
    if regime is Regime.DATA_EXP_ZERO:
        return fa * (log_f - log_r) - (fa - ra) / (1.0 + alpha)
    if regime is Regime.MODEL_EXP_ZERO:
        return ra * (log_r - log_f) - (ra - fa) / (1.0 + alpha)
    cross = np.exp(model_exp * log_f + data_exp * log_r)
    return fa / data_exp - (1.0 + alpha) / (data_exp * model_exp) * cross + ra / model_exp


def _cell_kernel_terms(log_f, log_r, alpha, data_exp, regime):
    """kernel(delta) * f**(1+alpha) on non-empty cells, elementwise.

    Uses expm1 for accuracy near r = f; once the scaled log-residual is
    large the same quantity is assembled from exponentials directly, which
    avoids the inf * 0 indeterminate the expm1 route would hit on cells
    with extremely small model mass.
    """
    fa = np.exp((1.0 + alpha) * log_f)
    t = log_r - log_f
    if regime is Regime.DATA_EXP_ZERO:
        return t * fa
    z = data_exp * t
    big = np.abs(z) >= 50.0
    if not np.any(big):
        return np.expm1(z) / data_exp * fa
    z, fa_b, lf_b = np.broadcast_arrays(z, fa, log_f)
    out = np.empty(z.shape, dtype=np.float64)
    small = ~big
    out[small] = np.expm1(z[small]) / data_exp * fa_b[small]
    out[big] = (np.exp(z[big] + (1.0 + alpha) * lf_b[big]) - fa_b[big]) / data_exp
    return out


def _truncation(table: FrequencyTable, model: DiscreteModel, theta, tail_eps):
    """Truncated-support context: log-pmf over 0..x_max and on observed cells."""
    x_max = model.support_cutoff(theta, tail_eps, min_cover=table.max_x)
    log_f_all = model.log_pmf(theta, np.arange(x_max + 1))
    log_f_obs = log_f_all[table.support]
    complete = table.support.size == x_max + 1
    return x_max, log_f_all, log_f_obs, complete


def _mass_complement(log_f_all, log_f_obs, exponent):
    """Model mass on empty cells: total power sum minus the observed share."""
    return float(np.exp(exponent * log_f_all).sum() - np.exp(exponent * log_f_obs).sum())


def s_divergence(table: FrequencyTable, model: DiscreteModel, theta,
                 params: DivergenceParams, *, tail_eps=DEFAULT_TAIL_EPS) -> float:
    """Divergence between observed relative frequencies and the model at theta.

    Raises
    ------
    EmptyCellUndefinedError
        If the data exponent is non-positive and the truncated support
        contains an empty cell; the member is then not finitely defined.
    """
    data_exp, model_exp, regime = derive_exponents(params.alpha, params.lam)
    _, log_f_all, log_f_obs, complete = _truncation(table, model, theta, tail_eps)
    log_r = np.log(table.rel_freqs)
    core = float(_cell_objective_terms(
        np.maximum(log_f_obs, LOG_PMF_FLOOR), log_r,
        params.alpha, data_exp, model_exp, regime).sum())
    if data_exp > LIMIT_THRESHOLD:
        # empty cells carry weight 1/data_exp on the model mass there
        return core + _mass_complement(log_f_all, log_f_obs, 1.0 + params.alpha) / data_exp
    if complete:
        return core
    raise EmptyCellUndefinedError(params.alpha, params.lam, data_exp)


def penalized_s_divergence(table: FrequencyTable, model: DiscreteModel, theta,
                           params: DivergenceParams, *, tail_eps=DEFAULT_TAIL_EPS) -> float:
    """Penalized divergence: finite for every (alpha, lam) when h >= 0.

    Non-empty cells contribute exactly as in ``s_divergence``; the entire
    empty region contributes ``h`` times the model mass there at exponent
    ``1 + beta``, computed by complement so the infinite empty set is
    handled exactly up to the truncation tail.
    """
    data_exp, model_exp, regime = derive_exponents(params.alpha, params.lam)
    _, log_f_all, log_f_obs, _ = _truncation(table, model, theta, tail_eps)
    log_r = np.log(table.rel_freqs)
    core = float(_cell_objective_terms(
        np.maximum(log_f_obs, LOG_PMF_FLOOR), log_r,
        params.alpha, data_exp, model_exp, regime).sum())
    return core + params.h * _mass_complement(log_f_all, log_f_obs, 1.0 + params.beta_eff)
