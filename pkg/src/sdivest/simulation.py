"""Monte-Carlo study engine: MSE surfaces over sample size, true parameter,
tuning parameters and penalty factors.

Replicate r of a (n, theta) pair always draws its dataset from the seed
schedule (base_seed, n, theta, r), independent of every tuning parameter,
so all penalty cells are compared on common random numbers. Replicates
that fail (undefined divergence, no convergence) are counted and excluded,
never imputed. Everything is deterministic for a fixed base seed.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field, asdict
from io import StringIO

from .estimation import _Cell, _FamilyEngine
from .exceptions import AllReplicatesFailedError, EmptyCellUndefinedError, MissingCellsError
from .models import DEFAULT_TAIL_EPS, PoissonModel, replicate_rng

DEFAULT_H_GRID = tuple(round(0.1 * i, 1) for i in range(16))  # 0.0 .. 1.5
DEFAULT_BETA_GRID = (0.0, 0.1, 0.25, 0.5, 0.7, 1.0)
FAST_REPLICATES = 200

SURFACE_COLUMNS = ("n", "theta", "alpha", "lambda", "h", "beta",
                   "mse", "n_mse", "fail_count", "R_eff", "base_seed")


@dataclass(frozen=True)
class ExperimentGrid:
    """Cartesian experiment layout plus replication and seeding."""

    n_values: tuple
    theta_values: tuple
    alpha_values: tuple
    lambda_values: tuple
    h_values: tuple = DEFAULT_H_GRID
    beta_values: tuple | None = None
    replicates: int = 1000
    base_seed: int = 0
    mode: str = "mpsde"

    def __post_init__(self):
        for name in ("n_values", "theta_values", "alpha_values",
                     "lambda_values", "h_values"):
            values = tuple(getattr(self, name))
            object.__setattr__(self, name, values)
            if not values:
                raise ValueError(f"{name} must be non-empty")
        if self.beta_values is not None:
            object.__setattr__(self, "beta_values", tuple(self.beta_values))
            if not self.beta_values:
                raise ValueError("beta_values must be non-empty when given")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if any(h < 0 for h in self.h_values):
            raise ValueError("penalty factors must be >= 0")
        if self.mode not in ("msde", "mpsde"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def to_dict(self):
        return asdict(self)


@dataclass
class CellResult:
    """Aggregated Monte-Carlo outcome of one grid cell."""

    n: int
    theta: float
    alpha: float
    lam: float
    h: float
    beta: float
    mode: str
    mse: float
    fail_count: int
    r_effective: int
    replicates: int
    base_seed: int

    @property
    def n_times_mse(self) -> float:
        return self.n * self.mse


def _cell_key(n, theta, alpha, lam, h, beta):
    return (int(n), float(theta), float(alpha), float(lam), float(h), float(beta))


@dataclass
class MseSurface:
    """Cell results keyed by (n, theta, alpha, lambda, h, beta)."""

    grid: ExperimentGrid
    cells: dict = field(default_factory=dict)

    def cell(self, n, theta, alpha, lam, h, beta=None) -> CellResult:
        beta = alpha if beta is None else beta
        key = _cell_key(n, theta, alpha, lam, h, beta)
        if key not in self.cells:
            raise MissingCellsError(f"no cell {key} in surface")
        return self.cells[key]

    def add(self, result: CellResult):
        key = _cell_key(result.n, result.theta, result.alpha, result.lam,
                        result.h, result.beta)
        self.cells[key] = result

    def to_csv(self) -> str:
        out = StringIO()
        out.write(",".join(SURFACE_COLUMNS) + "\n")
        for key in sorted(self.cells):
            c = self.cells[key]
            row = (c.n, c.theta, c.alpha, c.lam, c.h, c.beta, c.mse,
                   c.n_times_mse, c.fail_count, c.r_effective, c.base_seed)
            out.write(",".join(repr(v) if isinstance(v, float) else str(v)
                               for v in row) + "\n")
        return out.getvalue()

    def manifest(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "seed_schedule": ("PCG64(SeedSequence(base_seed, spawn_key="
                              "(n, theta_bits_hi, theta_bits_lo, replicate)))"),
            "columns": list(SURFACE_COLUMNS),
            "cells": len(self.cells),
        }

    def write(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        atomic_write_text(os.path.join(out_dir, "surface.csv"), self.to_csv())
        atomic_write_text(os.path.join(out_dir, "manifest.json"),
                          json.dumps(self.manifest(), indent=2, sort_keys=True) + "\n")


def atomic_write_text(path, text):
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# Cell runners
# ---------------------------------------------------------------------------

def _accumulate_family(n, theta, alpha, lam, cells, replicates, base_seed,
                       model, tail_eps=DEFAULT_TAIL_EPS, estimator=None):
    """Sum of squared errors per cell over replicates, with failure counts."""
    sq_sums = [0.0] * len(cells)
    r_eff = [0] * len(cells)
    fails = [0] * len(cells)
    for r in range(replicates):
        table = model.sample(theta, n, replicate_rng(base_seed, n, theta, r))
        if estimator is not None:
            try:
                estimates = [float(estimator(table))] * len(cells)
            except EmptyCellUndefinedError:
                estimates = [None] * len(cells)
        else:
            try:
                engine = _FamilyEngine(table, model, alpha, lam, tail_eps)
                fits = engine.fit_cells(cells)
                estimates = [f.theta_hat if f.converged else None for f in fits]
            except EmptyCellUndefinedError:
                estimates = [None] * len(cells)
        for i, est in enumerate(estimates):
            if est is None:
                fails[i] += 1
            else:
                sq_sums[i] += (est - theta) ** 2
                r_eff[i] += 1
    return sq_sums, r_eff, fails


def run_mse_cell(n, theta, params, mode, replicates, base_seed,
                 model=None, estimator=None, tail_eps=DEFAULT_TAIL_EPS) -> CellResult:
    """Empirical MSE of the estimator for one grid cell.

    ``estimator`` optionally overrides the fit with any callable
    table -> estimate (used for testing and for plugging in alternatives).

    Raises
    ------
    AllReplicatesFailedError
        If every replicate fails, so no MSE can be formed.
    """
    model = model if model is not None else PoissonModel()
    cell = _Cell(mode, params.h, params.beta_eff)
    sq_sums, r_eff, fails = _accumulate_family(
        n, theta, params.alpha, params.lam, [cell], replicates, base_seed,
        model, tail_eps, estimator)
    if r_eff[0] == 0:
        raise AllReplicatesFailedError(
            f"all {replicates} replicates failed for cell "
            f"(n={n}, theta={theta}, alpha={params.alpha}, lambda={params.lam}, "
            f"h={params.h}, mode={mode})")
    return CellResult(
        n=n, theta=theta, alpha=params.alpha, lam=params.lam,
        h=params.h, beta=params.beta_eff, mode=mode,
        mse=sq_sums[0] / r_eff[0], fail_count=fails[0],
        r_effective=r_eff[0], replicates=replicates, base_seed=base_seed)


def _sweep(grid: ExperimentGrid, beta_values, model, tail_eps) -> MseSurface:
    model = model if model is not None else PoissonModel()
    surface = MseSurface(grid=grid)
    for n in grid.n_values:
        for theta in grid.theta_values:
            for alpha in grid.alpha_values:
                betas = [alpha] if beta_values is None else list(beta_values)
                cells = [_Cell(grid.mode, float(h), float(b))
                         for h in grid.h_values for b in betas]
                for lam in grid.lambda_values:
                    sq, r_eff, fails = _accumulate_family(
                        n, theta, alpha, lam, cells, grid.replicates,
                        grid.base_seed, model, tail_eps)
                    for cell, s, k, f in zip(cells, sq, r_eff, fails):
                        surface.add(CellResult(
                            n=n, theta=theta, alpha=alpha, lam=lam,
                            h=cell.h, beta=cell.beta, mode=grid.mode,
                            mse=s / k if k else math.nan, fail_count=f,
                            r_effective=k, replicates=grid.replicates,
                            base_seed=grid.base_seed))
    return surface


def sweep_h(grid: ExperimentGrid, model=None, tail_eps=DEFAULT_TAIL_EPS) -> MseSurface:
    """Full MSE surface over the grid's penalty factors (beta = alpha)."""
    return _sweep(grid, None, model, tail_eps)


def sweep_beta(grid: ExperimentGrid, model=None, tail_eps=DEFAULT_TAIL_EPS) -> MseSurface:
    """MSE surface indexed additionally by the empty-cell exponent tuning.

    The beta = alpha slice coincides exactly with ``sweep_h`` because the
    seed schedule and the per-cell solves are unchanged.
    """
    if grid.beta_values is None:
        raise ValueError("grid.beta_values must be set for a beta sweep")
    return _sweep(grid, grid.beta_values, model, tail_eps)


# ---------------------------------------------------------------------------
# Surface diagnostics
# ---------------------------------------------------------------------------

def optimal_h(surface: MseSurface, n, theta, alpha, lam, beta=None):
    """Penalty factor with the smallest MSE in the cell family; ties break
    toward the smaller factor. Returns (h_opt, mse_opt)."""
    beta_eff = alpha if beta is None else beta
    family = []
    for key, cell in surface.cells.items():
        if key[:4] == (int(n), float(theta), float(alpha), float(lam)) \
                and key[5] == float(beta_eff):
            family.append((key[4], cell))
    if not family:
        raise MissingCellsError(
            f"no cells for (n={n}, theta={theta}, alpha={alpha}, lambda={lam})")
    family.sort(key=lambda item: item[0])
    best_h, best_mse = None, math.inf
    for h, cell in family:
        mse = cell.mse if cell.r_effective > 0 else math.inf
        if mse < best_mse:
            best_h, best_mse = h, mse
    if best_h is None:
        raise AllReplicatesFailedError(
            f"every penalty cell failed for (n={n}, theta={theta}, "
            f"alpha={alpha}, lambda={lam})")
    return best_h, best_mse


def relative_increase(surface: MseSurface, h_star, n, theta, alpha, lam, beta=None):
    """Relative MSE increase of the simple penalty choice h_star over the
    optimum: (mse(h_star) - mse_opt) / mse_opt. Non-negative whenever
    h_star is inside the searched family."""
    _, mse_opt = optimal_h(surface, n, theta, alpha, lam, beta)
    star = surface.cell(n, theta, alpha, lam, h_star, beta)
    if star.r_effective == 0:
        raise AllReplicatesFailedError(f"cell at h={h_star} has no surviving replicates")
    if mse_opt == 0.0:
        return 0.0 if star.mse == 0.0 else math.inf
    return (star.mse - mse_opt) / mse_opt
