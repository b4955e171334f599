"""Command-line surface: estimate, simulate, table5, verify.

Exit codes are a contract: 0 success, 1 usage or validation error,
2 divergence undefined on the data (empty cells with a non-positive data
exponent), 3 solver did not converge, 4 verification failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .datasets import fixture_names, resolve_dataset
from .divergence import DivergenceParams, derive_exponents
from .estimation import asymptotic_variance, fit
from .exceptions import DatasetParseError, EmptyCellUndefinedError, SdivestError
from .models import PoissonModel
from .oracle import run_verification
from .simulation import (
    DEFAULT_H_GRID,
    FAST_REPLICATES,
    ExperimentGrid,
    atomic_write_text,
    sweep_beta,
    sweep_h,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNDEFINED = 2
EXIT_NO_CONVERGENCE = 3
EXIT_VERIFY_FAILED = 4

TABLE5_LAMBDAS = (0.0, -0.5, -1.0, -1.5, -2.0)
TABLE5_ALPHAS = (0.0, 0.1, 0.25, 0.5)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")


def _default_seed():
    env = os.environ.get("SDIV_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            pass
    return 20177


def _get_model(name):
    if name != "poisson":
        raise SystemExit(EXIT_USAGE)
    return PoissonModel()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sdivest",
                     description="Minimum (penalized) S-divergence estimation "
                                 "for discrete models.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="fit one dataset")
    est.add_argument("--data", required=True,
                     help=f"dataset path (.csv/.json) or fixture name {fixture_names()}")
    est.add_argument("--model", default="poisson", choices=["poisson"])
    est.add_argument("--alpha", type=float, required=True)
    est.add_argument("--lambda", dest="lam", type=float, required=True)
    est.add_argument("--mode", choices=["msde", "mpsde"], default="mpsde")
    est.add_argument("--h", type=float, default=1.0, help="penalty factor (mpsde)")
    est.add_argument("--beta", type=float, default=None,
                     help="empty-cell exponent tuning (defaults to alpha)")
    est.add_argument("--init", type=float, default=None, help="solver start value")
    est.add_argument("--out", choices=["json", "csv"], default="json")

    sim = sub.add_parser("simulate", help="run an MSE sweep")
    sim.add_argument("--grid-file", default=None,
                     help="JSON file with the full grid (overrides inline flags)")
    sim.add_argument("--n-values", type=_int_list, default=(10,))
    sim.add_argument("--theta-values", type=_float_list, default=(5.0,))
    sim.add_argument("--alpha-values", type=_float_list, default=(0.0,))
    sim.add_argument("--lambda-values", type=_float_list, default=(0.0,))
    sim.add_argument("--h-values", type=_float_list, default=DEFAULT_H_GRID)
    sim.add_argument("--beta-values", type=_float_list, default=None)
    sim.add_argument("--mode", choices=["msde", "mpsde"], default="mpsde")
    sim.add_argument("--replicates", type=int, default=1000)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--fast", action="store_true",
                     help=f"replicates={FAST_REPLICATES} for quick runs")
    sim.add_argument("--out-dir", required=True)

    tab = sub.add_parser("table5", help="real-data estimate table over the "
                                        "tuning grid, one column per penalty")
    tab.add_argument("--data", default="drosophila-day177")
    tab.add_argument("--h-list", type=_float_list, default=(0.5, 1.0))
    tab.add_argument("--out", default=None, help="CSV path (stdout when omitted)")

    ver = sub.add_parser("verify", help="cross-check fits against the "
                                        "brute-force oracle")
    ver.add_argument("--cases", type=int, default=100)
    ver.add_argument("--seed", type=int, default=None)
    ver.add_argument("--report", default=None, help="JSON report path (stdout when omitted)")
    ver.add_argument("--perturb", type=float, default=0.0,
                     help="shift fits before comparison (negative control)")
    return parser


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_estimate(args) -> int:
    model = _get_model(args.model)
    try:
        name, table = resolve_dataset(args.data)
    except (DatasetParseError, OSError) as err:
        print(f"sdivest: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        params = DivergenceParams(args.alpha, args.lam, h=args.h, beta=args.beta)
    except ValueError as err:
        print(f"sdivest: {err}", file=sys.stderr)
        return EXIT_USAGE

    try:
        result = fit(table, model, params, mode=args.mode, init=args.init)
    except EmptyCellUndefinedError as err:
        print(f"sdivest: {err}", file=sys.stderr)
        return EXIT_UNDEFINED

    av = asymptotic_variance(model, result.theta_hat, params.alpha)
    se = math.sqrt(float(av.sandwich[0, 0]) / table.n)
    data_exp, model_exp, _ = derive_exponents(params.alpha, params.lam)
    payload = {
        "data": name,
        "n": table.n,
        "mode": args.mode,
        "alpha": params.alpha,
        "lambda": params.lam,
        "h": params.h,
        "beta": params.beta_eff,
        "data_exp": data_exp,
        "model_exp": model_exp,
        "theta_hat": result.theta_hat,
        "objective": result.objective,
        "residual_norm": result.residual_norm,
        "iterations": result.iterations,
        "converged": result.converged,
        "method": result.method,
        "se_sandwich": se,
    }
    if args.out == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        keys = list(payload)
        print(",".join(keys))
        print(",".join(repr(payload[k]) if isinstance(payload[k], float)
                       else str(payload[k]) for k in keys))
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def _grid_from_args(args) -> ExperimentGrid:
    seed = args.seed if args.seed is not None else _default_seed()
    replicates = FAST_REPLICATES if args.fast else args.replicates
    if args.grid_file:
        with open(args.grid_file) as fh:
            spec = json.load(fh)
        spec.setdefault("base_seed", seed)
        if args.fast:
            spec["replicates"] = FAST_REPLICATES
        return ExperimentGrid(**spec)
    return ExperimentGrid(
        n_values=args.n_values, theta_values=args.theta_values,
        alpha_values=args.alpha_values, lambda_values=args.lambda_values,
        h_values=args.h_values, beta_values=args.beta_values,
        replicates=replicates, base_seed=seed, mode=args.mode)


def _cmd_simulate(args) -> int:
    try:
        grid = _grid_from_args(args)
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as err:
        print(f"sdivest: invalid grid: {err}", file=sys.stderr)
        return EXIT_USAGE
    surface = sweep_beta(grid) if grid.beta_values is not None else sweep_h(grid)
    surface.write(args.out_dir)
    print(f"wrote {len(surface.cells)} cells to {args.out_dir}/surface.csv")
    return EXIT_OK


def _cmd_table5(args) -> int:
    model = _get_model("poisson")
    try:
        name, table = resolve_dataset(args.data)
    except (DatasetParseError, OSError) as err:
        print(f"sdivest: {err}", file=sys.stderr)
        return EXIT_USAGE
    h_list = args.h_list
    lines = ["lambda,alpha,natural_weight," + "msde," +
             ",".join(f"mpsde_h{h:g}" for h in h_list)]
    for lam in TABLE5_LAMBDAS:
        for alpha in TABLE5_ALPHAS:
            data_exp, _, _ = derive_exponents(alpha, lam)
            natural = "inf" if abs(data_exp) < 1e-12 else repr(1.0 / data_exp)
            row = [repr(lam), repr(alpha), natural]
            try:
                res = fit(table, model, DivergenceParams(alpha, lam), mode="msde")
                row.append(f"{res.theta_hat:.4f}")
            except EmptyCellUndefinedError:
                row.append("--")
            for h in h_list:
                res = fit(table, model, DivergenceParams(alpha, lam, h=h),
                          mode="mpsde")
                row.append(f"{res.theta_hat:.4f}")
            lines.append(",".join(row))
    text = "\n".join(lines) + "\n"
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    report = run_verification(cases=args.cases, seed=seed, perturb=args.perturb)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.report:
        atomic_write_text(args.report, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report["pass"] else EXIT_VERIFY_FAILED


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "estimate":
            return _cmd_estimate(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "table5":
            return _cmd_table5(args)
        if args.command == "verify":
            return _cmd_verify(args)
    except EmptyCellUndefinedError as err:
        print(f"sdivest: {err}", file=sys.stderr)
        return EXIT_UNDEFINED
    except SdivestError as err:
        print(f"sdivest: {err}", file=sys.stderr)
        return EXIT_USAGE
    raise SystemExit(EXIT_USAGE)


if __name__ == "__main__":
    raise SystemExit(main())
