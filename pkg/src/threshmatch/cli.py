"""Command-line front end.

Four subcommands -- ``estimate``, ``bootstrap``, ``ite``, ``simulate`` --
wrap the library with CSV input and JSON output on stdout.  Every run
embeds a manifest (subcommand, flags, seed, version, input digest, wall
time) and is bit-reproducible from the manifest's flags; only the recorded
duration varies between identical runs.

Exit codes: 0 success; 2 input validation; 3 numeric failure;
4 bootstrap failure budget exceeded.
"""

from __future__ import annotations

import argparse
import csv as _csv
import hashlib
import json
import sys
import time

import numpy as np

from . import __version__
from .att import estimate_att, estimate_att_crossfit
from .bootstrap import bootstrap_att
from .data_model import (
    ColumnSpec,
    ObservationSet,
    _parse_cell,
    load_csv,
    split_three_way,
    treatment_mask,
    write_csv,
)
from .errors import (
    InputError,
    MissingColumn,
    NumericError,
    ParseError,
    StructuralError,
    ThreshmatchError,
    TooManyFailures,
)
from .ite import SplineBasisSpec, fit_ite, predict_ite_batch, save_ite_model
from .residualize import residuals_eta
from .rng import derive_seed
from .simulate import (
    X_AND_ETA,
    X_ONLY,
    DgpConfig,
    generate,
    monte_carlo_att,
    monte_carlo_ite,
)

GEN_COLUMNS = ColumnSpec(
    y_col="y", q_col="q", x_cols=["x1", "x2", "x3"], z_cols=["x1", "x2", "x3", "x4"], tau0=0.0
)

_KIND_BY_FLAG = {"x-only": X_ONLY, "x-and-eta": X_AND_ETA}


def _comma_list(text: str) -> list[str]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list of column names")
    return items


def _comma_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated list of integers")


def _u64(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an unsigned integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def _bool_flag(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _manifest(args: argparse.Namespace, started: float) -> dict:
    flags = {k: v for k, v in vars(args).items() if k not in ("func",)}
    for key, value in flags.items():
        if isinstance(value, tuple):
            flags[key] = list(value)
    manifest = {
        "subcommand": args.subcommand,
        "flags": flags,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "input_digest": _sha256(args.data) if getattr(args, "data", None) else None,
        "duration_s": time.perf_counter() - started,
    }
    return manifest


def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")


def _load(args: argparse.Namespace) -> ObservationSet:
    spec = ColumnSpec(
        y_col=args.y, q_col=args.q, x_cols=args.x, z_cols=args.z, tau0=args.tau
    )
    obs = load_csv(args.data, spec)
    if getattr(args, "add_intercept_z", False):
        obs = obs.with_z_intercept()
    return obs


def _add_estimate_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, help="input CSV path")
    parser.add_argument("--y", required=True, help="outcome column")
    parser.add_argument("--q", required=True, help="score column")
    parser.add_argument("--x", required=True, type=_comma_list, help="outcome covariate columns (comma-separated)")
    parser.add_argument("--z", required=True, type=_comma_list, help="score covariate columns (comma-separated; may overlap --x)")
    parser.add_argument("--tau", required=True, type=float, help="treatment threshold (score >= tau is treated)")
    parser.add_argument("--seed", type=_u64, default=0, help="master seed for the split shuffle and all derived streams")
    parser.add_argument("--add-intercept-z", action="store_true", help="append a constant column to the score covariates")


def cmd_estimate(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    obs = _load(args)
    mask = treatment_mask(obs)
    if args.crossfit:
        cf = estimate_att_crossfit(obs, seed=args.seed)
        first = cf.rotations[0]
        theta = cf.theta_cf
        extra = {"theta_rotations": [r.theta_hat for r in cf.rotations]}
    else:
        splits = split_three_way(obs.n, seed=args.seed, shuffle=True)
        first = estimate_att(obs, splits)
        theta = first.theta_hat
        extra = {}
    payload = {
        "theta_hat": theta,
        "beta_hat": [float(v) for v in first.beta.beta_hat],
        "gamma_hat": [float(v) for v in first.gamma.gamma_hat],
        "n": obs.n,
        "n_treated": int(mask.sum()),
        "n_control": int((~mask).sum()),
        **extra,
        "manifest": _manifest(args, started),
    }
    _emit(payload)
    return 0


def cmd_bootstrap(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    obs = _load(args)
    if args.crossfit:
        theta = estimate_att_crossfit(obs, seed=args.seed).theta_cf
    else:
        splits = split_three_way(obs.n, seed=args.seed, shuffle=True)
        theta = estimate_att(obs, splits).theta_hat
    result = bootstrap_att(obs, b=args.b, level=args.level, seed=args.seed, crossfit=args.crossfit)
    payload = {
        "theta_hat": theta,
        "sigma2_hat": result.sigma2_hat,
        "ci": [result.ci_low, result.ci_high],
        "level": result.level,
        "b": result.b_requested,
        "b_failed": result.b_failed,
        "manifest": _manifest(args, started),
    }
    _emit(payload)
    return 0


def _read_grid(path: str, x_cols: list[str], include_eta: bool) -> tuple[list[list[str]], np.ndarray]:
    """Read a prediction-grid CSV: the x columns plus 'eta_hat' when needed."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = _csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        wanted = list(x_cols) + (["eta_hat"] if include_eta else [])
        for name in wanted:
            if name not in header:
                raise MissingColumn(name)
        pos = [header.index(name) for name in wanted]
        rows = [raw for raw in reader if raw and any(c.strip() for c in raw)]
    values = np.empty((len(rows), len(wanted)))
    for r, raw in enumerate(rows):
        for c, p in enumerate(pos):
            if p >= len(raw):
                raise ParseError(r, wanted[c], "<missing>")
            values[r, c] = _parse_cell(raw[p], r, wanted[c])
    return rows, values


def cmd_ite(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    obs = _load(args)
    splits = split_three_way(obs.n, seed=args.seed, shuffle=True)
    est = estimate_att(obs, splits)
    eta_hat = np.full(obs.n, np.nan)
    idx23 = np.concatenate([splits.i2, splits.i3])
    eta_hat[idx23] = residuals_eta(est.gamma, obs, idx23)
    spec = SplineBasisSpec(df_grid=args.df_grid, include_eta=args.include_eta)
    model = fit_ite(
        obs, splits, est.beta, est.matches, eta_hat, spec, cv_seed=derive_seed(args.seed, 1)
    )
    save_ite_model(model, args.model_out)

    predictions_path = None
    if args.predict_grid:
        _, grid = _read_grid(args.predict_grid, args.x, args.include_eta)
        preds = predict_ite_batch(model, grid)
        predictions_path = args.predictions_out or args.model_out + ".predictions.csv"
        with open(predictions_path, "w", encoding="utf-8", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(list(args.x) + (["eta_hat"] if args.include_eta else []) + ["alpha_hat"])
            for row, pred in zip(grid, preds):
                writer.writerow([repr(float(v)) for v in row] + [repr(float(pred))])

    payload = {
        "theta_hat": est.theta_hat,
        "chosen_df": model.basis.df,
        "training_mse": model.training_mse,
        "n_train": est.n_treated_i3,
        "model_out": args.model_out,
        "predictions_out": predictions_path,
        "manifest": _manifest(args, started),
    }
    _emit(payload)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    kind = _KIND_BY_FLAG[args.ite_kind]
    if args.mode == "gen":
        if not args.out:
            raise InputError("--mode gen requires --out PATH")
        obs = generate(DgpConfig(n=args.n, seed=args.seed, ite_kind=kind))
        write_csv(args.out, obs, GEN_COLUMNS)
        payload = {
            "written": args.out,
            "n": obs.n,
            "columns": ["y", "x1", "x2", "x3", "x4", "q"],
            "manifest": _manifest(args, started),
        }
    elif args.mode == "mc-att":
        report = monte_carlo_att(
            DgpConfig(n=args.n, seed=0, ite_kind=kind),
            reps=args.reps,
            crossfit=args.crossfit,
            master_seed=args.seed,
        )
        if args.out:
            report.write_histogram_csv(args.out)
        payload = {
            "report": report.to_json_dict(),
            "histogram_out": args.out,
            "manifest": _manifest(args, started),
        }
    else:  # mc-ite
        spec = SplineBasisSpec(df_grid=args.df_grid, include_eta=args.include_eta)
        seeds = [derive_seed(args.seed, k) for k in range(args.reps)]
        mses = monte_carlo_ite(DgpConfig(n=args.n, seed=0, ite_kind=kind), spec, seeds)
        payload = {
            "mses": mses,
            "median_mse": float(np.median(mses)),
            "manifest": _manifest(args, started),
        }
    _emit(payload)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="threshmatch",
        description="ATT/ITE estimation for threshold-allocated treatments",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_est = sub.add_parser("estimate", help="point estimate of the ATT")
    _add_estimate_flags(p_est)
    p_est.add_argument("--crossfit", action="store_true", help="average the three role rotations")
    p_est.set_defaults(func=cmd_estimate)

    p_boot = sub.add_parser("bootstrap", help="bootstrap variance and confidence interval")
    _add_estimate_flags(p_boot)
    p_boot.add_argument("--crossfit", action="store_true")
    p_boot.add_argument("--b", required=True, type=int, help="number of bootstrap replicates")
    p_boot.add_argument("--level", type=float, default=0.95, help="confidence level in (0,1)")
    p_boot.set_defaults(func=cmd_bootstrap)

    p_ite = sub.add_parser("ite", help="fit the individual-effect surface")
    _add_estimate_flags(p_ite)
    p_ite.add_argument("--df-grid", type=_comma_ints, default=(3, 4, 5, 6, 8, 10), help="candidate degrees of freedom (comma-separated)")
    p_ite.add_argument("--include-eta", type=_bool_flag, default=False, help="regress on the score residual as well as x")
    p_ite.add_argument("--model-out", required=True, help="path for the serialized model")
    p_ite.add_argument("--predict-grid", default=None, help="CSV of covariate points to evaluate (x columns, plus eta_hat when --include-eta true)")
    p_ite.add_argument("--predictions-out", default=None, help="path for grid predictions (default: MODEL_OUT.predictions.csv)")
    p_ite.set_defaults(func=cmd_ite)

    p_sim = sub.add_parser("simulate", help="synthetic generation and Monte-Carlo checks")
    p_sim.add_argument("--mode", required=True, choices=["mc-att", "mc-ite", "gen"])
    p_sim.add_argument("--n", required=True, type=int, help="rows per dataset")
    p_sim.add_argument("--reps", type=int, default=100, help="Monte-Carlo replicates")
    p_sim.add_argument("--seed", type=_u64, default=0, help="master seed")
    p_sim.add_argument("--crossfit", action="store_true")
    p_sim.add_argument("--ite-kind", choices=sorted(_KIND_BY_FLAG), default="x-and-eta", help="effect surface of the generator")
    p_sim.add_argument("--include-eta", type=_bool_flag, default=None, help="mc-ite: regress on the score residual (default: matches --ite-kind)")
    p_sim.add_argument("--df-grid", type=_comma_ints, default=(3, 4, 5, 6, 8, 10))
    p_sim.add_argument("--out", default=None, help="gen: CSV path; mc-att: histogram CSV path")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand == "simulate" and getattr(args, "include_eta", None) is None:
        args.include_eta = args.ite_kind == "x-and-eta"
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TooManyFailures as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (NumericError, StructuralError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ThreshmatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
