"""Command-line interface: simulate, fit, diagnose, forecast, and mc subcommands.

Exit codes: 0 on success, 2 for input or configuration errors, 3 when
estimation fails.  Human diagnostics go to stderr; files and stdout carry
machine-readable output only.  Primary output files are byte-deterministic
given the configuration; timing lives in the run manifest (embedded in fit
result documents, written as a `.manifest.json` sidecar elsewhere).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, io
from .diagnostics import acf, one_step_forecasts, pearson_residuals
from .errors import (
    DataFormatError,
    EstimationError,
    IllPosedRegimeError,
    NumericObjectiveError,
    SetparError,
)
from .estimate import FitConfig, fit, fit_par, fit_setpar_b2_zero
from .mc import McDesign, run_mc
from .model import DEFAULT_BURN_IN, intensity_path, simulate

MODELS = ("par", "setpar", "setpar-b2zero")


def _manifest(subcommand: str, configuration: dict, digests: dict, seed, started: float) -> dict:
    return {
        "subcommand": subcommand,
        "configuration": configuration,
        "input_digests": digests,
        "seed": seed,
        "artifact_version": __version__,
        "wall_clock_seconds": time.perf_counter() - started,
    }


def _write_manifest_sidecar(output_path, manifest: dict) -> None:
    io.dump_document(str(output_path) + ".manifest.json", manifest)


def _parse_thresholds(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.replace(",", " ").split())
    except ValueError as exc:
        raise DataFormatError(f"--thresholds must be a list of integers, got {text!r}") from exc


def _require_field(config: dict, field: str):
    if field not in config:
        raise DataFormatError(f"missing config field '{field}'")
    return config[field]


def cmd_simulate(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config = io.read_toml(args.config)
    params = io.params_from_mapping(_require_field(config, "params"))
    n = _require_field(config, "n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise DataFormatError(f"config field 'n' must be a positive integer, got {n!r}")
    seed = args.seed if args.seed is not None else config.get("seed")
    if seed is None:
        raise DataFormatError("missing config field 'seed' (or pass --seed)")
    burn_in = config.get("burn_in", DEFAULT_BURN_IN)
    if not isinstance(burn_in, int) or isinstance(burn_in, bool) or burn_in < 0:
        raise DataFormatError(f"config field 'burn_in' must be a nonnegative integer, got {burn_in!r}")
    lambda_init = args.lambda_init if args.lambda_init is not None else config.get("lambda_init")
    if lambda_init is not None and not (isinstance(lambda_init, (int, float)) and lambda_init > 0):
        raise DataFormatError(f"config field 'lambda_init' must be > 0, got {lambda_init!r}")

    series, lam = simulate(params, n=n, seed=int(seed), burn_in=burn_in, lambda_init=lambda_init)
    io.write_series_csv(args.output, series, lam.values)
    manifest = _manifest(
        "simulate",
        {
            "config_file": str(args.config),
            "n": n,
            "seed": int(seed),
            "burn_in": burn_in,
            "lambda_init": lambda_init,
            "params": {
                "threshold": params.r,
                "lower": {"d": params.lower.d, "a": params.lower.a, "b": params.lower.b},
                "upper": {"d": params.upper.d, "a": params.upper.a, "b": params.upper.b},
            },
        },
        {"config": io.file_digest(args.config)},
        int(seed),
        started,
    )
    _write_manifest_sidecar(args.output, manifest)
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config_map: dict = {}
    digests = {"data": io.file_digest(args.data)} if Path(args.data).exists() else {}
    if args.config is not None:
        config_map = io.read_toml(args.config)
        digests["config"] = io.file_digest(args.config)
    series = io.read_counts(args.data, column=args.column)

    settings = io.fit_settings_from_mapping(config_map)
    model = args.model or config_map.get("model", "setpar")
    if model not in MODELS:
        raise DataFormatError(f"config field 'model' must be one of {MODELS}, got {model!r}")
    if args.alpha1 is not None:
        settings["alpha1"] = args.alpha1
    if args.alpha2 is not None:
        settings["alpha2"] = args.alpha2
    if args.thresholds is not None:
        settings["thresholds"] = _parse_thresholds(args.thresholds)
    if args.lambda_init is not None:
        settings["lambda_init"] = args.lambda_init
    try:
        fit_config = FitConfig(**settings)
    except ValueError as exc:
        raise DataFormatError(str(exc)) from exc

    runner = {"par": fit_par, "setpar": fit, "setpar-b2zero": fit_setpar_b2_zero}[model]
    result = runner(series, fit_config)

    params = result.params
    lam_path = intensity_path(series, params, result.lambda_init).values
    residuals = pearson_residuals(series, params, result.lambda_init)
    manifest = _manifest(
        "fit",
        {
            "data_file": str(args.data),
            "config_file": None if args.config is None else str(args.config),
            "model": model,
            "alpha1": fit_config.alpha1,
            "alpha2": fit_config.alpha2,
            "thresholds": None if fit_config.thresholds is None else list(fit_config.thresholds),
            "lambda_init": result.lambda_init,
        },
        digests,
        None,
        started,
    )
    io.dump_document(args.output, io.fit_result_to_document(result, lam_path, residuals, manifest))
    return 0


def cmd_diagnose(args: argparse.Namespace) -> int:
    doc = io.load_document(args.fit_result)
    series = io.read_counts(args.data, column=args.column)
    params, lambda_init, _model = io.params_from_document(doc)
    if "n" in doc and int(doc["n"]) != len(series):
        raise DataFormatError(
            f"fit result was computed on n={doc['n']} observations but the data file has {len(series)}"
        )
    max_lag = min(args.max_lag, len(series) - 1)
    if max_lag < 1:
        raise DataFormatError("series is too short for autocorrelation diagnostics")

    report = pearson_residuals(series, params, lambda_init)
    lam = intensity_path(series, params, lambda_init).values
    prefix = Path(args.output_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)

    io.write_table_csv(
        f"{prefix}residuals.csv",
        ["t", "observed", "fitted", "residual"],
        [
            [t + 1, int(series.values[t]), lam[t], report.residuals[t]]
            for t in range(len(series))
        ],
    )
    io.write_table_csv(
        f"{prefix}residual_moments.csv",
        ["mean", "std_error", "skewness", "excess_kurtosis"],
        [[report.mean, report.std_error, report.skewness, report.excess_kurtosis]],
    )
    resid_acf = acf(report.residuals, max_lag)
    io.write_table_csv(
        f"{prefix}residual_acf.csv",
        ["lag", "acf", "band"],
        [[int(h), resid_acf.values[h], resid_acf.band] for h in resid_acf.lags],
    )
    data_acf = acf(series.values.astype(float), max_lag)
    io.write_table_csv(
        f"{prefix}data_acf.csv",
        ["lag", "acf", "band"],
        [[int(h), data_acf.values[h], data_acf.band] for h in data_acf.lags],
    )
    io.write_table_csv(
        f"{prefix}fitted.csv",
        ["t", "observed", "fitted"],
        [[t + 1, int(series.values[t]), lam[t]] for t in range(len(series))],
    )
    return 0


def cmd_forecast(args: argparse.Namespace) -> int:
    doc = io.load_document(args.fit_result)
    history = io.read_counts(args.history, column=args.column)
    future = io.read_counts(args.future, column=args.column)
    params, lambda_init, model = io.params_from_document(doc)

    forecasts = one_step_forecasts(history, params, lambda_init, future)
    errors = future.values - forecasts
    mse = float(np.mean(errors**2))
    n_hist = len(history)
    io.write_table_csv(
        args.output,
        ["step", "t", "observed", "forecast", "error"],
        [
            [i + 1, n_hist + i + 1, int(future.values[i]), forecasts[i], errors[i]]
            for i in range(len(future))
        ],
    )
    io.dump_document(
        str(args.output) + ".metrics.json",
        {"model": model, "horizon": len(future), "mse": mse},
    )
    return 0


def _mc_rows(summary, truth) -> list[list]:
    rows: list[list] = []
    for cell in summary.cells:
        if not cell.valid:
            rows.append([cell.n, "invalid_cell", None, None, None, None, None, None, None])
            rows.append([cell.n, "n_failed", cell.n_failed, None, None, None, None, None, None])
            continue
        rows.append([cell.n, "mean_estimate", *list(cell.mean_theta)])
        if cell.ncov_diag is None:
            rows.append([cell.n, "n_cov", None, None, None, None, None, None, None])
        else:
            rows.append([cell.n, "n_cov", *list(cell.ncov_diag)])
        rows.append([cell.n, "mean_ginv_diag", None, *list(cell.mean_ginv_diag)])
        rows.append([cell.n, "frac_r_eq_true", cell.frac_r_correct, None, None, None, None, None, None])
        rows.append([cell.n, "n_failed", cell.n_failed, None, None, None, None, None, None])
    return rows


def cmd_mc(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config = io.read_toml(args.config)
    truth = io.params_from_mapping(_require_field(config, "truth"), context="truth")
    replications = _require_field(config, "replications")
    sample_sizes = _require_field(config, "sample_sizes")
    if not isinstance(replications, int) or isinstance(replications, bool) or replications < 1:
        raise DataFormatError(
            f"config field 'replications' must be a positive integer, got {replications!r}"
        )
    if not isinstance(sample_sizes, list) or not sample_sizes or not all(
        isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in sample_sizes
    ):
        raise DataFormatError("config field 'sample_sizes' must be a list of positive integers")
    base_seed = args.seed if args.seed is not None else config.get("base_seed")
    if base_seed is None:
        raise DataFormatError("missing config field 'base_seed' (or pass --seed)")
    burn_in = config.get("burn_in", DEFAULT_BURN_IN)
    try:
        fit_config = FitConfig(**io.fit_settings_from_mapping(config.get("fit", {})))
    except ValueError as exc:
        raise DataFormatError(str(exc)) from exc
    workers = args.workers if args.workers is not None else config.get("workers", 1)
    if not isinstance(workers, int) or isinstance(workers, bool) or workers < 1:
        raise DataFormatError(f"worker count must be a positive integer, got {workers!r}")

    design = McDesign(
        truth=truth,
        sample_sizes=tuple(sample_sizes),
        replications=replications,
        base_seed=int(base_seed),
        fit_config=fit_config,
        burn_in=burn_in,
    )
    summary = run_mc(design, workers=workers)
    header = ["n", "statistic", "r", "d1", "a1", "b1", "d2", "a2", "b2"]
    io.write_table_csv(args.output, header, _mc_rows(summary, truth))
    manifest = _manifest(
        "mc",
        {
            "config_file": str(args.config),
            "replications": replications,
            "sample_sizes": list(sample_sizes),
            "base_seed": int(base_seed),
            "burn_in": burn_in,
            "workers": workers,
            "design_digest": summary.design_digest,
        },
        {"config": io.file_digest(args.config)},
        int(base_seed),
        started,
    )
    _write_manifest_sidecar(args.output, manifest)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="setpar",
        description="Threshold Poisson autoregression tools for count time series",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_sim = sub.add_parser("simulate", help="simulate a path from a parameter config")
    p_sim.add_argument("config", help="TOML config with n, seed, burn_in and a [params] table")
    p_sim.add_argument("-o", "--output", required=True, help="output CSV (t,y,lambda)")
    p_sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_sim.add_argument("--lambda-init", type=float, default=None, dest="lambda_init")
    p_sim.set_defaults(func=cmd_simulate)

    p_fit = sub.add_parser("fit", help="fit a model to a counts file")
    p_fit.add_argument("data", help="counts file (one integer per line, optional header)")
    p_fit.add_argument("-c", "--config", default=None, help="optional TOML fit config")
    p_fit.add_argument("-o", "--output", required=True, help="output result document (JSON)")
    p_fit.add_argument("--model", choices=MODELS, default=None)
    p_fit.add_argument("--alpha1", type=float, default=None)
    p_fit.add_argument("--alpha2", type=float, default=None)
    p_fit.add_argument("--thresholds", default=None, help="explicit candidate list, e.g. '5,6,7'")
    p_fit.add_argument("--lambda-init", type=float, default=None, dest="lambda_init")
    p_fit.add_argument("--column", default=None, help="column name when the data file has several")
    p_fit.set_defaults(func=cmd_fit)

    p_diag = sub.add_parser("diagnose", help="residual and ACF tables for a fitted model")
    p_diag.add_argument("fit_result", help="fit result document from the fit subcommand")
    p_diag.add_argument("data", help="counts file the model was fitted on")
    p_diag.add_argument("-o", "--output-prefix", required=True, dest="output_prefix")
    p_diag.add_argument("--max-lag", type=int, default=20, dest="max_lag")
    p_diag.add_argument("--column", default=None)
    p_diag.set_defaults(func=cmd_diagnose)

    p_fc = sub.add_parser("forecast", help="one-step forecasts over a holdout horizon")
    p_fc.add_argument("fit_result", help="fit result document")
    p_fc.add_argument("history", help="counts file the model was fitted on")
    p_fc.add_argument("future", help="counts file with the holdout observations")
    p_fc.add_argument("-o", "--output", required=True, help="output CSV of per-step forecasts")
    p_fc.add_argument("--column", default=None)
    p_fc.set_defaults(func=cmd_forecast)

    p_mc = sub.add_parser("mc", help="Monte Carlo replication study")
    p_mc.add_argument("config", help="TOML design config with [truth] and study settings")
    p_mc.add_argument("-o", "--output", required=True, help="output CSV of cell summaries")
    p_mc.add_argument("--workers", type=int, default=None)
    p_mc.add_argument("--seed", type=int, default=None, help="override the base seed")
    p_mc.set_defaults(func=cmd_mc)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (EstimationError, IllPosedRegimeError, NumericObjectiveError) as exc:
        print(f"setpar {args.subcommand}: estimation failed: {exc}", file=sys.stderr)
        return 3
    except (DataFormatError, SetparError, ValueError, OSError) as exc:
        print(f"setpar {args.subcommand}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
