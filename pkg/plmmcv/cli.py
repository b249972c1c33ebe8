"""
Command-line interface: `plmmcv fit`, `plmmcv cv`, `plmmcv predict` and
`plmmcv bench`.

Every command writes its outputs plus a `manifest.json` into `--out`. Exit
codes are 0 on success, 2 on invalid input or usage and 3 on numerical
failure; failures also print one JSON object to stderr.
"""

import argparse
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np
import polars as pl

from plmmcv import __version__
from plmmcv.data_sources import load_dataset, load_features
from plmmcv.models import CvResult, PlmmModel, RunManifest, standardize
from plmmcv.services import (
    CrossValidator,
    ScenarioConfig,
    assign_folds,
    bundled_scenarios,
    compute_kinship,
    eigendecompose,
    fit_plmm,
    load_spectrum,
    predict_blup,
    predict_linear,
    run_benchmark,
    save_spectrum,
)
from plmmcv.utils import (
    CVStrategy,
    DataValidationError,
    LambdaChoice,
    NumericalError,
    PlmmError,
    PredictionMode,
    SolverConfig,
    array_checksum,
    default_thread_count,
    file_checksum,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def configure_logging(verbosity: int) -> None:
    """
    Send log records to stderr: WARNING by default, INFO with -v, DEBUG with -vv.

    Args:
        verbosity (int): Number of -v flags.
    """
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _common_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--out", type=Path, required=True, help="Output directory.")
    parent.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging.")
    return parent


def _data_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--data", type=Path, required=True, help="Delimited file with a header row.")
    parent.add_argument("--delimiter", default=",", help="Field separator; '\\t' for tabs.")
    parent.add_argument("--id-column", default=None, help="Column holding row labels.")
    return parent


def _solver_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("solver")
    group.add_argument("--eta", type=float, default=None, help="Fix η instead of estimating it.")
    group.add_argument("--eta-max", type=float, default=0.99)
    group.add_argument("--eta-grid", type=int, default=100, help="Grid points of the η search.")
    group.add_argument("--n-lambda", type=int, default=100)
    group.add_argument("--min-ratio", type=float, default=None, help="Smallest-to-largest penalty ratio.")
    group.add_argument("--tol", type=float, default=1e-7)
    group.add_argument("--max-iter", type=int, default=100_000)
    return parent


def build_parser() -> argparse.ArgumentParser:
    """
    Build the argument parser with its four subcommands.

    Returns:
        argparse.ArgumentParser: The parser.
    """
    parser = argparse.ArgumentParser(prog="plmmcv", description="Penalized linear mixed models with cross-validation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_parent()
    data = _data_parent()
    solver = _solver_parent()

    fit = subparsers.add_parser("fit", parents=[common, data, solver], help="Fit the regularization path.")
    fit.add_argument("--outcome", required=True, help="Outcome column.")
    fit.add_argument("--coefficients", action="store_true", help="Add one column per feature to path.csv.")
    fit.add_argument("--spectrum-cache", type=Path, default=None, help="'.npz' file reused when it matches the data, written otherwise.")
    fit.set_defaults(handler=cmd_fit)

    cv = subparsers.add_parser("cv", parents=[common, data, solver], help="Cross-validate the penalty.")
    cv.add_argument("--outcome", required=True, help="Outcome column.")
    cv.add_argument("--k", type=int, default=5, help="Number of folds.")
    cv.add_argument("--seed", type=int, default=0, help="Seed of the fold assignment.")
    cv.add_argument("--strategy", choices=[*CVStrategy.values(), "all"], default=CVStrategy.FULL.value)
    cv.add_argument("--threads", type=int, default=None, help="Worker count; defaults to PLMMCV_THREADS or 1.")
    cv.add_argument("--model", type=Path, default=None, help="Model file from 'fit' on the same data; receives the selected penalties.")
    cv.set_defaults(handler=cmd_cv)

    predict = subparsers.add_parser("predict", parents=[common, data], help="Predict new rows.")
    predict.add_argument("--model", type=Path, required=True, help="Model file from 'fit'.")
    predict.add_argument("--lambda", dest="lambda_", default=LambdaChoice.MIN.value, help="'min', '1se' or a path index.")
    predict.add_argument("--strategy", choices=CVStrategy.values(), default=CVStrategy.FULL.value, help="Which stored selection 'min'/'1se' refer to.")
    predict.add_argument("--mode", choices=PredictionMode.values(), default=PredictionMode.BLUP.value)
    predict.set_defaults(handler=cmd_predict)

    bench = subparsers.add_parser("bench", parents=[common], help="Run a simulation scenario.")
    bench.add_argument("--scenario", required=True, help=f"Scenario JSON file or bundled name ({', '.join(bundled_scenarios())}).")
    bench.add_argument("--n-reps", type=int, default=None, help="Override the replicate count.")
    bench.add_argument("--seed", type=int, default=None, help="Override the base seed.")
    bench.add_argument("--threads", type=int, default=None, help="Replicates run concurrently; defaults to PLMMCV_THREADS or 1.")
    bench.set_defaults(handler=cmd_bench)

    return parser


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(
        eta=args.eta,
        eta_max=args.eta_max,
        eta_grid=args.eta_grid,
        n_lambda=args.n_lambda,
        min_ratio=args.min_ratio,
        tol=args.tol,
        max_iter=args.max_iter,
    )


def _threads(args: argparse.Namespace) -> int:
    return default_thread_count() if args.threads is None else args.threads


def _manifest(args: argparse.Namespace) -> RunManifest:
    arguments = {k: v for k, v in vars(args).items() if k != "handler"}
    return RunManifest(command=args.command, args=arguments, version=__version__)


def _write_json(path: Path, payload: dict[str, Any]) -> Path:
    path.write_text(json.dumps(payload, indent=2))
    return path


def path_table(model: PlmmModel, coefficients: bool = False) -> pl.DataFrame:
    """
    Summarize a fitted path, one row per penalty value.

    Args:
        model (PlmmModel): The fitted model.
        coefficients (bool): Add a column 'beta[name]' per feature with its original-scale coefficient.

    Returns:
        pl.DataFrame: lambda_index, lambda, nvar, intercept and, optionally, the coefficients.
    """
    columns: dict[str, Any] = {
        "lambda_index": np.arange(model.n_lambda),
        "lambda": model.lambdas,
        "nvar": model.nvar,
        "intercept": model.intercepts,
    }
    if coefficients:
        for j, name in enumerate(model.feature_names):
            columns[f"beta[{name}]"] = model.beta_path[j]
    return pl.DataFrame(columns)


def curve_table(results: dict[CVStrategy, CvResult]) -> pl.DataFrame:
    """
    Stack cross-validation curves of several strategies.

    Args:
        results (dict[CVStrategy, CvResult]): One result per strategy.

    Returns:
        pl.DataFrame: strategy, lambda_index, lambda, cve, cvse and nvar per row.
    """
    frames = [
        pl.DataFrame(
            {
                "strategy": [strategy.value] * len(result.lambdas),
                "lambda_index": np.arange(len(result.lambdas)),
                "lambda": result.lambdas,
                "cve": result.cve,
                "cvse": result.cvse,
                "nvar": result.nvar,
            }
        )
        for strategy, result in results.items()
    ]
    return pl.concat(frames)


def cmd_fit(args: argparse.Namespace) -> RunManifest:
    """
    Fit the regularization path and write 'model.json', 'model.npz' and 'path.csv'.

    Args:
        args (argparse.Namespace): Parsed arguments.

    Returns:
        RunManifest: The run record.
    """
    manifest = _manifest(args)
    manifest.input_hashes[str(args.data)] = file_checksum(args.data)
    config = _solver_config(args)
    dataset = load_dataset(args.data, args.outcome, delimiter=args.delimiter, id_column=args.id_column)

    spectrum = None
    if args.spectrum_cache is not None:
        Xstd = standardize(dataset.X, config.variance_threshold)
        if args.spectrum_cache.is_file():
            spectrum = load_spectrum(args.spectrum_cache, Xstd)
            logger.info("Reusing spectrum cache %s", args.spectrum_cache)
        else:
            spectrum = eigendecompose(compute_kinship(Xstd))
            save_spectrum(spectrum, args.spectrum_cache, Xstd)
            manifest.artifacts.append(str(args.spectrum_cache))

    model = fit_plmm(dataset, config, spectrum=spectrum)
    args.out.mkdir(parents=True, exist_ok=True)
    model_path = args.out / "model.json"
    sidecar = model.save(model_path)
    table_path = args.out / "path.csv"
    path_table(model, args.coefficients).write_csv(table_path)
    manifest.artifacts += [str(model_path), str(sidecar), str(table_path)]
    return manifest


def cmd_cv(args: argparse.Namespace) -> RunManifest:
    """
    Cross-validate and write 'cv_curve.csv' and 'cv_summary.json'.

    With --model, the selected path indices are also stored in that model file.

    Args:
        args (argparse.Namespace): Parsed arguments.

    Returns:
        RunManifest: The run record.

    Raises:
        DataValidationError: If --model was fitted on other data or another penalty grid.
    """
    manifest = _manifest(args)
    manifest.seeds.append(args.seed)
    manifest.input_hashes[str(args.data)] = file_checksum(args.data)
    config = _solver_config(args)
    dataset = load_dataset(args.data, args.outcome, delimiter=args.delimiter, id_column=args.id_column)

    stored: Optional[PlmmModel] = None
    if args.model is not None:
        stored = PlmmModel.load(args.model)
        if stored.data_hash != array_checksum(dataset.X, dataset.y):
            raise DataValidationError(f"Model '{args.model}' was fitted on different data than '{args.data}'.")

    strategies = CVStrategy.values() if args.strategy == "all" else [args.strategy]
    validator = CrossValidator(dataset, assign_folds(dataset.n, args.k, args.seed), config, threads=_threads(args))
    results = validator.run_all(strategies)

    args.out.mkdir(parents=True, exist_ok=True)
    curve_path = args.out / "cv_curve.csv"
    curve_table(results).write_csv(curve_path)
    model = validator.full_model
    summary = {
        "n": dataset.n,
        "p": dataset.p,
        "eta": model.eta,
        "strategies": {strategy.value: result.summary() for strategy, result in results.items()},
    }
    summary_path = _write_json(args.out / "cv_summary.json", summary)
    manifest.artifacts += [str(curve_path), str(summary_path)]

    if stored is not None:
        if stored.n_lambda != model.n_lambda or not np.allclose(stored.lambdas, model.lambdas, rtol=1e-10, atol=0.0):
            raise DataValidationError(f"Model '{args.model}' uses a different penalty grid; fit it with the same solver settings.")
        selection = dict(stored.selection)
        for strategy, result in results.items():
            selection[strategy.value] = {LambdaChoice.MIN.value: result.index_min, LambdaChoice.ONE_SE.value: result.index_1se}
        replace(stored, selection=selection).save(args.model)
        manifest.artifacts.append(str(args.model))
    return manifest


def resolve_lambda_index(model: PlmmModel, choice: str, strategy: str) -> int:
    """
    Turn a --lambda value into a path index.

    Args:
        model (PlmmModel): The model.
        choice (str): 'min', '1se' or an integer index.
        strategy (str): Cross-validation strategy whose selection 'min' and '1se' refer to.

    Returns:
        int: The path index.

    Raises:
        DataValidationError: If no selection is stored or the index is out of range.
    """
    if choice in LambdaChoice.values():
        selection = model.selection.get(strategy)
        if selection is None:
            raise DataValidationError(f"The model holds no '{strategy}' cross-validation selection. Run 'plmmcv cv --model ...' first, or pass a path index.")
        return model.check_lambda_index(selection[choice])
    try:
        index = int(choice)
    except ValueError as e:
        raise DataValidationError(f"--lambda must be 'min', '1se' or an integer index. Current value: {choice!r}.") from e
    return model.check_lambda_index(index)


def cmd_predict(args: argparse.Namespace) -> RunManifest:
    """
    Predict new rows at one penalty value and write 'predictions.csv'.

    Args:
        args (argparse.Namespace): Parsed arguments.

    Returns:
        RunManifest: The run record.
    """
    manifest = _manifest(args)
    model = PlmmModel.load(args.model)
    manifest.input_hashes[str(args.model)] = file_checksum(args.model)
    manifest.input_hashes[str(args.data)] = file_checksum(args.data)

    index = resolve_lambda_index(model, args.lambda_, args.strategy)
    X_new, row_ids = load_features(args.data, model.feature_names, delimiter=args.delimiter, id_column=args.id_column)
    if PredictionMode.parse(args.mode) is PredictionMode.BLUP:
        predictions = predict_blup(model, X_new, index, row_ids=row_ids or None)
    else:
        predictions = predict_linear(model, X_new, index)

    label = args.id_column or "row"
    labels = list(row_ids) if row_ids else [str(i + 1) for i in range(len(predictions))]
    args.out.mkdir(parents=True, exist_ok=True)
    out_path = args.out / "predictions.csv"
    pl.DataFrame({label: labels, "prediction": predictions}).write_csv(out_path)
    manifest.artifacts.append(str(out_path))
    logger.info("Predicted %d rows at lambda index %d (%s)", len(predictions), index, args.mode)
    return manifest


def cmd_bench(args: argparse.Namespace) -> RunManifest:
    """
    Run a benchmark scenario and write 'metrics.csv', 'curves.csv' and 'summary.json'.

    Args:
        args (argparse.Namespace): Parsed arguments.

    Returns:
        RunManifest: The run record.
    """
    manifest = _manifest(args)
    scenario = ScenarioConfig.load(args.scenario)
    if Path(args.scenario).is_file():
        manifest.input_hashes[str(args.scenario)] = file_checksum(args.scenario)

    result = run_benchmark(scenario, n_reps=args.n_reps, base_seed=args.seed, threads=_threads(args))
    manifest.seeds += [result.scenario.base_seed + i for i in range(result.scenario.n_reps)]
    manifest.artifacts += [str(path) for path in result.write(args.out)]
    return manifest


def _error_payload(error: BaseException, exit_code: int) -> dict[str, Any]:
    message = " ".join(str(a) for a in error.args) if error.args else str(error)
    payload: dict[str, Any] = {
        "error": type(error).__name__,
        "message": message,
        "notes": list(getattr(error, "__notes__", [])),
        "exit_code": exit_code,
    }
    lam = getattr(error, "lam", None)
    if lam is not None:
        payload["lambda"] = lam
    return payload


def _fail(command: str, error: BaseException, exit_code: int) -> int:
    logger.debug("Command %s failed", command, exc_info=error)
    sys.stderr.write(json.dumps(_error_payload(error, exit_code)) + "\n")
    return exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of the `plmmcv` console script.

    Args:
        argv (Optional[Sequence[str]]): Arguments without the program name; sys.argv when omitted.

    Returns:
        int: The exit code.
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    handler: Callable[[argparse.Namespace], RunManifest] = args.handler

    started = time.perf_counter()
    try:
        if getattr(args, "threads", None) is not None and args.threads < 1:
            raise ValueError("--threads must be at least 1.", f"Current value: {args.threads}.")
        manifest = handler(args)
    except NumericalError as e:
        return _fail(args.command, e, EXIT_NUMERICAL)
    except (PlmmError, ValueError, TypeError, FileNotFoundError) as e:
        return _fail(args.command, e, EXIT_INVALID)

    manifest.duration_seconds = round(time.perf_counter() - started, 3)
    manifest.write(args.out)
    return EXIT_OK
