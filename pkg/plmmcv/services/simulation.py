import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Self, Union

import numpy as np
import polars as pl

from plmmcv.data_sources import load_matrix
from plmmcv.models import CvResult, Dataset, PlmmModel, SimDataset, SimMetrics
from plmmcv.utils import BenchmarkMethod, BlupMode, CVStrategy, DataValidationError, GeneratorKind, SolverConfig

from .blup import predict_blup
from .cv_engine import CrossValidator, assign_folds

logger = logging.getLogger(__name__)

SUMMARY_METRICS = ("tdr", "fdr", "nvar", "rsee", "cve", "mspe")


def _one_hot(levels: np.ndarray, B: int) -> np.ndarray:
    Z = np.zeros((len(levels), B))
    Z[np.arange(len(levels)), levels] = 1.0
    return Z


def generate_correlated_data(
    n: int = 100,
    p: int = 256,
    s: int = 4,
    gamma: float = 6.0,
    beta: float = 2.0,
    B: int = 20,
    seed: int = 0,
) -> SimDataset:
    """
    Simulate features correlated through batch means, with a batch effect on the outcome.

    Rows fall into B consecutive blocks of n/B. Every batch draws a mean vector
    from N(0, I); features are that mean plus standard normal noise. The first s
    coefficients equal beta, the batch effects are B equally spaced values on
    [−gamma, gamma], and y = Xβ + Zγ + ε with ε ~ N(0, I).

    Args:
        n (int): Number of observations.
        p (int): Number of features.
        s (int): Number of true signals.
        gamma (float): Largest batch effect magnitude.
        beta (float): Signal coefficient.
        B (int): Number of batches; must divide n.
        seed (int): Seed of the random stream.

    Returns:
        SimDataset: Data and ground truth.

    Raises:
        DataValidationError: If B does not divide n or s exceeds p.
    """
    if B < 1 or n % B != 0:
        raise DataValidationError(f"The number of batches B={B} must divide n={n}.")
    if not 0 <= s <= p:
        raise DataValidationError(f"The number of signals s={s} must be between 0 and p={p}.")

    rng = np.random.default_rng(seed)
    mu = rng.standard_normal((B, p))
    batch_id = np.repeat(np.arange(B), n // B)
    X = rng.standard_normal((n, p)) + mu[batch_id]

    beta_true = np.zeros(p)
    beta_true[:s] = beta
    gammas = np.linspace(-gamma, gamma, B)
    Z = _one_hot(batch_id, B)
    y = X @ beta_true + Z @ gammas + rng.standard_normal(n)

    return SimDataset(X=X, y=y, beta_true=beta_true, Z=Z, gamma=gammas, batch_id=batch_id, seed=seed)


def inject_confounder(
    X_real: np.ndarray,
    B: int = 5,
    gamma_mag: float = 2.0,
    beta_mag: float = 2.0,
    s: int = 4,
    seed: int = 0,
) -> SimDataset:
    """
    Simulate an outcome on a given feature matrix with a random B-level confounder.

    Rows are assigned to levels at random in balanced numbers, s features are
    picked at random as signals with coefficient beta_mag, and the level effects
    are B equally spaced values on [−gamma_mag, gamma_mag].

    Args:
        X_real (np.ndarray): n x p feature matrix.
        B (int): Number of confounder levels.
        gamma_mag (float): Largest level effect magnitude.
        beta_mag (float): Signal coefficient.
        s (int): Number of true signals.
        seed (int): Seed of the random stream.

    Returns:
        SimDataset: Data and ground truth.

    Raises:
        DataValidationError: If s exceeds p or B is not positive.
    """
    X = np.asarray(X_real, dtype=float)
    n, p = X.shape
    if not 0 <= s <= p:
        raise DataValidationError(f"The number of signals s={s} must be between 0 and p={p}.")
    if B < 1:
        raise DataValidationError(f"The number of levels B={B} must be positive.")

    rng = np.random.default_rng(seed)
    levels = rng.permutation(np.arange(n) % B)
    signals = np.sort(rng.choice(p, size=s, replace=False))

    beta_true = np.zeros(p)
    beta_true[signals] = beta_mag
    gammas = np.linspace(-gamma_mag, gamma_mag, B)
    Z = _one_hot(levels, B)
    y = X @ beta_true + Z @ gammas + rng.standard_normal(n)

    return SimDataset(X=X, y=y, beta_true=beta_true, Z=Z, gamma=gammas, batch_id=levels, seed=seed)


def compute_metrics(
    beta_hat: np.ndarray,
    beta_true: np.ndarray,
    y_test: Optional[np.ndarray] = None,
    y_hat: Optional[np.ndarray] = None,
    cve: float = float("nan"),
) -> SimMetrics:
    """
    Score a coefficient estimate and its predictions against the ground truth.

    Args:
        beta_hat (np.ndarray): Estimated original-scale coefficients.
        beta_true (np.ndarray): True coefficients.
        y_test (Optional[np.ndarray]): Held-out outcomes.
        y_hat (Optional[np.ndarray]): Predictions for the held-out rows.
        cve (float): Cross-validation error at the selected penalty.

    Returns:
        SimMetrics: TDR, FDR (0 when nothing is selected), NVAR, RSEE, MSPE (NaN without test data) and CVE.

    Raises:
        DataValidationError: If the dimensions do not match.
    """
    beta_hat = np.asarray(beta_hat, dtype=float)
    beta_true = np.asarray(beta_true, dtype=float)
    if beta_hat.shape != beta_true.shape:
        raise DataValidationError(f"Coefficient shapes differ: {beta_hat.shape} vs {beta_true.shape}.")

    selected = beta_hat != 0
    signal = beta_true != 0
    nvar = int(selected.sum())
    true_hits = int((selected & signal).sum())
    n_signal = int(signal.sum())

    tdr = true_hits / n_signal if n_signal else 0.0
    fdr = (nvar - true_hits) / nvar if nvar else 0.0
    rsee = float(np.linalg.norm(beta_hat - beta_true))

    mspe = float("nan")
    if y_test is not None and y_hat is not None:
        y_test = np.asarray(y_test, dtype=float)
        y_hat = np.asarray(y_hat, dtype=float)
        if y_test.shape != y_hat.shape:
            raise DataValidationError(f"Prediction shapes differ: {y_test.shape} vs {y_hat.shape}.")
        mspe = float(np.mean((y_test - y_hat) ** 2))

    return SimMetrics(tdr=tdr, fdr=fdr, nvar=nvar, rsee=rsee, mspe=mspe, cve=float(cve))


def _field_error(name: str, message: str) -> DataValidationError:
    return DataValidationError(f"scenario.{name}: {message}")


def _integer_field(payload: dict, name: str, default: int, minimum: int) -> int:
    value = payload.get(name, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise _field_error(name, f"must be an integer, got {type(value).__name__}.")
    if value < minimum:
        raise _field_error(name, f"must be at least {minimum}, got {value}.")
    return value


def _number_field(payload: dict, name: str, default: float) -> float:
    value = payload.get(name, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _field_error(name, f"must be a number, got {type(value).__name__}.")
    return float(value)


@dataclass(frozen=True)
class ScenarioConfig:
    """
    A benchmark scenario.

    Attributes:
        name (str): Label used in outputs.
        generator (GeneratorKind): Data generator.
        n (int): Observations per replicate, before the holdout split.
        p (int): Features.
        s (int): True signals.
        beta (float): Signal coefficient.
        gamma (float): Largest batch or confounder effect.
        B (int): Batches (correlated generator) or confounder levels.
        x_batches (int): Batches of the stand-in feature matrix for the confounder generator.
        K (int): Cross-validation folds.
        methods (tuple[BenchmarkMethod, ...]): Procedures compared.
        n_reps (int): Replicates.
        base_seed (int): Seed of replicate 0; replicate i uses base_seed + i.
        holdout_fraction (float): Share of rows held out as a test set, in [0, 1).
        x_path (Optional[str]): Delimited file with a real feature matrix for the confounder generator.
        solver (dict[str, Any]): SolverConfig keyword arguments.
    """

    name: str = "scenario"
    generator: GeneratorKind = GeneratorKind.CORRELATED
    n: int = 100
    p: int = 256
    s: int = 4
    beta: float = 2.0
    gamma: float = 6.0
    B: int = 20
    x_batches: int = 20
    K: int = 5
    methods: tuple[BenchmarkMethod, ...] = (BenchmarkMethod.FULL, BenchmarkMethod.INNER, BenchmarkMethod.OUTER)
    n_reps: int = 10
    base_seed: int = 0
    holdout_fraction: float = 0.0
    x_path: Optional[str] = None
    solver: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> Self:
        """
        Validate a scenario dictionary field by field.

        Args:
            payload (dict[str, Any]): Parsed scenario JSON.

        Returns:
            ScenarioConfig: The validated scenario.

        Raises:
            DataValidationError: If a field is invalid; the message names the field path.
        """
        if not isinstance(payload, dict):
            raise DataValidationError("scenario: must be a JSON object.")
        known = set(cls.__dataclass_fields__) | {"strategies"}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise _field_error(unknown[0], "unknown field.")

        name = payload.get("name", "scenario")
        if not isinstance(name, str) or not name.strip():
            raise _field_error("name", "must be a non-empty string.")

        try:
            generator = GeneratorKind.parse(payload.get("generator", GeneratorKind.CORRELATED.value))
        except (TypeError, ValueError) as e:
            raise _field_error("generator", f"must be one of {GeneratorKind.values()}.") from e

        raw_methods = payload.get("methods", payload.get("strategies", [m.value for m in cls.methods]))
        if not isinstance(raw_methods, list) or not raw_methods:
            raise _field_error("methods", "must be a non-empty list.")
        methods = []
        for i, value in enumerate(raw_methods):
            try:
                methods.append(BenchmarkMethod.parse(value))
            except (TypeError, ValueError) as e:
                raise _field_error(f"methods[{i}]", f"must be one of {BenchmarkMethod.values()}.") from e

        n = _integer_field(payload, "n", cls.n, 4)
        p = _integer_field(payload, "p", cls.p, 1)
        s = _integer_field(payload, "s", cls.s, 0)
        if s > p:
            raise _field_error("s", f"must not exceed p={p}, got {s}.")
        B = _integer_field(payload, "B", cls.B, 1)
        x_batches = _integer_field(payload, "x_batches", cls.x_batches, 1)
        if generator is GeneratorKind.CORRELATED and n % B:
            raise _field_error("B", f"must divide n={n}, got {B}.")
        if generator is GeneratorKind.CONFOUNDER and payload.get("x_path") is None and n % x_batches:
            raise _field_error("x_batches", f"must divide n={n}, got {x_batches}.")

        holdout_fraction = _number_field(payload, "holdout_fraction", cls.holdout_fraction)
        if not 0.0 <= holdout_fraction < 1.0:
            raise _field_error("holdout_fraction", f"must be in [0, 1), got {holdout_fraction}.")

        K = _integer_field(payload, "K", cls.K, 2)
        n_train = n - round(holdout_fraction * n)
        if K > n_train:
            raise _field_error("K", f"must not exceed the {n_train} training rows, got {K}.")

        x_path = payload.get("x_path")
        if x_path is not None and not isinstance(x_path, str):
            raise _field_error("x_path", "must be a string path.")

        solver = payload.get("solver", {})
        if not isinstance(solver, dict):
            raise _field_error("solver", "must be an object of solver settings.")
        try:
            SolverConfig(**solver)
        except (TypeError, ValueError) as e:
            raise _field_error("solver", str(e.args[0]) if e.args else str(e)) from e

        return cls(
            name=name,
            generator=generator,
            n=n,
            p=p,
            s=s,
            beta=_number_field(payload, "beta", cls.beta),
            gamma=_number_field(payload, "gamma", cls.gamma),
            B=B,
            x_batches=x_batches,
            K=K,
            methods=tuple(methods),
            n_reps=_integer_field(payload, "n_reps", cls.n_reps, 1),
            base_seed=_integer_field(payload, "base_seed", cls.base_seed, 0),
            holdout_fraction=holdout_fraction,
            x_path=x_path,
            solver=dict(solver),
        )

    @classmethod
    def load(cls, source: Union[str, Path]) -> Self:
        """
        Load a scenario from a JSON file or by the name of a bundled scenario.

        Args:
            source (Union[str, Path]): A path, or a bundled name such as 'large_signal'.

        Returns:
            ScenarioConfig: The validated scenario.

        Raises:
            FileNotFoundError: If neither a file nor a bundled scenario matches.
            DataValidationError: If the JSON is malformed or a field is invalid.
        """
        path = Path(source)
        if path.is_file():
            text = path.read_text()
        else:
            bundled = resources.files("plmmcv.scenarios").joinpath(f"{path.stem}.json")
            if not bundled.is_file():
                raise FileNotFoundError(f"'{source}' is neither a scenario file nor a bundled scenario ({bundled_scenarios()}).")
            text = bundled.read_text()
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as e:
            raise DataValidationError(f"scenario: invalid JSON ({e.msg} at line {e.lineno}).") from e
        return cls.from_dict(payload)

    def solver_config(self) -> SolverConfig:
        """
        Build the solver settings of the scenario.

        Returns:
            SolverConfig: The settings.
        """
        return SolverConfig(**self.solver)

    def to_dict(self) -> dict[str, Any]:
        """
        Represent the scenario as JSON-compatible values.

        Returns:
            dict[str, Any]: The scenario fields.
        """
        return {
            "name": self.name,
            "generator": self.generator.value,
            "n": self.n,
            "p": self.p,
            "s": self.s,
            "beta": self.beta,
            "gamma": self.gamma,
            "B": self.B,
            "x_batches": self.x_batches,
            "K": self.K,
            "methods": [m.value for m in self.methods],
            "n_reps": self.n_reps,
            "base_seed": self.base_seed,
            "holdout_fraction": self.holdout_fraction,
            "x_path": self.x_path,
            "solver": self.solver,
        }


def bundled_scenarios() -> list[str]:
    """
    List the scenarios shipped with the package.

    Returns:
        list[str]: Scenario names without the '.json' suffix.
    """
    return sorted(entry.name.removesuffix(".json") for entry in resources.files("plmmcv.scenarios").iterdir() if entry.name.endswith(".json"))


@dataclass(frozen=True)
class ReplicateResult:
    """
    Metrics of one replicate.

    Attributes:
        replicate (int): Replicate index.
        seed (int): Seed of the replicate.
        rows (list[dict[str, Any]]): One metrics row per method.
        curves (list[dict[str, Any]]): Per-method, per-λ CVE and MSPE rows.
    """

    replicate: int
    seed: int
    rows: list[dict[str, Any]]
    curves: list[dict[str, Any]]


@dataclass(frozen=True)
class BenchmarkResult:
    """
    Outcome of a benchmark run.

    Attributes:
        scenario (ScenarioConfig): The scenario that was run.
        metrics (pl.DataFrame): One row per replicate and method.
        curves (pl.DataFrame): Per-λ CVE and MSPE for every replicate and method.
    """

    scenario: ScenarioConfig
    metrics: pl.DataFrame
    curves: pl.DataFrame

    def summary(self) -> dict[str, Any]:
        """
        Mean and standard deviation of every metric per method.

        Returns:
            dict[str, Any]: 'methods' holds numeric mean/sd/median per metric; 'table' holds
                'Mean (SD)' strings keyed by metric, then method.
        """
        methods: dict[str, dict[str, dict[str, Optional[float]]]] = {}
        table: dict[str, dict[str, str]] = {metric: {} for metric in SUMMARY_METRICS}
        for method in self.scenario.methods:
            rows = self.metrics.filter(pl.col("method") == method.value)
            methods[method.value] = {}
            for metric in SUMMARY_METRICS:
                values = rows[metric].cast(pl.Float64).to_numpy()
                values = values[~np.isnan(values)]
                if values.size == 0:
                    stats = {"mean": None, "sd": None, "median": None}
                    table[metric][method.value] = "NA"
                else:
                    sd = float(values.std(ddof=1)) if values.size > 1 else 0.0
                    stats = {"mean": float(values.mean()), "sd": sd, "median": float(np.median(values))}
                    table[metric][method.value] = f"{stats['mean']:.2f} ({sd:.2f})"
                methods[method.value][metric] = stats
        return {"scenario": self.scenario.to_dict(), "n_reps": self.scenario.n_reps, "methods": methods, "table": table}

    def median(self, method: BenchmarkMethod, metric: str) -> float:
        """
        Median of one metric over the replicates of one method.

        Args:
            method (BenchmarkMethod): The method.
            metric (str): Column of the metrics table.

        Returns:
            float: The median, ignoring NaN.
        """
        values = self.metrics.filter(pl.col("method") == BenchmarkMethod.parse(method).value)[metric].cast(pl.Float64).to_numpy()
        return float(np.nanmedian(values))

    def write(self, out_dir: Union[str, Path]) -> list[Path]:
        """
        Write 'metrics.csv', 'curves.csv' and 'summary.json'.

        Args:
            out_dir (Union[str, Path]): Output directory, created when missing.

        Returns:
            list[Path]: The written files.
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        metrics_path = out_dir / "metrics.csv"
        curves_path = out_dir / "curves.csv"
        summary_path = out_dir / "summary.json"
        self.metrics.write_csv(metrics_path)
        self.curves.write_csv(curves_path)
        summary_path.write_text(json.dumps(self.summary(), indent=2))
        return [metrics_path, curves_path, summary_path]


def _scenario_data(scenario: ScenarioConfig, seed: int, x_real: Optional[np.ndarray]) -> SimDataset:
    if scenario.generator is GeneratorKind.CORRELATED:
        return generate_correlated_data(scenario.n, scenario.p, scenario.s, scenario.gamma, scenario.beta, scenario.B, seed)
    if x_real is None:
        x_real = generate_correlated_data(scenario.n, scenario.p, 0, 0.0, 0.0, scenario.x_batches, seed).X
    return inject_confounder(x_real, scenario.B, scenario.gamma, scenario.beta, scenario.s, seed)


def _holdout_split(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    n_test = round(fraction * n)
    order = np.random.default_rng(seed).permutation(n)
    return np.sort(order[n_test:]), np.sort(order[:n_test])


def _method_validator(method: BenchmarkMethod, base: CrossValidator, train: Dataset, config: SolverConfig) -> tuple[CrossValidator, CVStrategy]:
    if method is BenchmarkMethod.INCORRECT_BLUP:
        return CrossValidator(train, base.folds, config, blup_mode=BlupMode.INCORRECT, full_model=base.full_model), CVStrategy.FULL
    if method is BenchmarkMethod.LASSO:
        return CrossValidator(train, base.folds, config.with_eta(0.0)), CVStrategy.FULL
    return base, CVStrategy(method.value)


def run_replicate(scenario: ScenarioConfig, replicate: int, x_real: Optional[np.ndarray] = None) -> ReplicateResult:
    """
    Simulate one dataset and score every method of the scenario on it.

    Args:
        scenario (ScenarioConfig): The scenario.
        replicate (int): Replicate index.
        x_real (Optional[np.ndarray]): Feature matrix for the confounder generator.

    Returns:
        ReplicateResult: Metrics and curves of the replicate.
    """
    seed = scenario.base_seed + replicate
    config = scenario.solver_config()
    data = _scenario_data(scenario, seed, x_real)
    train_idx, test_idx = _holdout_split(data.n, scenario.holdout_fraction, seed)

    full = data.to_dataset()
    train = full.subset(train_idx)
    base = CrossValidator(train, assign_folds(train.n, scenario.K, seed), config)

    rows: list[dict[str, Any]] = []
    curves: list[dict[str, Any]] = []
    for method in scenario.methods:
        validator, strategy = _method_validator(method, base, train, config)
        result: CvResult = validator.run(strategy)
        model: PlmmModel = validator.full_model
        index = result.index_min

        y_test = None
        test_predictions = None
        if len(test_idx):
            y_test = data.y[test_idx]
            test_predictions = predict_blup(model, data.X[test_idx])

        metrics = compute_metrics(
            model.beta_path[:, index],
            data.beta_true,
            y_test,
            None if test_predictions is None else test_predictions[:, index],
            cve=float(result.cve[index]),
        )
        rows.append(
            {
                "replicate": replicate,
                "seed": seed,
                "method": method.value,
                **metrics.to_dict(),
                "eta": model.eta,
                "lambda_min": result.lambda_min,
                "lambda_1se": result.lambda_1se,
                "nvar_1se": result.nvar_at_1se,
            }
        )

        mspe_path = np.full(len(result.lambdas), np.nan)
        if test_predictions is not None:
            mspe_path = np.mean((y_test[:, None] - test_predictions) ** 2, axis=0)
        for l, lam in enumerate(result.lambdas):
            curves.append(
                {
                    "replicate": replicate,
                    "method": method.value,
                    "lambda_index": l,
                    "lambda": float(lam),
                    "nvar": int(result.nvar[l]),
                    "cve": float(result.cve[l]),
                    "cvse": float(result.cvse[l]),
                    "mspe": float(mspe_path[l]),
                }
            )

    logger.info("Replicate %d (seed %d) done", replicate, seed)
    return ReplicateResult(replicate=replicate, seed=seed, rows=rows, curves=curves)


def run_benchmark(
    scenario: ScenarioConfig,
    n_reps: Optional[int] = None,
    base_seed: Optional[int] = None,
    threads: int = 1,
) -> BenchmarkResult:
    """
    Run every replicate of a scenario.

    Args:
        scenario (ScenarioConfig): The scenario.
        n_reps (Optional[int]): Overrides the scenario's replicate count.
        base_seed (Optional[int]): Overrides the scenario's base seed.
        threads (int): Replicates run concurrently.

    Returns:
        BenchmarkResult: Metrics and curves for all replicates, in replicate order.
    """
    overrides: dict[str, Any] = {}
    if n_reps is not None:
        overrides["n_reps"] = n_reps
    if base_seed is not None:
        overrides["base_seed"] = base_seed
    if overrides:
        scenario = ScenarioConfig.from_dict({**scenario.to_dict(), **overrides})

    x_real = None
    if scenario.generator is GeneratorKind.CONFOUNDER and scenario.x_path is not None:
        x_real = load_matrix(scenario.x_path)
        if x_real.shape[0] != scenario.n or x_real.shape[1] < scenario.s:
            raise DataValidationError(f"scenario.x_path: matrix of shape {x_real.shape} does not fit n={scenario.n}, s={scenario.s}.")

    def replicate(i: int) -> ReplicateResult:
        try:
            return run_replicate(scenario, i, x_real)
        except Exception as e:
            e.add_note(f"Benchmark '{scenario.name}', replicate {i} (seed {scenario.base_seed + i}).")
            raise

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        results = list(executor.map(replicate, range(scenario.n_reps)))

    metrics = pl.DataFrame([row for result in results for row in result.rows])
    curves = pl.DataFrame([row for result in results for row in result.curves])
    logger.info("Benchmark '%s' finished: %d replicates x %d methods", scenario.name, scenario.n_reps, len(scenario.methods))
    return BenchmarkResult(scenario=scenario, metrics=metrics, curves=curves)

