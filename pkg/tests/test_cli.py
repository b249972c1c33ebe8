import json

import numpy as np
import polars as pl
import pytest
from sklearn.linear_model import lasso_path

from plmmcv import Dataset, PlmmModel
from plmmcv.cli import EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, main
from plmmcv.data_sources import save_dataset
from plmmcv.models import standardize
from plmmcv.utils import THREADS_ENV_VAR, ConvergenceError


@pytest.fixture
def dataset():
    rng = np.random.default_rng(17)
    X = rng.normal(size=(40, 20)) + rng.normal(size=(4, 20)).repeat(10, axis=0)
    y = 3.0 + 1.5 * X[:, 0] - X[:, 4] + np.repeat(rng.normal(size=4), 10) + rng.normal(size=40)
    return Dataset(X=X, y=y, feature_names=tuple(f"g{j + 1}" for j in range(20)), row_ids=tuple(f"s{i + 1}" for i in range(40)))


@pytest.fixture
def data_file(tmp_path, dataset):
    file_path = tmp_path / "train.csv"
    save_dataset(dataset, file_path, outcome_column="pheno", id_column="id")
    return file_path


@pytest.fixture
def fitted(tmp_path, data_file):
    out = tmp_path / "fit"
    assert main(["fit", "--data", str(data_file), "--outcome", "pheno", "--id-column", "id", "--n-lambda", "20", "--out", str(out)]) == EXIT_OK
    return out


def _stderr_payload(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def _cv(data_file, out, *extra):
    return main(["cv", "--data", str(data_file), "--outcome", "pheno", "--id-column", "id", "--n-lambda", "20", "--k", "4", "--out", str(out), *extra])


def _predict(data_file, model_dir, out, *extra):
    return main(["predict", "--data", str(data_file), "--model", str(model_dir / "model.json"), "--out", str(out), *extra])


# ============== Tests for fit ==============


def test_fit_writes_outputs(fitted, dataset, data_file):
    model = PlmmModel.load(fitted / "model.json")
    path = pl.read_csv(fitted / "path.csv")
    manifest = json.loads((fitted / "manifest.json").read_text())

    assert (fitted / "model.npz").is_file()
    assert model.beta0 == pytest.approx(dataset.y.mean(), abs=1e-12)
    assert model.feature_names == dataset.feature_names
    assert model.row_ids == dataset.row_ids
    assert path.columns == ["lambda_index", "lambda", "nvar", "intercept"]
    assert path.height == 20
    assert path["nvar"][0] == 0
    assert manifest["command"] == "fit"
    assert str(data_file) in manifest["input_hashes"]
    assert manifest["duration_seconds"] >= 0


def test_fit_with_coefficients(tmp_path, data_file):
    out = tmp_path / "fit"

    assert main(["fit", "--data", str(data_file), "--outcome", "pheno", "--id-column", "id", "--n-lambda", "10", "--coefficients", "--out", str(out)]) == EXIT_OK

    path = pl.read_csv(out / "path.csv")
    assert "beta[g1]" in path.columns
    assert path.width == 4 + 20


def test_fit_reuses_spectrum_cache(tmp_path, data_file):
    cache = tmp_path / "spectrum.npz"
    args = ["fit", "--data", str(data_file), "--outcome", "pheno", "--id-column", "id", "--n-lambda", "10", "--spectrum-cache", str(cache)]

    assert main([*args, "--out", str(tmp_path / "first")]) == EXIT_OK
    assert cache.is_file()
    assert main([*args, "--out", str(tmp_path / "second")]) == EXIT_OK

    first = PlmmModel.load(tmp_path / "first" / "model.json")
    second = PlmmModel.load(tmp_path / "second" / "model.json")
    np.testing.assert_array_equal(first.beta_path, second.beta_path)


def test_fit_with_eta_zero_matches_plain_lasso(tmp_path, data_file, dataset):
    out = tmp_path / "fit"
    args = ["fit", "--data", str(data_file), "--outcome", "pheno", "--id-column", "id", "--eta", "0", "--n-lambda", "15", "--tol", "1e-10", "--coefficients"]

    assert main([*args, "--out", str(out)]) == EXIT_OK

    path = pl.read_csv(out / "path.csv")
    Xstd = standardize(dataset.X)
    _, reference, _ = lasso_path(Xstd.values, dataset.y - dataset.y.mean(), alphas=path["lambda"].to_numpy(), tol=1e-10, max_iter=100_000)
    coefficients = path.select([f"beta[{name}]" for name in dataset.feature_names]).to_numpy().T
    np.testing.assert_allclose(coefficients, reference / Xstd.scales[:, None], atol=1e-6)
    np.testing.assert_array_equal(path["nvar"].to_numpy(), np.count_nonzero(coefficients, axis=0))


def test_fit_eta_grid_option(tmp_path, data_file, capsys):
    args = ["fit", "--data", str(data_file), "--outcome", "pheno", "--id-column", "id", "--n-lambda", "10"]

    assert main([*args, "--eta-grid", "7", "--out", str(tmp_path / "fit")]) == EXIT_OK
    assert json.loads((tmp_path / "fit" / "manifest.json").read_text())["args"]["eta_grid"] == 7

    assert main([*args, "--eta-grid", "1", "--out", str(tmp_path / "bad")]) == EXIT_INVALID
    assert "eta_grid" in _stderr_payload(capsys)["message"]


def test_fit_outcome_with_large_offset(tmp_path, dataset):
    shifted = Dataset(X=dataset.X, y=dataset.y + 1e12, feature_names=dataset.feature_names, row_ids=dataset.row_ids)
    data_file = tmp_path / "shifted.csv"
    save_dataset(shifted, data_file, outcome_column="pheno", id_column="id")

    assert main(["fit", "--data", str(data_file), "--outcome", "pheno", "--id-column", "id", "--n-lambda", "10", "--out", str(tmp_path / "fit")]) == EXIT_OK
    assert _cv(data_file, tmp_path / "cv") == EXIT_OK

    model = PlmmModel.load(tmp_path / "fit" / "model.json")
    assert model.beta0 == pytest.approx(1e12, rel=1e-9)


def test_fit_missing_outcome_column(tmp_path, data_file, capsys):
    code = main(["fit", "--data", str(data_file), "--outcome", "nope", "--id-column", "id", "--out", str(tmp_path / "fit")])

    payload = _stderr_payload(capsys)
    assert code == EXIT_INVALID
    assert payload["error"] == "DataValidationError"
    assert "'nope'" in payload["message"]
    assert payload["exit_code"] == EXIT_INVALID


def test_fit_missing_file(tmp_path):
    assert main(["fit", "--data", str(tmp_path / "absent.csv"), "--outcome", "pheno", "--out", str(tmp_path / "fit")]) == EXIT_INVALID


def test_fit_invalid_solver_setting(tmp_path, data_file, capsys):
    code = main(["fit", "--data", str(data_file), "--outcome", "pheno", "--id-column", "id", "--eta", "1.5", "--out", str(tmp_path / "fit")])

    assert code == EXIT_INVALID
    assert "eta" in _stderr_payload(capsys)["message"]


def test_fit_numerical_failure(tmp_path, data_file, capsys, monkeypatch):
    def failing_fit(*args, **kwargs):
        raise ConvergenceError("Coordinate descent did not converge.", lam=0.25)

    monkeypatch.setattr("plmmcv.cli.fit_plmm", failing_fit)

    code = main(["fit", "--data", str(data_file), "--outcome", "pheno", "--id-column", "id", "--out", str(tmp_path / "fit")])

    payload = _stderr_payload(capsys)
    assert code == EXIT_NUMERICAL
    assert payload["error"] == "ConvergenceError"
    assert payload["lambda"] == 0.25


# ============== Tests for cv ==============


def test_cv_all_strategies(tmp_path, data_file):
    out = tmp_path / "cv"

    assert _cv(data_file, out, "--strategy", "all") == EXIT_OK

    curve = pl.read_csv(out / "cv_curve.csv")
    summary = json.loads((out / "cv_summary.json").read_text())
    assert curve.height == 3 * 20
    assert set(summary["strategies"]) == {"full", "inner", "outer"}
    assert summary["n"] == 40
    lambdas = {s: curve.filter(pl.col("strategy") == s)["lambda"].to_list() for s in ("full", "inner", "outer")}
    assert lambdas["full"] == lambdas["inner"] == lambdas["outer"]
    assert json.loads((out / "manifest.json").read_text())["seeds"] == [0]


def test_cv_is_reproducible(tmp_path, data_file):
    assert _cv(data_file, tmp_path / "a", "--strategy", "all") == EXIT_OK
    assert _cv(data_file, tmp_path / "b", "--strategy", "all") == EXIT_OK

    assert (tmp_path / "a" / "cv_curve.csv").read_bytes() == (tmp_path / "b" / "cv_curve.csv").read_bytes()
    assert (tmp_path / "a" / "cv_summary.json").read_bytes() == (tmp_path / "b" / "cv_summary.json").read_bytes()


def test_cv_threads_from_environment(tmp_path, data_file, monkeypatch):
    assert _cv(data_file, tmp_path / "serial") == EXIT_OK
    monkeypatch.setenv(THREADS_ENV_VAR, "2")
    assert _cv(data_file, tmp_path / "parallel") == EXIT_OK

    assert (tmp_path / "serial" / "cv_curve.csv").read_bytes() == (tmp_path / "parallel" / "cv_curve.csv").read_bytes()


def test_cv_invalid_thread_setting(tmp_path, data_file, monkeypatch):
    assert _cv(data_file, tmp_path / "cv", "--threads", "0") == EXIT_INVALID
    monkeypatch.setenv(THREADS_ENV_VAR, "zero")
    assert _cv(data_file, tmp_path / "cv") == EXIT_INVALID


def test_cv_too_many_folds(tmp_path, data_file, capsys):
    assert _cv(data_file, tmp_path / "cv", "--k", "41") == EXIT_INVALID
    assert "'K'" in _stderr_payload(capsys)["message"]


def test_cv_stores_selection_in_model(fitted, data_file, tmp_path):
    assert _cv(data_file, tmp_path / "cv", "--strategy", "all", "--model", str(fitted / "model.json")) == EXIT_OK

    model = PlmmModel.load(fitted / "model.json")
    summary = json.loads((tmp_path / "cv" / "cv_summary.json").read_text())
    assert set(model.selection) == {"full", "inner", "outer"}
    assert model.selection["inner"]["min"] == summary["strategies"]["inner"]["index_min"]
    assert model.selection["full"]["1se"] == summary["strategies"]["full"]["index_1se"]


def test_cv_model_from_other_data(fitted, tmp_path, dataset, capsys):
    other = Dataset(X=dataset.X, y=dataset.y + 1.0, feature_names=dataset.feature_names, row_ids=dataset.row_ids)
    other_file = tmp_path / "other.csv"
    save_dataset(other, other_file, outcome_column="pheno", id_column="id")

    assert _cv(other_file, tmp_path / "cv", "--model", str(fitted / "model.json")) == EXIT_INVALID
    assert "different data" in _stderr_payload(capsys)["message"]


def test_cv_model_with_other_grid(fitted, data_file, tmp_path, capsys):
    code = main(["cv", "--data", str(data_file), "--outcome", "pheno", "--id-column", "id", "--n-lambda", "15", "--out", str(tmp_path / "cv"), "--model", str(fitted / "model.json")])

    assert code == EXIT_INVALID
    assert "penalty grid" in _stderr_payload(capsys)["message"]


# ============== Tests for predict ==============


def test_predict_linear_at_first_penalty_is_mean(fitted, data_file, dataset, tmp_path):
    out = tmp_path / "pred"

    assert _predict(data_file, fitted, out, "--lambda", "0", "--mode", "linear") == EXIT_OK

    predictions = pl.read_csv(out / "predictions.csv")
    assert predictions.columns == ["row", "prediction"]
    np.testing.assert_allclose(predictions["prediction"].to_numpy(), dataset.y.mean(), atol=1e-10)


def test_predict_blup_on_training_rows_returns_outcome(fitted, data_file, dataset, tmp_path):
    out = tmp_path / "pred"

    assert _predict(data_file, fitted, out, "--lambda", "5", "--id-column", "id") == EXIT_OK

    predictions = pl.read_csv(out / "predictions.csv")
    assert predictions["id"].to_list() == list(dataset.row_ids)
    np.testing.assert_allclose(predictions["prediction"].to_numpy(), dataset.y, atol=1e-8)


def test_predict_blup_differs_from_linear(data_file, tmp_path):
    fitted = tmp_path / "fit"
    assert main(["fit", "--data", str(data_file), "--outcome", "pheno", "--id-column", "id", "--eta", "0.5", "--n-lambda", "10", "--out", str(fitted)]) == EXIT_OK

    assert _predict(data_file, fitted, tmp_path / "blup", "--lambda", "5", "--mode", "blup") == EXIT_OK
    assert _predict(data_file, fitted, tmp_path / "linear", "--lambda", "5", "--mode", "linear") == EXIT_OK

    blup = pl.read_csv(tmp_path / "blup" / "predictions.csv")["prediction"].to_numpy()
    linear = pl.read_csv(tmp_path / "linear" / "predictions.csv")["prediction"].to_numpy()
    assert not np.allclose(blup, linear)


def test_predict_selected_penalty_needs_cv(fitted, data_file, tmp_path, capsys):
    assert _predict(data_file, fitted, tmp_path / "pred") == EXIT_INVALID
    assert "holds no 'full'" in _stderr_payload(capsys)["message"]

    assert _cv(data_file, tmp_path / "cv", "--model", str(fitted / "model.json")) == EXIT_OK
    assert _predict(data_file, fitted, tmp_path / "pred", "--lambda", "1se") == EXIT_OK
    assert (tmp_path / "pred" / "predictions.csv").is_file()


@pytest.mark.parametrize("choice", ["20", "-1", "best"])
def test_predict_invalid_lambda(fitted, data_file, tmp_path, choice):
    assert _predict(data_file, fitted, tmp_path / "pred", "--lambda", choice) == EXIT_INVALID


def test_predict_column_mismatch(fitted, dataset, tmp_path, capsys):
    missing = Dataset(X=dataset.X[:, 1:], y=dataset.y, feature_names=dataset.feature_names[1:])
    new_file = tmp_path / "new.csv"
    save_dataset(missing, new_file, outcome_column="pheno")

    assert _predict(new_file, fitted, tmp_path / "pred", "--lambda", "0") == EXIT_INVALID
    assert "g1" in _stderr_payload(capsys)["message"]


def test_predict_missing_model(data_file, tmp_path):
    assert _predict(data_file, tmp_path / "nowhere", tmp_path / "pred", "--lambda", "0") == EXIT_INVALID


# ============== Tests for bench ==============


@pytest.fixture
def scenario_file(tmp_path):
    file_path = tmp_path / "tiny.json"
    payload = {
        "name": "tiny",
        "generator": "correlated",
        "n": 40,
        "p": 30,
        "B": 4,
        "K": 3,
        "strategies": ["full", "outer"],
        "n_reps": 2,
        "holdout_fraction": 0.25,
        "solver": {"n_lambda": 10},
    }
    file_path.write_text(json.dumps(payload))
    return file_path


def test_bench_writes_outputs(scenario_file, tmp_path):
    out = tmp_path / "bench"

    assert main(["bench", "--scenario", str(scenario_file), "--out", str(out)]) == EXIT_OK

    summary = json.loads((out / "summary.json").read_text())
    manifest = json.loads((out / "manifest.json").read_text())
    assert pl.read_csv(out / "metrics.csv").height == 4
    assert set(summary["methods"]) == {"full", "outer"}
    assert manifest["seeds"] == [0, 1]
    assert str(scenario_file) in manifest["input_hashes"]


def test_bench_overrides(scenario_file, tmp_path):
    out = tmp_path / "bench"

    assert main(["bench", "--scenario", str(scenario_file), "--n-reps", "1", "--seed", "5", "--out", str(out)]) == EXIT_OK

    assert json.loads((out / "manifest.json").read_text())["seeds"] == [5]


def test_bench_invalid_scenario(tmp_path, capsys):
    file_path = tmp_path / "bad.json"
    file_path.write_text(json.dumps({"n_reps": 0}))

    assert main(["bench", "--scenario", str(file_path), "--out", str(tmp_path / "bench")]) == EXIT_INVALID
    assert "scenario.n_reps" in _stderr_payload(capsys)["message"]


def test_bench_unknown_scenario(tmp_path):
    assert main(["bench", "--scenario", "no_such_scenario", "--out", str(tmp_path / "bench")]) == EXIT_INVALID
