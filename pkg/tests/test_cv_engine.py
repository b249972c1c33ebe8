import numpy as np
import pytest
from sklearn.linear_model import lasso_path

from plmmcv import CrossValidator, Dataset, SolverConfig, cross_validate
from plmmcv.models import FoldAssignment, apply_standardization, standardize
from plmmcv.services import assign_folds, fit_fold, select_lambda
from plmmcv.utils import ConvergenceError, CVStrategy, DataValidationError


@pytest.fixture
def dataset():
    rng = np.random.default_rng(13)
    X = rng.normal(size=(60, 30)) + rng.normal(size=(6, 30)).repeat(10, axis=0)
    beta = np.zeros(30)
    beta[:3] = [1.0, -1.0, 0.7]
    y = 1.0 + X @ beta + np.repeat(rng.normal(scale=1.5, size=6), 10) + rng.normal(size=60)
    return Dataset(X=X, y=y)


@pytest.fixture
def config():
    return SolverConfig(n_lambda=15)


@pytest.fixture
def validator(dataset, config):
    return CrossValidator(dataset, assign_folds(dataset.n, 5, seed=1), config)


# ============== Tests for assign_folds ==============


def test_assign_folds_is_balanced():
    folds = assign_folds(23, 5, seed=3)

    assert folds.sizes().sum() == 23
    assert folds.sizes().max() - folds.sizes().min() <= 1
    assert set(folds.fold_of) == {1, 2, 3, 4, 5}


def test_assign_folds_is_deterministic():
    np.testing.assert_array_equal(assign_folds(40, 4, seed=7).fold_of, assign_folds(40, 4, seed=7).fold_of)
    assert not np.array_equal(assign_folds(40, 4, seed=7).fold_of, assign_folds(40, 4, seed=8).fold_of)


@pytest.mark.parametrize("n, K", [(10, 1), (10, 11)])
def test_assign_folds_invalid_fold_count(n, K):
    with pytest.raises(DataValidationError):
        assign_folds(n, K)


def test_assign_folds_invalid_type():
    with pytest.raises(TypeError):
        assign_folds(10.0, 5)


def test_fold_indices_partition_rows():
    folds = assign_folds(12, 3, seed=0)

    held_out = np.concatenate([folds.test_indices(k) for k in range(1, 4)])
    np.testing.assert_array_equal(np.sort(held_out), np.arange(12))
    assert len(folds.train_indices(1)) == 12 - len(folds.test_indices(1))


# ============== Tests for select_lambda ==============


@pytest.mark.parametrize(
    "cve, cvse, expected",
    [
        ([5.0, 1.0, 2.0], [0.1, 0.5, 0.1], (1, 1)),
        ([1.0, 1.0, 1.0], [0.1, 0.1, 0.1], (0, 0)),
        ([2.0, 1.0, 1.0], [0.1, 0.1, 0.1], (1, 1)),
        ([1.2, 1.0, 1.1], [0.1, 0.3, 0.1], (1, 0)),
    ],
)
def test_select_lambda(cve, cvse, expected):
    assert select_lambda(np.array(cve), np.array(cvse), np.array([1.0, 0.5, 0.25])) == expected


def test_select_lambda_misaligned():
    with pytest.raises(DataValidationError):
        select_lambda(np.array([1.0, 2.0]), np.array([0.1]), np.array([1.0, 0.5]))


# ============== Tests for CrossValidator ==============


def test_full_cv_result(validator, dataset):
    result = validator.run(CVStrategy.FULL)

    assert result.strategy is CVStrategy.FULL
    assert result.predictions.shape == (60, 15)
    assert len(result.fold_etas) == 5
    np.testing.assert_array_equal(result.y_reference, dataset.y)
    np.testing.assert_allclose(result.recompute_cve(), result.cve, rtol=1e-12)
    np.testing.assert_array_equal(result.nvar, validator.full_model.nvar)
    assert result.lambda_min == result.lambdas[result.index_min]
    assert result.index_1se <= result.index_min


def test_cv_standard_error_is_per_row(validator, dataset):
    result = validator.run(CVStrategy.FULL)
    squared = (dataset.y[:, None] - result.predictions) ** 2

    np.testing.assert_allclose(result.cve, squared.mean(axis=0), rtol=1e-12)
    np.testing.assert_allclose(result.cvse, squared.std(axis=0, ddof=1) / np.sqrt(dataset.n), rtol=1e-12)


def test_fold_fit_ignores_held_out_rows(dataset, config):
    folds = assign_folds(dataset.n, 5, seed=1)
    train = folds.train_indices(2)
    test = folds.test_indices(2)
    lambdas = np.geomspace(1.0, 0.01, 10)

    X = np.array(dataset.X)
    y = np.array(dataset.y)
    X[test] += 100.0
    y[test] *= -50.0
    perturbed = Dataset(X=X, y=y)

    original = fit_fold(dataset, train, lambdas, config)
    changed = fit_fold(perturbed, train, lambdas, config)

    np.testing.assert_array_equal(changed.beta_path, original.beta_path)
    assert changed.eta == original.eta


def test_fold_relabeling_does_not_change_errors(dataset, config, validator):
    folds = validator.folds
    relabel = np.array([3, 5, 1, 2, 4])
    relabeled = FoldAssignment(fold_of=relabel[folds.fold_of - 1], K=5, seed=folds.seed)

    original = validator.run(CVStrategy.FULL)
    other = CrossValidator(dataset, relabeled, config, full_model=validator.full_model).run(CVStrategy.FULL)

    np.testing.assert_allclose(other.cve, original.cve, rtol=1e-12)
    np.testing.assert_array_equal(np.sort(other.fold_etas), np.sort(original.fold_etas))


def test_full_cv_with_eta_zero_is_plain_lasso_cv(dataset):
    config = SolverConfig(eta=0.0, n_lambda=15, tol=1e-10)
    folds = assign_folds(dataset.n, 4, seed=2)
    result = CrossValidator(dataset, folds, config).run(CVStrategy.FULL)

    predictions = np.zeros((dataset.n, len(result.lambdas)))
    for k in range(1, 5):
        train, test = folds.train_indices(k), folds.test_indices(k)
        Xstd = standardize(dataset.X[train])
        y_train = dataset.y[train]
        _, coefs, _ = lasso_path(Xstd.values, y_train - y_train.mean(), alphas=result.lambdas, tol=1e-10, max_iter=100_000)
        X_test = apply_standardization(dataset.X[test], Xstd.centers, Xstd.scales, Xstd.active)
        predictions[test] = y_train.mean() + X_test @ coefs
    reference = ((dataset.y[:, None] - predictions) ** 2).mean(axis=0)

    np.testing.assert_allclose(result.cve, reference, atol=1e-6)


def test_run_all_shares_folds_and_grid(validator, dataset):
    results = validator.run_all(["full", "inner", "outer"])

    assert list(results) == [CVStrategy.FULL, CVStrategy.INNER, CVStrategy.OUTER]
    for result in results.values():
        np.testing.assert_array_equal(result.lambdas, validator.lambdas)
        assert result.folds is validator.folds
    np.testing.assert_array_equal(results[CVStrategy.OUTER].y_reference, validator.prepared.rot.yrot)
    np.testing.assert_array_equal(results[CVStrategy.INNER].y_reference, dataset.y)


@pytest.mark.parametrize("strategy", [CVStrategy.INNER, CVStrategy.OUTER])
def test_inner_and_outer_reuse_full_data_eta(validator, strategy):
    result = validator.run(strategy)

    np.testing.assert_array_equal(result.fold_etas, validator.full_model.eta)
    assert np.all(np.isfinite(result.cve))


def test_thread_count_does_not_change_results(dataset, config):
    folds = assign_folds(dataset.n, 5, seed=4)
    serial = CrossValidator(dataset, folds, config, threads=1)
    parallel = CrossValidator(dataset, folds, config, threads=3, full_model=serial.full_model)

    for strategy in CVStrategy:
        np.testing.assert_array_equal(parallel.run(strategy).cve, serial.run(strategy).cve)


def test_cross_validator_fold_too_small(dataset):
    folds = FoldAssignment(fold_of=np.r_[np.ones(59, dtype=int), 2], K=2, seed=0)

    with pytest.raises(DataValidationError, match="at least 2 training rows"):
        CrossValidator(dataset, folds)


def test_cross_validator_fold_count_mismatch(dataset):
    with pytest.raises(DataValidationError):
        CrossValidator(dataset, assign_folds(20, 5))


def test_cross_validator_invalid_threads(dataset):
    with pytest.raises(ValueError):
        CrossValidator(dataset, assign_folds(dataset.n, 5), threads=0)


def test_fold_error_carries_fold_note(validator, monkeypatch):
    def failing_fit(*args, **kwargs):
        raise ConvergenceError("did not converge", lam=0.5)

    _ = validator.full_model
    monkeypatch.setattr("plmmcv.services.cv_engine.fit_fold", failing_fit)

    with pytest.raises(ConvergenceError) as excinfo:
        validator.run(CVStrategy.FULL)

    assert excinfo.value.lam == 0.5
    assert any("fold" in note for note in excinfo.value.__notes__)


# ============== Tests for cross_validate ==============


def test_cross_validate(dataset, config):
    result = cross_validate(dataset, K=3, seed=0, strategy="outer", config=config)

    assert result.strategy is CVStrategy.OUTER
    assert result.folds.K == 3
    summary = result.summary()
    assert summary["strategy"] == "outer"
    assert summary["nvar_min"] == result.nvar_at_min
    assert summary["K"] == 3
