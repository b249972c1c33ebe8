import itertools

import numpy as np
import pytest
from sklearn.linear_model import lasso_path

from plmmcv import Dataset, PlmmModel, SolverConfig, fit_plmm, predict_linear
from plmmcv.models import LambdaPath, RotatedData, standardize
from plmmcv.services import (
    CoordinateDescentSolver,
    CrossValidator,
    assign_folds,
    build_preconditioner,
    check_kkt,
    compute_kinship,
    eigendecompose,
    generate_correlated_data,
    lambda_max,
    lasso_objective,
    make_lambda_path,
    prepare,
    rotate,
    soft_threshold,
)
from plmmcv.utils import ConvergenceError, CVStrategy, DataValidationError


@pytest.fixture
def dataset():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(60, 20)) + rng.normal(size=(6, 20)).repeat(10, axis=0)
    beta = np.zeros(20)
    beta[:3] = [1.5, -1.0, 0.8]
    y = 4.0 + X @ beta + np.repeat(rng.normal(scale=2.0, size=6), 10) + rng.normal(size=60)
    return Dataset(X=X, y=y)


def _brute_force_lasso(X, y, lam):
    n, p = X.shape
    best, best_value = np.zeros(p), lasso_objective(X, y, np.zeros(p), lam)
    for signs in itertools.product((-1.0, 0.0, 1.0), repeat=p):
        signs = np.array(signs)
        support = signs != 0
        if not support.any():
            continue
        XS = X[:, support]
        coef = np.linalg.solve(XS.T @ XS / n, XS.T @ y / n - lam * signs[support])
        if np.any(np.sign(coef) != signs[support]):
            continue
        beta = np.zeros(p)
        beta[support] = coef
        value = lasso_objective(X, y, beta, lam)
        if value < best_value:
            best, best_value = beta, value
    return best


# ============== Tests for the helpers ==============


def test_soft_threshold():
    np.testing.assert_array_equal(soft_threshold(np.array([3.0, -3.0, 0.5, -0.5]), 1.0), [2.0, -2.0, 0.0, -0.0])


def test_lasso_objective_unpenalized_mask():
    X = np.eye(2)
    y = np.array([1.0, 1.0])
    beta = np.array([1.0, 2.0])

    assert lasso_objective(X, y, beta, 0.5) == pytest.approx(1 / 4 + 1.5)
    assert lasso_objective(X, y, beta, 0.5, penalized=np.array([False, True])) == pytest.approx(1 / 4 + 1.0)


def test_lambda_max_gives_empty_model():
    rng = np.random.default_rng(0)
    X = standardize(rng.normal(size=(30, 8))).values
    y = rng.normal(size=30)
    y -= y.mean()
    solver = CoordinateDescentSolver(tol=1e-10)
    lam = lambda_max(X, y)

    at_max, _, _ = solver.solve_single(X, y, lam)
    below, _, _ = solver.solve_single(X, y, 0.99 * lam)

    np.testing.assert_array_equal(at_max, 0.0)
    assert np.count_nonzero(below) >= 1


# ============== Tests for CoordinateDescentSolver ==============


@pytest.mark.parametrize("seed", range(5))
def test_solver_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    X = standardize(rng.normal(size=(10, 3))).values
    y = rng.normal(size=10)
    y -= y.mean()
    lambdas = np.geomspace(lambda_max(X, y), 0.01 * lambda_max(X, y), 12)

    path, _ = CoordinateDescentSolver(tol=1e-10).solve(X, y, lambdas)

    for l, lam in enumerate(lambdas):
        np.testing.assert_allclose(path[:, l], _brute_force_lasso(X, y, lam), atol=1e-4)
    assert check_kkt(X, y, path, lambdas) <= 1e-4


def test_solver_objective_is_monotone():
    rng = np.random.default_rng(9)
    X = standardize(rng.normal(size=(40, 15))).values
    y = rng.normal(size=40)

    _, _, objectives = CoordinateDescentSolver(tol=1e-10).solve_single(X, y, 0.05, trace=True)

    assert len(objectives) >= 2
    assert np.all(np.diff(objectives) <= 1e-12)


def test_solver_inactive_columns_stay_zero():
    rng = np.random.default_rng(3)
    X = standardize(rng.normal(size=(30, 5))).values
    y = X[:, 0] * 3 + rng.normal(size=30)
    active = np.array([False, True, True, True, True])

    beta, _, _ = CoordinateDescentSolver().solve_single(X, y, 0.01, active=active)

    assert beta[0] == 0.0


def test_solver_raises_convergence_error_with_lambda():
    rng = np.random.default_rng(1)
    X = standardize(rng.normal(size=(30, 10))).values
    y = rng.normal(size=30)

    with pytest.raises(ConvergenceError) as excinfo:
        CoordinateDescentSolver(max_iter=1).solve_single(X, y, 0.01)

    assert excinfo.value.lam == 0.01


def test_solver_warm_path_matches_cold_fits():
    rng = np.random.default_rng(21)
    X = standardize(rng.normal(size=(50, 20))).values
    y = X[:, :3] @ np.array([1.0, -0.7, 0.5]) + rng.normal(size=50)
    y -= y.mean()
    lambdas = np.geomspace(lambda_max(X, y), 0.01 * lambda_max(X, y), 15)
    solver = CoordinateDescentSolver(tol=1e-12)

    warm, _ = solver.solve(X, y, lambdas)

    for l, lam in enumerate(lambdas):
        cold, _, _ = solver.solve_single(X, y, lam)
        np.testing.assert_allclose(warm[:, l], cold, atol=1e-5)


@pytest.mark.parametrize("kwargs", [{"tol": 0.0}, {"max_iter": 0}])
def test_solver_invalid_settings(kwargs):
    with pytest.raises(ValueError):
        CoordinateDescentSolver(**kwargs)


# ============== Tests for the closed-form intercept ==============


@pytest.mark.parametrize("seed", range(5))
def test_fixed_intercept_matches_explicit_intercept(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(30, 20)) + rng.normal(size=(3, 20)).repeat(10, axis=0)
    y = 5.0 + X[:, 0] - X[:, 1] + rng.normal(size=30)
    Xstd = standardize(X)
    pre = build_preconditioner(eigendecompose(compute_kinship(Xstd)), 0.5)
    rot = rotate(pre, Xstd, y - y.mean())
    lambdas = make_lambda_path(rot, n_lambda=20, min_ratio=0.01).lambdas
    solver = CoordinateDescentSolver(tol=1e-12)

    fixed, _ = solver.solve(rot.Xrot, rot.yrot, lambdas)
    design = np.column_stack([rot.Xrot, pre.apply(np.ones(30))])
    unpenalized = np.r_[np.zeros(20, dtype=bool), True]
    explicit, _ = solver.solve(design, pre.apply(y), lambdas, unpenalized=unpenalized)

    np.testing.assert_allclose(explicit[:20], fixed, atol=1e-6)
    np.testing.assert_allclose(explicit[20], y.mean(), atol=1e-6)


# ============== Tests for make_lambda_path ==============


def test_make_lambda_path_is_geometric(dataset):
    prepared_path = fit_plmm(dataset, SolverConfig(n_lambda=30, min_ratio=0.01)).lambdas

    assert len(prepared_path) == 30
    assert np.all(np.diff(prepared_path) < 0)
    assert prepared_path[-1] / prepared_path[0] == pytest.approx(0.01)


def test_make_lambda_path_without_active_features():
    rot = RotatedData(Xrot=np.zeros((5, 2)), yrot=np.ones(5), rot_centers=np.zeros(2), rot_scales=np.ones(2), active=np.zeros(2, dtype=bool))

    with pytest.raises(DataValidationError):
        make_lambda_path(rot)


def test_make_lambda_path_orthogonal_outcome():
    Xrot = np.array([[1.0], [-1.0], [1.0], [-1.0]])
    rot = RotatedData(Xrot=Xrot, yrot=np.array([1.0, 1.0, -1.0, -1.0]), rot_centers=np.zeros(1), rot_scales=np.ones(1), active=np.ones(1, dtype=bool))

    with pytest.raises(DataValidationError, match="orthogonal"):
        make_lambda_path(rot)


# ============== Tests for fit_path ==============


def test_fit_intercept_is_outcome_mean(dataset):
    model = fit_plmm(dataset, SolverConfig(n_lambda=20))

    assert model.beta0 == pytest.approx(dataset.y.mean(), abs=1e-12)


@pytest.mark.parametrize("offset", [1e10, 1e12])
def test_fit_with_large_outcome_offset(offset):
    rng = np.random.default_rng(11)
    X = rng.normal(size=(60, 40))
    y = offset + rng.normal(size=60)

    prepared = prepare(X, y, SolverConfig())
    model = fit_plmm(Dataset(X=X, y=y), SolverConfig(n_lambda=10))

    assert np.all(np.isfinite(prepared.rot.yrot))
    assert 0.0 <= prepared.eta <= 0.99
    assert model.beta0 == pytest.approx(offset, rel=1e-12)
    assert model.nvar[0] == 0


def test_fit_path_starts_empty_and_grows(dataset):
    model = fit_plmm(dataset, SolverConfig(n_lambda=30))

    assert model.nvar[0] == 0
    assert model.nvar[-1] > 0
    assert model.beta_path.shape == (20, 30)


def test_fit_path_satisfies_kkt(dataset):
    config = SolverConfig(n_lambda=25)
    model = fit_plmm(dataset, config)
    Xstd = standardize(dataset.X)
    pre = build_preconditioner(model.spectrum, model.eta)
    rot = rotate(pre, Xstd, dataset.y - dataset.y.mean())

    assert check_kkt(rot.Xrot, rot.yrot, model.beta_std_path, model.lambdas, rot.active) <= 1e-4


def test_fit_path_back_transform(dataset):
    model = fit_plmm(dataset, SolverConfig(n_lambda=20))
    Xstd = standardize(dataset.X)

    scale = model.rot_scales * model.train_scales
    np.testing.assert_allclose(model.beta_path, model.beta_std_path / scale[:, None])
    np.testing.assert_allclose(model.intercepts, dataset.y.mean() - Xstd.centers @ model.beta_path)


def test_fit_with_eta_zero_is_plain_lasso(dataset):
    model = fit_plmm(dataset, SolverConfig(eta=0.0, n_lambda=30, tol=1e-10))
    Xstd = standardize(dataset.X)
    y_centered = dataset.y - dataset.y.mean()

    _, reference, _ = lasso_path(Xstd.values, y_centered, alphas=model.lambdas, tol=1e-10, max_iter=100_000)

    assert model.eta == 0.0
    np.testing.assert_allclose(model.beta_std_path, reference, atol=1e-6)


def test_fit_with_explicit_lambdas(dataset):
    lambdas = np.array([1.0, 0.5, 0.1])

    model = fit_plmm(dataset, SolverConfig(), lambdas=lambdas)

    np.testing.assert_array_equal(model.lambdas, lambdas)


def test_fit_residuals_match_linear_predictor(dataset):
    model = fit_plmm(dataset, SolverConfig(n_lambda=20))

    np.testing.assert_allclose(model.residuals_path, dataset.y[:, None] - predict_linear(model, dataset.X), atol=1e-10)


# ============== Tests for predict_linear ==============


def test_predict_linear_at_lambda_max_is_mean(dataset):
    model = fit_plmm(dataset, SolverConfig(n_lambda=20))

    np.testing.assert_allclose(predict_linear(model, dataset.X, 0), dataset.y.mean())


def test_predict_linear_column_mismatch(dataset):
    model = fit_plmm(dataset, SolverConfig(n_lambda=5))

    with pytest.raises(DataValidationError):
        predict_linear(model, dataset.X[:, :5], 0)


@pytest.mark.parametrize("index, error", [(5, DataValidationError), (-1, DataValidationError), (1.0, TypeError)])
def test_predict_linear_invalid_index(dataset, index, error):
    model = fit_plmm(dataset, SolverConfig(n_lambda=5))

    with pytest.raises(error):
        predict_linear(model, dataset.X, index)


# ============== Tests for model files ==============


def test_model_save_and_load(dataset, tmp_path):
    model = fit_plmm(dataset, SolverConfig(n_lambda=10))
    file_path = tmp_path / "model.json"

    sidecar = model.save(file_path)
    loaded = PlmmModel.load(file_path)

    assert sidecar == tmp_path / "model.npz"
    assert loaded.eta == model.eta
    assert loaded.row_ids == model.row_ids
    assert loaded.data_hash == model.data_hash
    np.testing.assert_array_equal(loaded.beta_path, model.beta_path)
    np.testing.assert_array_equal(loaded.residuals_path, model.residuals_path)
    np.testing.assert_array_equal(predict_linear(loaded, dataset.X), predict_linear(model, dataset.X))


def test_model_load_wrong_version(dataset, tmp_path):
    model = fit_plmm(dataset, SolverConfig(n_lambda=5))
    file_path = tmp_path / "model.json"
    model.save(file_path)
    file_path.write_text(file_path.read_text().replace('"format_version": 1', '"format_version": 99'))

    with pytest.raises(DataValidationError):
        PlmmModel.load(file_path)


def test_model_load_missing_sidecar(dataset, tmp_path):
    model = fit_plmm(dataset, SolverConfig(n_lambda=5))
    file_path = tmp_path / "model.json"
    model.save(file_path).unlink()

    with pytest.raises(FileNotFoundError):
        PlmmModel.load(file_path)


def test_lambda_path_record():
    path = LambdaPath(lambdas=np.array([2.0, 1.0]), min_ratio=0.5)

    assert path.n_lambda == 2
    assert path.lambda_max == 2.0


# ============== Signal recovery on simulated data ==============


@pytest.mark.slow
def test_true_signals_selected_at_cv_minimum():
    recovered = 0
    for seed in range(30):
        data = generate_correlated_data(seed=seed)
        validator = CrossValidator(data.to_dataset(), assign_folds(data.n, 5, seed))
        result = validator.run(CVStrategy.FULL)
        selected = np.flatnonzero(validator.full_model.beta_path[:, result.index_min])
        recovered += set(data.signals).issubset(selected)

    assert recovered >= 25
