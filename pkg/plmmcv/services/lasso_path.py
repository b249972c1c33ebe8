import logging
from typing import Optional

import numpy as np

from plmmcv.models import LambdaPath, PlmmModel, RotatedData, Spectrum, StandardizedMatrix, center_outcome
from plmmcv.utils import ConvergenceError, DataValidationError

logger = logging.getLogger(__name__)


def soft_threshold(x: np.ndarray, t: float) -> np.ndarray:
    """
    Soft-thresholding operator sign(x)·max(|x| − t, 0).

    Args:
        x (np.ndarray): Input value(s).
        t (float): Threshold.

    Returns:
        np.ndarray: Thresholded value(s).
    """
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def lasso_objective(X: np.ndarray, y: np.ndarray, beta: np.ndarray, lam: float, penalized: Optional[np.ndarray] = None) -> float:
    """
    Penalized objective ‖y − Xβ‖²/(2n) + λ‖β‖₁.

    Args:
        X (np.ndarray): n x p design.
        y (np.ndarray): Length-n response.
        beta (np.ndarray): Length-p coefficients.
        lam (float): Penalty value.
        penalized (Optional[np.ndarray]): Mask of penalized coefficients; all by default.

    Returns:
        float: The objective value.
    """
    r = y - X @ beta
    l1 = np.abs(beta if penalized is None else beta[penalized]).sum()
    return float(r @ r / (2 * len(y)) + lam * l1)


def lambda_max(X: np.ndarray, y: np.ndarray, active: Optional[np.ndarray] = None) -> float:
    """
    Smallest penalty with an all-zero solution, maxⱼ |xⱼᵀy|/n over the active columns.

    Args:
        X (np.ndarray): n x p design.
        y (np.ndarray): Length-n response.
        active (Optional[np.ndarray]): Columns to consider; all by default.

    Returns:
        float: λ_max.
    """
    scores = np.abs(X.T @ y) / len(y)
    if active is not None:
        scores = scores[active]
    return float(scores.max()) if scores.size else 0.0


def make_lambda_path(rot: RotatedData, n_lambda: int = 100, min_ratio: float = 0.05) -> LambdaPath:
    """
    Build a geometric penalty grid from λ_max down to λ_max·min_ratio.

    Args:
        rot (RotatedData): Rotated data.
        n_lambda (int): Number of penalty values.
        min_ratio (float): Ratio of the last to the first value.

    Returns:
        LambdaPath: The descending grid.

    Raises:
        DataValidationError: If no feature is active or the rotated outcome is
            orthogonal to every active column.
    """
    if not np.any(rot.active):
        raise DataValidationError("The penalty path needs at least one active feature.")

    lam_max = lambda_max(rot.Xrot, rot.yrot, rot.active)
    scale = max(1.0, float(np.sqrt(np.mean(rot.yrot**2))))
    if lam_max <= 1e-12 * scale:
        raise DataValidationError("Degenerate penalty path: the outcome is orthogonal to every active feature (λ_max = 0).")

    if n_lambda == 1:
        lambdas = np.array([lam_max])
    else:
        lambdas = np.geomspace(lam_max, lam_max * min_ratio, n_lambda)
    logger.debug("Penalty path: lambda_max=%.6g, %d values, min_ratio=%g", lam_max, n_lambda, min_ratio)
    return LambdaPath(lambdas=lambdas, min_ratio=float(min_ratio))


class CoordinateDescentSolver:
    """
    Cyclic coordinate descent for ‖y − Xβ‖²/(2n) + λ‖β‖₁ along a descending penalty path.

    Every solve alternates full sweeps over the candidate coordinates with
    sweeps restricted to the current support. A penalty value is converged when
    a full sweep changes no coefficient by tol or more.

    Attributes:
        tol (float): Convergence tolerance on the largest coefficient change in a sweep.
        max_iter (int): Maximum number of sweeps per penalty value.
    """

    def __init__(self, tol: float = 1e-7, max_iter: int = 100_000):
        """
        Initializes an instance of the CoordinateDescentSolver class.

        Args:
            tol (float): Convergence tolerance.
            max_iter (int): Maximum number of sweeps per penalty value.

        Raises:
            ValueError: If 'tol' is not positive or 'max_iter' is smaller than 1.
        """
        if tol <= 0:
            raise ValueError("'tol' must be positive.", f"Current value: {tol}.")
        if max_iter < 1:
            raise ValueError("'max_iter' must be at least 1.", f"Current value: {max_iter}.")
        self.tol = tol
        self.max_iter = max_iter

    def solve_single(
        self,
        X: np.ndarray,
        y: np.ndarray,
        lam: float,
        beta_init: Optional[np.ndarray] = None,
        active: Optional[np.ndarray] = None,
        unpenalized: Optional[np.ndarray] = None,
        trace: bool = False,
    ) -> tuple[np.ndarray, int, list[float]]:
        """
        Solve one penalty value.

        Args:
            X (np.ndarray): n x p design.
            y (np.ndarray): Length-n response.
            lam (float): Penalty value.
            beta_init (Optional[np.ndarray]): Starting coefficients; zero by default.
            active (Optional[np.ndarray]): Columns allowed to move; the others stay at zero.
            unpenalized (Optional[np.ndarray]): Columns updated without the penalty.
            trace (bool): Whether to record the objective after every sweep.

        Returns:
            tuple[np.ndarray, int, list[float]]: Coefficients, number of sweeps and
                the objective trace (empty unless 'trace').

        Raises:
            ConvergenceError: If max_iter sweeps pass without convergence.
        """
        X = np.asfortranarray(X, dtype=float)
        n, p = X.shape
        y = np.asarray(y, dtype=float)
        active = np.ones(p, dtype=bool) if active is None else np.asarray(active, dtype=bool)
        free = np.zeros(p, dtype=bool) if unpenalized is None else np.asarray(unpenalized, dtype=bool)
        active = active | free

        beta = np.zeros(p) if beta_init is None else np.array(beta_init, dtype=float)
        beta[~active] = 0.0
        r = y - X @ beta
        col_sq = np.einsum("ij,ij->j", X, X) / n
        candidates = np.flatnonzero(active & (col_sq > 0))

        objectives: list[float] = []
        penalized = ~free

        def sweep(coords: np.ndarray) -> float:
            nonlocal r
            max_change = 0.0
            for j in coords:
                old = beta[j]
                xj = X[:, j]
                rho = xj @ r / n + col_sq[j] * old
                if free[j]:
                    new = rho / col_sq[j]
                elif abs(rho) <= lam * (1.0 + 1e-12):
                    # |xⱼᵀy|/n == λ_max up to rounding
                    new = 0.0
                else:
                    new = float(soft_threshold(rho, lam)) / col_sq[j]
                delta = new - old
                if delta != 0.0:
                    r -= xj * delta
                    beta[j] = new
                    max_change = max(max_change, abs(delta))
            if trace:
                objectives.append(float(r @ r / (2 * n) + lam * np.abs(beta[penalized]).sum()))
            return max_change

        sweeps = 0
        while True:
            change = sweep(candidates)
            sweeps += 1
            if change < self.tol:
                return beta, sweeps, objectives

            while True:
                support = candidates[(beta[candidates] != 0.0) | free[candidates]]
                change = sweep(support)
                sweeps += 1
                if change < self.tol:
                    break
                if sweeps >= self.max_iter:
                    raise ConvergenceError(f"Coordinate descent did not converge in {self.max_iter} sweeps at lambda={lam:.6g}.", lam=lam)

            if sweeps >= self.max_iter:
                raise ConvergenceError(f"Coordinate descent did not converge in {self.max_iter} sweeps at lambda={lam:.6g}.", lam=lam)

    def solve(
        self,
        X: np.ndarray,
        y: np.ndarray,
        lambdas: np.ndarray,
        active: Optional[np.ndarray] = None,
        unpenalized: Optional[np.ndarray] = None,
        warm_start: bool = True,
    ) -> tuple[np.ndarray, np.ndarray]:
        """
        Solve every penalty value of a descending path.

        Args:
            X (np.ndarray): n x p design.
            y (np.ndarray): Length-n response.
            lambdas (np.ndarray): Descending penalty values.
            active (Optional[np.ndarray]): Columns allowed to move.
            unpenalized (Optional[np.ndarray]): Columns updated without the penalty.
            warm_start (bool): Start each value from the previous solution.

        Returns:
            tuple[np.ndarray, np.ndarray]: p x L coefficients and sweeps per value.

        Raises:
            ConvergenceError: If any penalty value does not converge.
        """
        X = np.asfortranarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        lambdas = np.asarray(lambdas, dtype=float)
        p = X.shape[1]

        path = np.zeros((p, len(lambdas)))
        sweeps = np.zeros(len(lambdas), dtype=int)
        beta = np.zeros(p)
        for l, lam in enumerate(lambdas):
            start = beta if warm_start else None
            beta, sweeps[l], _ = self.solve_single(X, y, lam, beta_init=start, active=active, unpenalized=unpenalized)
            path[:, l] = beta
        return path, sweeps


def check_kkt(X: np.ndarray, y: np.ndarray, path: np.ndarray, lambdas: np.ndarray, active: Optional[np.ndarray] = None) -> float:
    """
    Largest violation of the lasso optimality conditions along a path.

    For zero coefficients |xⱼᵀr|/n must not exceed λ; for nonzero ones xⱼᵀr/n
    must equal λ·sign(βⱼ).

    Args:
        X (np.ndarray): n x p design the path was fitted on.
        y (np.ndarray): Length-n response.
        path (np.ndarray): p x L coefficients.
        lambdas (np.ndarray): Length-L penalty values.
        active (Optional[np.ndarray]): Columns subject to the conditions; all by default.

    Returns:
        float: The largest violation over all columns and penalty values.
    """
    n = len(y)
    mask = np.ones(X.shape[1], dtype=bool) if active is None else np.asarray(active, dtype=bool)
    grad = X.T @ (y[:, None] - X @ path) / n
    grad, path = grad[mask], path[mask]
    zero = path == 0.0
    violation = np.where(zero, np.maximum(np.abs(grad) - lambdas, 0.0), np.abs(grad - lambdas * np.sign(path)))
    return float(violation.max()) if violation.size else 0.0


def fit_path(
    rot: RotatedData,
    path: LambdaPath,
    y: np.ndarray,
    Xstd: StandardizedMatrix,
    eta: float,
    solver: Optional[CoordinateDescentSolver] = None,
    spectrum: Optional[Spectrum] = None,
    feature_names: tuple[str, ...] = (),
    row_ids: tuple[str, ...] = (),
    data_hash: str = "",
) -> PlmmModel:
    """
    Fit the lasso path on rotated data and map it back to the original feature scale.

    No intercept column enters the rotated design: the intercept is fixed at
    the training mean of y. A coefficient b on the rotated scale maps to
    b / (rot_scale·train_scale) on the original scale.

    Args:
        rot (RotatedData): Rotated, rescaled design and rotated centered outcome.
        path (LambdaPath): Descending penalty grid.
        y (np.ndarray): Raw training outcome.
        Xstd (StandardizedMatrix): Raw-stage standardized training design.
        eta (float): Variance ratio the rotation was built with.
        solver (Optional[CoordinateDescentSolver]): Solver; default settings when omitted.
        spectrum (Optional[Spectrum]): Spectrum to keep on the model.
        feature_names (tuple[str, ...]): Feature labels.
        row_ids (tuple[str, ...]): Training row labels.
        data_hash (str): Content hash of the training data.

    Returns:
        PlmmModel: The fitted path.

    Raises:
        DataValidationError: If the training outcome does not match the design rows.
        ConvergenceError: If any penalty value does not converge.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (Xstd.n,):
        raise DataValidationError(f"'y' must have length {Xstd.n}. Current shape: {y.shape}.")
    solver = solver or CoordinateDescentSolver()

    beta_std_path, iterations = solver.solve(rot.Xrot, rot.yrot, path.lambdas, active=rot.active)
    beta_std_path[~rot.active] = 0.0

    stage_scale = np.ones(Xstd.p)
    stage_scale[rot.active] = rot.rot_scales[rot.active]
    beta_train_std = beta_std_path / stage_scale[:, None]
    beta_train_std[~rot.active] = 0.0

    train_scale = np.ones(Xstd.p)
    train_scale[rot.active] = Xstd.scales[rot.active]
    beta_path = beta_train_std / train_scale[:, None]

    y_centered, y_mean = center_outcome(y)
    intercepts = y_mean - Xstd.centers @ beta_path
    residuals_path = y_centered[:, None] - Xstd.values @ beta_train_std

    logger.debug(
        "Fitted path: eta=%.4f, lambda_max=%.6g, sweeps=%s, max KKT violation=%.2e",
        eta,
        path.lambda_max,
        iterations.tolist(),
        check_kkt(rot.Xrot, rot.yrot, beta_std_path, path.lambdas, rot.active),
    )

    return PlmmModel(
        beta0=y_mean,
        intercepts=intercepts,
        beta_path=beta_path,
        beta_std_path=beta_std_path,
        lambdas=np.array(path.lambdas, dtype=float),
        eta=float(eta),
        train_centers=Xstd.centers,
        train_scales=Xstd.scales,
        train_active=Xstd.active,
        rot_centers=rot.rot_centers,
        rot_scales=rot.rot_scales,
        active=rot.active,
        residuals_path=residuals_path,
        train_X_std=Xstd.values,
        feature_names=tuple(feature_names) or tuple(f"x{j + 1}" for j in range(Xstd.p)),
        row_ids=tuple(row_ids) or tuple(str(i + 1) for i in range(Xstd.n)),
        iterations=iterations,
        data_hash=data_hash,
        spectrum=spectrum,
    )


def predict_linear(model: PlmmModel, X_new: np.ndarray, lambda_index: Optional[int] = None) -> np.ndarray:
    """
    Linear predictor on the original feature scale.

    Args:
        model (PlmmModel): Fitted model.
        X_new (np.ndarray): m x p raw design in the training column order.
        lambda_index (Optional[int]): Path index; every penalty value when omitted.

    Returns:
        np.ndarray: Length-m predictions, or m x L when 'lambda_index' is omitted.

    Raises:
        DataValidationError: If the column count differs from the model or the index is out of range.
    """
    X_new = np.asarray(X_new, dtype=float)
    if X_new.ndim == 1:
        X_new = X_new.reshape(1, -1)
    if X_new.shape[1] != model.p:
        raise DataValidationError(f"Expected {model.p} columns, got {X_new.shape[1]}.")

    if lambda_index is None:
        return model.intercepts + X_new @ model.beta_path
    l = model.check_lambda_index(lambda_index)
    return model.intercepts[l] + X_new @ model.beta_path[:, l]
