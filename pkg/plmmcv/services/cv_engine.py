import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Optional

import numpy as np

from plmmcv.models import CvResult, Dataset, FoldAssignment, LambdaPath, PlmmModel, center_outcome, standardize
from plmmcv.utils import BlupMode, CVStrategy, DataValidationError, SolverConfig

from .blup import FullDataContext, predict_blup
from .lasso_path import CoordinateDescentSolver, fit_path
from .pipeline import PreparedData, fit_plmm, prepare
from .rotation import rotate

logger = logging.getLogger(__name__)


def assign_folds(n: int, K: int = 5, seed: int = 0) -> FoldAssignment:
    """
    Draw a balanced random partition of n rows into K folds.

    Args:
        n (int): Number of rows.
        K (int): Number of folds, 2 ≤ K ≤ n.
        seed (int): Seed of the permutation.

    Returns:
        FoldAssignment: Fold ids in 1..K; sizes differ by at most one.

    Raises:
        TypeError: If an argument is not an integer.
        DataValidationError: If K is out of range.
    """
    for name, value in (("n", n), ("K", K), ("seed", seed)):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise TypeError(f"'{name}' must be an integer.", f"Current type: {type(value)}.")
    if not 2 <= K <= n:
        raise DataValidationError(f"'K' must be between 2 and n={n}. Current value: {K}.")

    rng = np.random.default_rng(seed)
    fold_of = np.empty(n, dtype=int)
    fold_of[rng.permutation(n)] = np.arange(n) % K + 1
    return FoldAssignment(fold_of=fold_of, K=int(K), seed=int(seed))


def select_lambda(cve: np.ndarray, cvse: np.ndarray, lambdas: np.ndarray) -> tuple[int, int]:
    """
    Pick the penalty minimizing the cross-validation error and the one-standard-error penalty.

    Ties at the minimum go to the larger penalty. The one-standard-error
    choice is the largest penalty whose error is within cvse of the minimum.

    Args:
        cve (np.ndarray): Per-λ cross-validation error.
        cvse (np.ndarray): Per-λ standard error.
        lambdas (np.ndarray): Descending penalty values.

    Returns:
        tuple[int, int]: Path indices of λ_min and λ_1se.

    Raises:
        DataValidationError: If the vectors are empty or misaligned.
    """
    cve = np.asarray(cve, dtype=float)
    cvse = np.asarray(cvse, dtype=float)
    if cve.size == 0 or cve.shape != cvse.shape or cve.shape != np.shape(lambdas):
        raise DataValidationError("'cve', 'cvse' and 'lambdas' must be nonempty and aligned.")

    index_min = int(np.argmin(cve))
    threshold = cve[index_min] + cvse[index_min]
    index_1se = int(np.flatnonzero(cve <= threshold)[0])
    return index_min, index_1se


def fit_fold(
    dataset: Dataset,
    train_idx: np.ndarray,
    lambdas: np.ndarray,
    config: SolverConfig,
) -> PlmmModel:
    """
    Fit one fold of full cross-validation from the training rows alone.

    Standardization, kinship, eigendecomposition, η and rotation are all
    recomputed from the rows in 'train_idx'.

    Args:
        dataset (Dataset): The whole dataset.
        train_idx (np.ndarray): Fold-training rows.
        lambdas (np.ndarray): Shared penalty values.
        config (SolverConfig): Numeric settings.

    Returns:
        PlmmModel: The fold model.
    """
    return fit_plmm(dataset.subset(train_idx), config, lambdas=lambdas)


def _cv_errors(y_reference: np.ndarray, predictions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    errors = (y_reference[:, None] - predictions) ** 2
    cve = errors.mean(axis=0)
    cvse = errors.std(axis=0, ddof=1) / np.sqrt(errors.shape[0])
    return cve, cvse


class CrossValidator:
    """
    Runs K-fold cross-validation under one or more strategies on a shared penalty grid.

    The shared grid and the reported model sizes come from one fit on all rows.
    Every strategy uses the same fold assignment.

    Attributes:
        dataset (Dataset): The data.
        folds (FoldAssignment): The fold partition.
        config (SolverConfig): Numeric settings.
        threads (int): Worker count for the folds.
        blup_mode (BlupMode): BLUP scaling for held-out predictions of the full strategy.
    """

    def __init__(
        self,
        dataset: Dataset,
        folds: FoldAssignment,
        config: Optional[SolverConfig] = None,
        threads: int = 1,
        blup_mode: BlupMode = BlupMode.CORRECT,
        full_model: Optional[PlmmModel] = None,
    ):
        """
        Initializes an instance of the CrossValidator class.

        Args:
            dataset (Dataset): The data.
            folds (FoldAssignment): The fold partition.
            config (Optional[SolverConfig]): Numeric settings.
            threads (int): Worker count for the folds.
            blup_mode (BlupMode): BLUP scaling for the full strategy.
            full_model (Optional[PlmmModel]): An existing fit on all rows to reuse for the grid.

        Raises:
            DataValidationError: If the folds do not match the data or leave fewer than 2 training rows.
            ValueError: If 'threads' is smaller than 1.
        """
        if folds.n != dataset.n:
            raise DataValidationError(f"Fold assignment covers {folds.n} rows, the dataset has {dataset.n}.")
        smallest_train = dataset.n - int(folds.sizes().max())
        if smallest_train < 2:
            raise DataValidationError(f"Every fold needs at least 2 training rows. Smallest fold-training size: {smallest_train}.")
        if threads < 1:
            raise ValueError("'threads' must be at least 1.", f"Current value: {threads}.")

        self.dataset = dataset
        self.folds = folds
        self.config = config or SolverConfig()
        self.threads = threads
        self.blup_mode = BlupMode.parse(blup_mode)
        self._full_model: Optional[PlmmModel] = full_model
        self._prepared: Optional[PreparedData] = None

    @property
    def full_model(self) -> PlmmModel:
        """
        PlmmModel: The fit on all rows that defines the shared grid.
        """
        if self._full_model is None:
            self._full_model = fit_plmm(self.dataset, self.config)
        return self._full_model

    @property
    def prepared(self) -> PreparedData:
        """
        PreparedData: Full-data decomposition, η and rotation, reused by the inner and outer strategies.
        """
        if self._prepared is None:
            config = self.config.with_eta(self.full_model.eta)
            self._prepared = prepare(self.dataset.X, self.dataset.y, config, spectrum=self.full_model.spectrum)
        return self._prepared

    @property
    def lambdas(self) -> np.ndarray:
        """
        np.ndarray: The shared penalty grid.
        """
        return self.full_model.lambdas

    def _solver(self) -> CoordinateDescentSolver:
        return CoordinateDescentSolver(tol=self.config.tol, max_iter=self.config.max_iter)

    def _full_fold(self, fold: int) -> tuple[np.ndarray, float]:
        train = self.folds.train_indices(fold)
        test = self.folds.test_indices(fold)
        model = fit_fold(self.dataset, train, self.lambdas, self.config)
        context = None
        if self.blup_mode is BlupMode.INCORRECT:
            context = FullDataContext(Xstd=self.prepared.Xstd, train_idx=train, test_idx=test)
        predictions = predict_blup(model, self.dataset.X[test], mode=self.blup_mode, full_data_ctx=context)
        return predictions, model.eta

    def _inner_fold(self, fold: int) -> tuple[np.ndarray, float]:
        train = self.folds.train_indices(fold)
        test = self.folds.test_indices(fold)
        train_data = self.dataset.subset(train)

        Xstd = standardize(train_data.X, self.config.variance_threshold)
        y_centered, _ = center_outcome(train_data.y)
        pre = self.prepared.pre.subset_rows(train)
        rot = rotate(pre, Xstd, y_centered, self.config.variance_threshold)
        path = LambdaPath(lambdas=self.lambdas, min_ratio=float(self.lambdas[-1] / self.lambdas[0]))
        model = fit_path(
            rot,
            path,
            train_data.y,
            Xstd,
            self.prepared.eta,
            solver=self._solver(),
            feature_names=train_data.feature_names,
            row_ids=train_data.row_ids,
        )
        return predict_blup(model, self.dataset.X[test]), model.eta

    def _outer_fold(self, fold: int) -> tuple[np.ndarray, float]:
        train = self.folds.train_indices(fold)
        test = self.folds.test_indices(fold)
        rot = self.prepared.rot

        rescaled = standardize(rot.Xrot[train], self.config.variance_threshold, center=False)
        active = rot.active & rescaled.active
        path, _ = self._solver().solve(rescaled.values, rot.yrot[train], self.lambdas, active=active)

        scales = np.ones(rot.p)
        scales[active] = rescaled.scales[active]
        coefficients = np.where(active[:, None], path / scales[:, None], 0.0)
        return rot.Xrot[test] @ coefficients, self.prepared.eta

    def _run_fold(self, strategy: CVStrategy, fold: int) -> tuple[np.ndarray, float]:
        runner = {
            CVStrategy.FULL: self._full_fold,
            CVStrategy.INNER: self._inner_fold,
            CVStrategy.OUTER: self._outer_fold,
        }[strategy]
        try:
            predictions, eta = runner(fold)
        except Exception as e:
            e.add_note(f"Cross-validation strategy '{strategy.value}', fold {fold} of {self.folds.K}.")
            raise
        logger.info("%s CV fold %d/%d done (eta=%.4f)", strategy.value, fold, self.folds.K, eta)
        return predictions, eta

    def run(self, strategy: CVStrategy) -> CvResult:
        """
        Cross-validate under one strategy.

        Args:
            strategy (CVStrategy): Which steps are repeated per fold.

        Returns:
            CvResult: Error curve, selected penalties and held-out predictions.
        """
        strategy = CVStrategy.parse(strategy)
        lambdas = self.lambdas
        if strategy is not CVStrategy.FULL or self.blup_mode is BlupMode.INCORRECT:
            _ = self.prepared
        fold_ids = list(range(1, self.folds.K + 1))

        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            outcomes = list(executor.map(lambda k: self._run_fold(strategy, k), fold_ids))

        predictions = np.zeros((self.dataset.n, len(lambdas)))
        for k, (fold_predictions, _) in zip(fold_ids, outcomes, strict=True):
            predictions[self.folds.test_indices(k)] = fold_predictions

        y_reference = self.prepared.rot.yrot if strategy is CVStrategy.OUTER else np.array(self.dataset.y)
        cve, cvse = _cv_errors(y_reference, predictions)
        index_min, index_1se = select_lambda(cve, cvse, lambdas)

        return CvResult(
            strategy=strategy,
            lambdas=lambdas,
            cve=cve,
            cvse=cvse,
            index_min=index_min,
            index_1se=index_1se,
            nvar=self.full_model.nvar,
            predictions=predictions,
            y_reference=y_reference,
            folds=self.folds,
            fold_etas=np.array([eta for _, eta in outcomes]),
        )

    def run_all(self, strategies: Iterable[CVStrategy]) -> dict[CVStrategy, CvResult]:
        """
        Cross-validate under several strategies on the same folds and grid.

        Args:
            strategies (Iterable[CVStrategy]): Strategies to run.

        Returns:
            dict[CVStrategy, CvResult]: One result per strategy, in the given order.
        """
        return {CVStrategy.parse(s): self.run(s) for s in strategies}


def cross_validate(
    dataset: Dataset,
    K: int = 5,
    seed: int = 0,
    strategy: CVStrategy = CVStrategy.FULL,
    config: Optional[SolverConfig] = None,
    threads: int = 1,
    blup_mode: BlupMode = BlupMode.CORRECT,
) -> CvResult:
    """
    K-fold cross-validation of the penalized linear mixed model.

    Args:
        dataset (Dataset): The data.
        K (int): Number of folds.
        seed (int): Seed of the fold assignment.
        strategy (CVStrategy): Full, inner or outer.
        config (Optional[SolverConfig]): Numeric settings.
        threads (int): Worker count for the folds.
        blup_mode (BlupMode): BLUP scaling for the full strategy.

    Returns:
        CvResult: The cross-validation result.
    """
    folds = assign_folds(dataset.n, K, seed)
    return CrossValidator(dataset, folds, config, threads, blup_mode).run(strategy)
