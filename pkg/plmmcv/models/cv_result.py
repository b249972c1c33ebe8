from dataclasses import dataclass
from typing import Any

import numpy as np

from plmmcv.utils import CVStrategy


@dataclass(frozen=True)
class FoldAssignment:
    """
    Partition of the observations into K cross-validation folds.

    Attributes:
        fold_of (np.ndarray): Length-n fold ids in 1..K.
        K (int): Number of folds.
        seed (int): Seed the partition was drawn with.
    """

    fold_of: np.ndarray
    K: int
    seed: int

    @property
    def n(self) -> int:
        """
        int: Number of observations.
        """
        return len(self.fold_of)

    def sizes(self) -> np.ndarray:
        """
        Count the members of every fold.

        Returns:
            np.ndarray: Length-K fold sizes, fold 1 first.
        """
        return np.bincount(self.fold_of, minlength=self.K + 1)[1:]

    def test_indices(self, fold: int) -> np.ndarray:
        """
        Rows held out in a fold.

        Args:
            fold (int): Fold id in 1..K.

        Returns:
            np.ndarray: Sorted row indices.
        """
        return np.flatnonzero(self.fold_of == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        """
        Rows used for fitting in a fold.

        Args:
            fold (int): Fold id in 1..K.

        Returns:
            np.ndarray: Sorted row indices.
        """
        return np.flatnonzero(self.fold_of != fold)


@dataclass(frozen=True)
class CvResult:
    """
    Cross-validation error along a shared penalty path for one strategy.

    Attributes:
        strategy (CVStrategy): How the folds were preconditioned.
        lambdas (np.ndarray): Shared penalty path.
        cve (np.ndarray): Per-λ mean squared held-out error.
        cvse (np.ndarray): Per-λ standard error of cve.
        index_min (int): Path index minimizing cve.
        index_1se (int): Path index of the largest λ within one standard error of the minimum.
        nvar (np.ndarray): Per-λ support size of the full-data fit.
        predictions (np.ndarray): n x L held-out predictions.
        y_reference (np.ndarray): Length-n responses the predictions are scored against
            (raw y, or the rotated ỹ for the outer strategy).
        folds (FoldAssignment): The fold partition.
        fold_etas (np.ndarray): η used by every fold, fold 1 first.
    """

    strategy: CVStrategy
    lambdas: np.ndarray
    cve: np.ndarray
    cvse: np.ndarray
    index_min: int
    index_1se: int
    nvar: np.ndarray
    predictions: np.ndarray
    y_reference: np.ndarray
    folds: FoldAssignment
    fold_etas: np.ndarray

    @property
    def lambda_min(self) -> float:
        """
        float: Penalty value minimizing the cross-validation error.
        """
        return float(self.lambdas[self.index_min])

    @property
    def lambda_1se(self) -> float:
        """
        float: Largest penalty value within one standard error of the minimum.
        """
        return float(self.lambdas[self.index_1se])

    @property
    def nvar_at_min(self) -> int:
        """
        int: Support size at lambda_min.
        """
        return int(self.nvar[self.index_min])

    @property
    def nvar_at_1se(self) -> int:
        """
        int: Support size at lambda_1se.
        """
        return int(self.nvar[self.index_1se])

    def squared_errors(self) -> np.ndarray:
        """
        Per-observation squared held-out errors.

        Returns:
            np.ndarray: n x L matrix.
        """
        return (self.y_reference[:, None] - self.predictions) ** 2

    def recompute_cve(self) -> np.ndarray:
        """
        Recompute the cross-validation error from the stored predictions.

        Returns:
            np.ndarray: Per-λ mean squared error.
        """
        return self.squared_errors().mean(axis=0)

    def summary(self) -> dict[str, Any]:
        """
        Report the selected penalties and model sizes.

        Returns:
            dict[str, Any]: λ_min, λ_1se, their indices, NVAR at both and the minimum cve.
        """
        return {
            "strategy": self.strategy.value,
            "lambda_min": self.lambda_min,
            "lambda_1se": self.lambda_1se,
            "index_min": self.index_min,
            "index_1se": self.index_1se,
            "nvar_min": self.nvar_at_min,
            "nvar_1se": self.nvar_at_1se,
            "cve_min": float(self.cve[self.index_min]),
            "cvse_min": float(self.cvse[self.index_min]),
            "K": self.folds.K,
            "seed": self.folds.seed,
        }
