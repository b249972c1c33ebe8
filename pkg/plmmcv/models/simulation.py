from dataclasses import asdict, dataclass

import numpy as np

from .dataset import Dataset


@dataclass(frozen=True)
class SimDataset:
    """
    Synthetic data with known ground truth.

    Attributes:
        X (np.ndarray): n x p design.
        y (np.ndarray): Length-n outcome, Xβ + Zγ + ε.
        beta_true (np.ndarray): Length-p true coefficients.
        Z (np.ndarray): n x B batch indicator matrix.
        gamma (np.ndarray): Length-B batch effects.
        batch_id (np.ndarray): Length-n batch index in 0..B-1.
        seed (int): Seed of the generating stream.
    """

    X: np.ndarray
    y: np.ndarray
    beta_true: np.ndarray
    Z: np.ndarray
    gamma: np.ndarray
    batch_id: np.ndarray
    seed: int

    @property
    def n(self) -> int:
        """
        int: Number of observations.
        """
        return self.X.shape[0]

    @property
    def p(self) -> int:
        """
        int: Number of features.
        """
        return self.X.shape[1]

    @property
    def signals(self) -> np.ndarray:
        """
        np.ndarray: Indices of the nonzero true coefficients.
        """
        return np.flatnonzero(self.beta_true)

    def to_dataset(self) -> Dataset:
        """
        Drop the ground truth and keep the observable part.

        Returns:
            Dataset: X and y with default feature names.
        """
        return Dataset(X=self.X, y=self.y)


@dataclass(frozen=True)
class SimMetrics:
    """
    Selection and prediction quality of one fitted model against the ground truth.

    Attributes:
        tdr (float): Share of true signals selected.
        fdr (float): Share of selected features that are nulls, 0 when nothing is selected.
        nvar (int): Number of selected features.
        rsee (float): ‖β̂ − β*‖ on the original scale.
        mspe (float): Mean squared prediction error on held-out rows.
        cve (float): Cross-validation error at the selected λ (NaN when not applicable).
    """

    tdr: float
    fdr: float
    nvar: int
    rsee: float
    mspe: float
    cve: float = float("nan")

    def to_dict(self) -> dict[str, float]:
        """
        Represent the metrics as a plain dictionary.

        Returns:
            dict[str, float]: One entry per metric.
        """
        return asdict(self)
