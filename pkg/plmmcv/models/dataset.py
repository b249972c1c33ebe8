import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Self, Union

import numpy as np

from plmmcv.utils import DataValidationError

DEFAULT_VARIANCE_THRESHOLD = 1e-10


@dataclass(frozen=True)
class Dataset:
    """
    A numeric design matrix with its outcome.

    Attributes:
        X (np.ndarray): n x p design, rows are observations.
        y (np.ndarray): Length-n outcome.
        feature_names (tuple[str, ...]): Length-p unique column labels.
        row_ids (tuple[str, ...]): Length-n row labels.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...] = ()
    row_ids: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)

        if X.ndim != 2:
            raise DataValidationError(f"'X' must be a 2-dimensional matrix. Current shape: {X.shape}.")
        n, p = X.shape
        if n < 2:
            raise DataValidationError(f"A dataset needs at least 2 rows. Current rows: {n}.")
        if p < 1:
            raise DataValidationError("A dataset needs at least 1 feature column.")
        if y.shape != (n,):
            raise DataValidationError(f"'y' must have length {n}. Current shape: {y.shape}.")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise DataValidationError("Dataset values must be finite (no NaN or Inf).")

        feature_names = tuple(self.feature_names) or tuple(f"x{j + 1}" for j in range(p))
        row_ids = tuple(self.row_ids) or tuple(str(i + 1) for i in range(n))
        if len(feature_names) != p:
            raise DataValidationError(f"Expected {p} feature names, got {len(feature_names)}.")
        if len(set(feature_names)) != p:
            raise DataValidationError("Feature names must be unique.")
        if len(row_ids) != n:
            raise DataValidationError(f"Expected {n} row ids, got {len(row_ids)}.")

        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", feature_names)
        object.__setattr__(self, "row_ids", row_ids)

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

    def subset(self, rows: np.ndarray) -> Self:
        """
        Select a subset of rows.

        Args:
            rows (np.ndarray): Integer row indices.

        Returns:
            Dataset: The row subset, with feature names unchanged.
        """
        rows = np.asarray(rows)
        return type(self)(
            X=self.X[rows],
            y=self.y[rows],
            feature_names=self.feature_names,
            row_ids=tuple(self.row_ids[i] for i in rows),
        )


@dataclass(frozen=True)
class StandardizedMatrix:
    """
    A matrix standardized column-wise, with the parameters used to produce it.

    Attributes:
        values (np.ndarray): n x p standardized values; inactive columns are zero.
        centers (np.ndarray): Length-p subtracted column centers.
        scales (np.ndarray): Length-p column scales (divide-by-n convention).
        active (np.ndarray): Length-p mask, False for screened near-constant columns.
    """

    values: np.ndarray
    centers: np.ndarray
    scales: np.ndarray
    active: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        """
        int: Number of rows.
        """
        return self.values.shape[0]

    @property
    def p(self) -> int:
        """
        int: Number of columns, active or not.
        """
        return self.values.shape[1]

    @property
    def n_active(self) -> int:
        """
        int: Number of active columns.
        """
        return int(np.count_nonzero(self.active))

    def active_values(self) -> np.ndarray:
        """
        Return the standardized values restricted to active columns.

        Returns:
            np.ndarray: n x p_active matrix.
        """
        return self.values[:, self.active]

    def to_json(self) -> dict:
        """
        Represent the standardization parameters as a JSON-compatible dictionary.

        Returns:
            dict: Arrays 'centers', 'scales' and 'active'.
        """
        return {
            "centers": self.centers.tolist(),
            "scales": self.scales.tolist(),
            "active": self.active.tolist(),
        }

    def save_parameters(self, file_path: Union[str, Path]) -> None:
        """
        Write the standardization parameters to a JSON file.

        Args:
            file_path (Union[str, Path]): Destination path.
        """
        Path(file_path).write_text(json.dumps(self.to_json(), indent=2))

    @staticmethod
    def load_parameters(file_path: Union[str, Path]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Read standardization parameters written by save_parameters.

        Args:
            file_path (Union[str, Path]): Source path.

        Returns:
            tuple[np.ndarray, np.ndarray, np.ndarray]: centers, scales and active mask.

        Raises:
            DataValidationError: If a required array is missing or the lengths differ.
        """
        payload = json.loads(Path(file_path).read_text())
        for key in ("centers", "scales", "active"):
            if key not in payload:
                raise DataValidationError(f"Standardization file is missing '{key}'.")
        centers = np.asarray(payload["centers"], dtype=float)
        scales = np.asarray(payload["scales"], dtype=float)
        active = np.asarray(payload["active"], dtype=bool)
        if not centers.shape == scales.shape == active.shape:
            raise DataValidationError("Standardization arrays must have equal length.")
        return centers, scales, active


def standardize(
    X: np.ndarray,
    variance_threshold: float = DEFAULT_VARIANCE_THRESHOLD,
    center: bool = True,
) -> StandardizedMatrix:
    """
    Center and scale every column of a matrix, screening near-constant columns.

    Scales follow the divide-by-n convention, so each active column ends up with
    (1/n)·Σ x² = 1. Without centering, the scale is the column's root mean square
    and the recorded centers are zero.

    Args:
        X (np.ndarray): n x p matrix.
        variance_threshold (float): Columns whose variance (mean square when not
            centering) is at or below this value are marked inactive and zeroed.
        center (bool): Whether to subtract column means.

    Returns:
        StandardizedMatrix: The standardized matrix and its parameters.

    Raises:
        DataValidationError: If X has fewer than 2 rows or is not 2-dimensional.
        ValueError: If 'variance_threshold' is negative.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DataValidationError(f"Expected a 2-dimensional matrix. Current shape: {X.shape}.")
    if X.shape[0] < 2:
        raise DataValidationError(f"Standardization needs at least 2 rows. Current rows: {X.shape[0]}.")
    if variance_threshold < 0:
        raise ValueError("'variance_threshold' must be non-negative.", f"Current value: {variance_threshold}.")

    centers = X.mean(axis=0) if center else np.zeros(X.shape[1])
    deviations = X - centers
    variances = np.mean(deviations**2, axis=0)
    scales = np.sqrt(variances)
    active = variances > variance_threshold

    values = np.zeros_like(X)
    values[:, active] = deviations[:, active] / scales[active]

    return StandardizedMatrix(values=values, centers=centers, scales=scales, active=active)


def center_outcome(y: np.ndarray) -> tuple[np.ndarray, float]:
    """
    Subtract the mean of an outcome vector.

    A second pass removes the mean left over by rounding, which matters when
    the outcome sits far from zero (e.g. an offset of 1e12).

    Args:
        y (np.ndarray): Length-n outcome.

    Returns:
        tuple[np.ndarray, float]: The centered outcome and the mean removed.
    """
    y = np.asarray(y, dtype=float)
    mean = float(y.mean())
    centered = y - mean
    residual = float(centered.mean())
    return centered - residual, mean + residual


def apply_standardization(
    X_new: np.ndarray,
    centers: np.ndarray,
    scales: np.ndarray,
    active: np.ndarray,
) -> np.ndarray:
    """
    Standardize new rows with parameters learned elsewhere.

    Training parameters are applied verbatim, so the result need not have
    column means of zero.

    Args:
        X_new (np.ndarray): m x p matrix in the training column order.
        centers (np.ndarray): Training column centers.
        scales (np.ndarray): Training column scales.
        active (np.ndarray): Training active mask.

    Returns:
        np.ndarray: m x p standardized matrix with inactive columns zeroed.

    Raises:
        DataValidationError: If the column count does not match the parameters.
    """
    X_new = np.asarray(X_new, dtype=float)
    if X_new.ndim == 1:
        X_new = X_new.reshape(1, -1)

    p = len(centers)
    if X_new.shape[1] != p:
        raise DataValidationError(f"Expected {p} columns, got {X_new.shape[1]}.")

    active = np.asarray(active, dtype=bool)
    out = np.zeros_like(X_new)
    out[:, active] = (X_new[:, active] - centers[active]) / scales[active]
    return out

