import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Self, Union

import numpy as np

from plmmcv.utils import DataValidationError

from .spectrum import Spectrum

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class EtaEstimate:
    """
    Maximum-likelihood estimate of η under the null model.

    Attributes:
        eta (float): Estimated variance ratio in [0, eta_max].
        loglik (float): Profile log-likelihood at the estimate.
        tau2 (float): Profiled total variance at the estimate.
    """

    eta: float
    loglik: float
    tau2: float


@dataclass(frozen=True)
class RotatedData:
    """
    Preconditioned design and outcome, with the rotated-stage rescaling.

    Attributes:
        Xrot (np.ndarray): Rotated design, active columns with unit mean square.
        yrot (np.ndarray): Rotated outcome, never rescaled.
        rot_centers (np.ndarray): Rotated-stage centers (zero: the rotated design is only rescaled).
        rot_scales (np.ndarray): Rotated-stage column scales.
        active (np.ndarray): Columns active at both the raw and rotated stage.
    """

    Xrot: np.ndarray
    yrot: np.ndarray
    rot_centers: np.ndarray
    rot_scales: np.ndarray
    active: np.ndarray

    @property
    def n(self) -> int:
        """
        int: Number of rotated rows.
        """
        return self.Xrot.shape[0]

    @property
    def p(self) -> int:
        """
        int: Number of columns.
        """
        return self.Xrot.shape[1]


@dataclass(frozen=True)
class LambdaPath:
    """
    Descending grid of penalty values.

    Attributes:
        lambdas (np.ndarray): Penalty values; lambdas[0] is λ_max.
        min_ratio (float): lambdas[-1] / lambdas[0].
    """

    lambdas: np.ndarray
    min_ratio: float

    @property
    def n_lambda(self) -> int:
        """
        int: Number of penalty values.
        """
        return len(self.lambdas)

    @property
    def lambda_max(self) -> float:
        """
        float: The largest penalty value.
        """
        return float(self.lambdas[0])


@dataclass(frozen=True)
class PlmmModel:
    """
    A fitted penalized linear mixed model along a penalty path.

    Attributes:
        beta0 (float): Intercept on the standardized scale, the training mean of y.
        intercepts (np.ndarray): Length-L original-scale intercepts ȳ − centersᵀβ(λ).
        beta_path (np.ndarray): p x L coefficients on the original feature scale.
        beta_std_path (np.ndarray): p x L coefficients on the rotated-standardized scale.
        lambdas (np.ndarray): Length-L penalty values.
        eta (float): Variance ratio used for the rotation and the BLUP.
        train_centers (np.ndarray): Raw-stage column centers.
        train_scales (np.ndarray): Raw-stage column scales.
        train_active (np.ndarray): Raw-stage active mask.
        rot_centers (np.ndarray): Rotated-stage centers.
        rot_scales (np.ndarray): Rotated-stage scales.
        active (np.ndarray): Features that may enter the fit (both stages).
        residuals_path (np.ndarray): n x L raw-scale training residuals.
        train_X_std (np.ndarray): n x p raw-stage standardized training design.
        feature_names (tuple[str, ...]): Feature labels.
        row_ids (tuple[str, ...]): Training row labels.
        iterations (np.ndarray): Coordinate-descent sweeps per penalty value.
        data_hash (str): Content hash of the training data.
        spectrum (Optional[Spectrum]): Eigendecomposition the rotation was built from.
        selection (dict[str, dict[str, int]]): Per CV strategy, selected path indices
            under keys 'min' and '1se'.
    """

    beta0: float
    intercepts: np.ndarray
    beta_path: np.ndarray
    beta_std_path: np.ndarray
    lambdas: np.ndarray
    eta: float
    train_centers: np.ndarray
    train_scales: np.ndarray
    train_active: np.ndarray
    rot_centers: np.ndarray
    rot_scales: np.ndarray
    active: np.ndarray
    residuals_path: np.ndarray
    train_X_std: np.ndarray
    feature_names: tuple[str, ...]
    row_ids: tuple[str, ...]
    iterations: np.ndarray
    data_hash: str = ""
    spectrum: Optional[Spectrum] = field(default=None, repr=False, compare=False)
    selection: dict[str, dict[str, int]] = field(default_factory=dict)

    @property
    def n_lambda(self) -> int:
        """
        int: Number of penalty values on the path.
        """
        return len(self.lambdas)

    @property
    def p(self) -> int:
        """
        int: Number of features.
        """
        return self.beta_path.shape[0]

    @property
    def n_train(self) -> int:
        """
        int: Number of training observations.
        """
        return self.residuals_path.shape[0]

    @property
    def nvar(self) -> np.ndarray:
        """
        np.ndarray: Number of nonzero coefficients at every penalty value.
        """
        return np.count_nonzero(self.beta_path, axis=0)

    def check_lambda_index(self, lambda_index: int) -> int:
        """
        Validate a path index.

        Args:
            lambda_index (int): Index into the penalty path.

        Returns:
            int: The validated index.

        Raises:
            TypeError: If 'lambda_index' is not an integer.
            DataValidationError: If 'lambda_index' is out of range.
        """
        if isinstance(lambda_index, bool) or not isinstance(lambda_index, (int, np.integer)):
            raise TypeError("'lambda_index' must be an integer.", f"Current type: {type(lambda_index)}.")
        if not 0 <= lambda_index < self.n_lambda:
            raise DataValidationError(f"'lambda_index' must be in [0, {self.n_lambda - 1}]. Current value: {lambda_index}.")
        return int(lambda_index)

    def to_json(self) -> dict[str, Any]:
        """
        Represent the model as a JSON-compatible dictionary, without the sidecar arrays.

        Returns:
            dict[str, Any]: The serializable model content.
        """
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "beta0": self.beta0,
            "intercepts": self.intercepts.tolist(),
            "beta_path": self.beta_path.tolist(),
            "beta_std_path": self.beta_std_path.tolist(),
            "lambdas": self.lambdas.tolist(),
            "eta": self.eta,
            "train_centers": self.train_centers.tolist(),
            "train_scales": self.train_scales.tolist(),
            "train_active": self.train_active.tolist(),
            "rot_centers": self.rot_centers.tolist(),
            "rot_scales": self.rot_scales.tolist(),
            "active": self.active.tolist(),
            "feature_names": list(self.feature_names),
            "iterations": self.iterations.tolist(),
            "data_hash": self.data_hash,
            "selection": self.selection,
        }

    def save(self, file_path: Union[str, Path]) -> Path:
        """
        Write the model as JSON plus a numpy sidecar holding the BLUP inputs.

        Args:
            file_path (Union[str, Path]): Destination of the JSON file; the sidecar
                is written next to it with the '.npz' suffix.

        Returns:
            Path: The path of the sidecar file.
        """
        file_path = Path(file_path)
        sidecar = file_path.with_suffix(".npz")
        file_path.write_text(json.dumps(self.to_json(), indent=2))
        np.savez(
            sidecar,
            residuals_path=self.residuals_path,
            train_X_std=self.train_X_std,
            row_ids=np.asarray(self.row_ids, dtype=str),
        )
        return sidecar

    @classmethod
    def load(cls, file_path: Union[str, Path]) -> Self:
        """
        Read a model written by save.

        Args:
            file_path (Union[str, Path]): Path of the JSON file.

        Returns:
            PlmmModel: The loaded model (without spectrum).

        Raises:
            FileNotFoundError: If the JSON file or its sidecar does not exist.
            DataValidationError: If the file is not a model of a supported version.
        """
        file_path = Path(file_path)
        sidecar = file_path.with_suffix(".npz")
        if not file_path.is_file():
            raise FileNotFoundError(f"'{file_path}' file does not exist.")
        if not sidecar.is_file():
            raise FileNotFoundError(f"Model sidecar '{sidecar}' does not exist.")

        payload = json.loads(file_path.read_text())
        if payload.get("format_version") != MODEL_FORMAT_VERSION:
            raise DataValidationError(f"'{file_path}' is not a supported model file.")

        with np.load(sidecar) as arrays:
            residuals_path = arrays["residuals_path"]
            train_X_std = arrays["train_X_std"]
            row_ids = tuple(str(v) for v in arrays["row_ids"])

        p = len(payload["feature_names"])
        return cls(
            beta0=float(payload["beta0"]),
            intercepts=np.asarray(payload["intercepts"], dtype=float),
            beta_path=np.asarray(payload["beta_path"], dtype=float).reshape(p, -1),
            beta_std_path=np.asarray(payload["beta_std_path"], dtype=float).reshape(p, -1),
            lambdas=np.asarray(payload["lambdas"], dtype=float),
            eta=float(payload["eta"]),
            train_centers=np.asarray(payload["train_centers"], dtype=float),
            train_scales=np.asarray(payload["train_scales"], dtype=float),
            train_active=np.asarray(payload["train_active"], dtype=bool),
            rot_centers=np.asarray(payload["rot_centers"], dtype=float),
            rot_scales=np.asarray(payload["rot_scales"], dtype=float),
            active=np.asarray(payload["active"], dtype=bool),
            residuals_path=residuals_path,
            train_X_std=train_X_std,
            feature_names=tuple(payload["feature_names"]),
            row_ids=row_ids,
            iterations=np.asarray(payload["iterations"], dtype=int),
            data_hash=payload.get("data_hash", ""),
            selection={k: {kk: int(vv) for kk, vv in v.items()} for k, v in payload.get("selection", {}).items()},
        )
