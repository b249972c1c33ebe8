import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from plmmcv.models import PlmmModel, StandardizedMatrix, apply_standardization
from plmmcv.utils import BlupMode, DataValidationError, NumericalError

from .lasso_path import predict_linear

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BlupComponents:
    """
    Covariance blocks of the BLUP adjustment Σ̂₂₁Σ̂₁₁⁻¹(y₁ − X₁β̂).

    Attributes:
        S11 (np.ndarray): n₁ x n₁ training covariance (η/p)Ẋ₁Ẋ₁ᵀ + (1−η)I.
        S21 (np.ndarray): m x n₁ cross covariance (η/p)Ẋ₂Ẋ₁ᵀ.
        mode (BlupMode): How the blocks were scaled.
    """

    S11: np.ndarray
    S21: np.ndarray
    mode: BlupMode


@dataclass(frozen=True)
class FullDataContext:
    """
    Whole-dataset standardization and the split used by the incorrect BLUP.

    Attributes:
        Xstd (StandardizedMatrix): Standardization of every row of the dataset.
        train_idx (np.ndarray): Rows the model was fitted on.
        test_idx (np.ndarray): Rows being predicted.
    """

    Xstd: StandardizedMatrix
    train_idx: np.ndarray
    test_idx: np.ndarray


def _same_row_indicator(new_ids: Optional[Sequence[str]], train_ids: Sequence[str], m: int) -> np.ndarray:
    indicator = np.zeros((m, len(train_ids)))
    if new_ids is None:
        return indicator
    if len(new_ids) != m:
        raise DataValidationError(f"Expected {m} row ids, got {len(new_ids)}.")
    position = {row_id: k for k, row_id in enumerate(train_ids)}
    for i, row_id in enumerate(new_ids):
        k = position.get(row_id)
        if k is not None:
            indicator[i, k] = 1.0
    return indicator


def build_blup_components(
    model: PlmmModel,
    X2_raw: np.ndarray,
    mode: BlupMode = BlupMode.CORRECT,
    full_data_ctx: Optional[FullDataContext] = None,
    row_ids: Optional[Sequence[str]] = None,
) -> BlupComponents:
    """
    Build the covariance blocks for new rows.

    In correct mode the new rows are standardized with the training centers and
    scales and both blocks use the training active set. In incorrect mode both
    blocks are cut from a kinship of the whole dataset, whose scaling differs
    from the one the coefficients were fitted under.

    Args:
        model (PlmmModel): Fitted model.
        X2_raw (np.ndarray): m x p new rows on the original scale.
        mode (BlupMode): Scaling of the covariance blocks.
        full_data_ctx (Optional[FullDataContext]): Required in incorrect mode.
        row_ids (Optional[Sequence[str]]): Labels of the new rows; a label equal to a
            training label marks the same observation and adds the noise covariance.

    Returns:
        BlupComponents: S11 and S21.

    Raises:
        DataValidationError: If the columns do not match or incorrect mode lacks its context.
    """
    mode = BlupMode.parse(mode)
    eta = model.eta

    if mode is BlupMode.CORRECT:
        X2 = apply_standardization(X2_raw, model.train_centers, model.train_scales, model.train_active)
        active = model.train_active
        X1 = model.train_X_std[:, active]
        X2 = X2[:, active]
        p = max(int(np.count_nonzero(active)), 1)
        S11 = eta / p * (X1 @ X1.T) + (1.0 - eta) * np.eye(X1.shape[0])
        S21 = eta / p * (X2 @ X1.T)
        S21 += (1.0 - eta) * _same_row_indicator(row_ids, model.row_ids, X2.shape[0])
        return BlupComponents(S11=S11, S21=S21, mode=mode)

    if full_data_ctx is None:
        raise DataValidationError("The incorrect BLUP needs the full-data context (standardized matrix and index sets).")
    train_idx = np.asarray(full_data_ctx.train_idx)
    test_idx = np.asarray(full_data_ctx.test_idx)
    if len(train_idx) != model.n_train:
        raise DataValidationError(f"Full-data context has {len(train_idx)} training rows, the model {model.n_train}.")

    X_full = full_data_ctx.Xstd.active_values()
    p = max(X_full.shape[1], 1)
    S11 = eta / p * (X_full[train_idx] @ X_full[train_idx].T) + (1.0 - eta) * np.eye(len(train_idx))
    S21 = eta / p * (X_full[test_idx] @ X_full[train_idx].T)
    return BlupComponents(S11=S11, S21=S21, mode=mode)


def predict_blup(
    model: PlmmModel,
    X2_raw: np.ndarray,
    lambda_index: Optional[int] = None,
    mode: BlupMode = BlupMode.CORRECT,
    full_data_ctx: Optional[FullDataContext] = None,
    row_ids: Optional[Sequence[str]] = None,
) -> np.ndarray:
    """
    Best linear unbiased prediction X₂β̂ + Σ̂₂₁Σ̂₁₁⁻¹(y₁ − X₁β̂).

    Args:
        model (PlmmModel): Fitted model.
        X2_raw (np.ndarray): m x p new rows on the original scale.
        lambda_index (Optional[int]): Path index; every penalty value when omitted.
        mode (BlupMode): Scaling of the covariance blocks.
        full_data_ctx (Optional[FullDataContext]): Required in incorrect mode.
        row_ids (Optional[Sequence[str]]): Labels of the new rows (correct mode only).

    Returns:
        np.ndarray: Length-m predictions, or m x L when 'lambda_index' is omitted.

    Raises:
        DataValidationError: If the columns, index or context are invalid.
        NumericalError: If the training covariance cannot be factorized.
    """
    X2_raw = np.asarray(X2_raw, dtype=float)
    if X2_raw.ndim == 1:
        X2_raw = X2_raw.reshape(1, -1)
    linear = predict_linear(model, X2_raw, lambda_index)

    if lambda_index is None:
        residuals = model.residuals_path
    else:
        residuals = model.residuals_path[:, model.check_lambda_index(lambda_index)]

    components = build_blup_components(model, X2_raw, mode, full_data_ctx, row_ids)
    if components.S21.shape[0] != X2_raw.shape[0]:
        raise DataValidationError(f"Full-data context predicts {components.S21.shape[0]} rows, got {X2_raw.shape[0]}.")
    try:
        factor = linalg.cho_factor(components.S11, lower=True)
    except linalg.LinAlgError as e:
        raise NumericalError(f"BLUP training covariance is not positive definite (eta={model.eta:.4f}).") from e

    return linear + components.S21 @ linalg.cho_solve(factor, residuals)
