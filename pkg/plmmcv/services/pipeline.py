import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from plmmcv.models import Dataset, EtaEstimate, LambdaPath, PlmmModel, Preconditioner, RotatedData, Spectrum, StandardizedMatrix, center_outcome, standardize
from plmmcv.utils import SolverConfig, array_checksum

from .decomposition import build_preconditioner, compute_kinship, eigendecompose
from .lasso_path import CoordinateDescentSolver, fit_path, make_lambda_path
from .rotation import rotate
from .variance_estimation import estimate_eta

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PreparedData:
    """
    Every intermediate of the fit up to the rotated data.

    Attributes:
        Xstd (StandardizedMatrix): Raw-stage standardization.
        spectrum (Spectrum): Eigendecomposition of the kinship.
        eta (float): Variance ratio used for the rotation.
        eta_estimate (Optional[EtaEstimate]): The estimate, None when η was fixed.
        pre (Preconditioner): The rotation.
        rot (RotatedData): Rotated data.
        y_mean (float): Mean of the raw outcome.
    """

    Xstd: StandardizedMatrix
    spectrum: Spectrum
    eta: float
    eta_estimate: Optional[EtaEstimate]
    pre: Preconditioner
    rot: RotatedData
    y_mean: float


def prepare(X: np.ndarray, y: np.ndarray, config: SolverConfig, spectrum: Optional[Spectrum] = None) -> PreparedData:
    """
    Standardize, decompose, estimate η and rotate.

    Args:
        X (np.ndarray): n x p raw design.
        y (np.ndarray): Length-n raw outcome.
        config (SolverConfig): Numeric settings.
        spectrum (Optional[Spectrum]): Precomputed spectrum of this design's kinship.

    Returns:
        PreparedData: The intermediates.
    """
    Xstd = standardize(X, variance_threshold=config.variance_threshold)
    if spectrum is None:
        spectrum = eigendecompose(compute_kinship(Xstd))

    y_centered, y_mean = center_outcome(y)

    if config.eta is None:
        eta_estimate = estimate_eta(spectrum, y_centered, eta_max=config.eta_max, eta_grid=config.eta_grid, eta_tol=config.eta_tol)
        eta = eta_estimate.eta
    else:
        eta_estimate = None
        eta = config.eta

    pre = build_preconditioner(spectrum, eta, eta_max=config.eta_max)
    rot = rotate(pre, Xstd, y_centered, variance_threshold=config.variance_threshold)
    return PreparedData(Xstd=Xstd, spectrum=spectrum, eta=eta, eta_estimate=eta_estimate, pre=pre, rot=rot, y_mean=y_mean)


def fit_plmm(
    dataset: Dataset,
    config: Optional[SolverConfig] = None,
    lambdas: Optional[np.ndarray] = None,
    spectrum: Optional[Spectrum] = None,
) -> PlmmModel:
    """
    Fit a penalized linear mixed model along a penalty path.

    Runs standardize, kinship, eigendecomposition, η estimation (unless η is
    fixed), rotation and the coordinate-descent path.

    Args:
        dataset (Dataset): Training data.
        config (Optional[SolverConfig]): Numeric settings; defaults when omitted.
        lambdas (Optional[np.ndarray]): Explicit descending penalty values; built
            from the rotated data when omitted.
        spectrum (Optional[Spectrum]): Precomputed spectrum, e.g. from a cache.

    Returns:
        PlmmModel: The fitted model.
    """
    config = config or SolverConfig()
    prepared = prepare(dataset.X, dataset.y, config, spectrum)

    if lambdas is None:
        path = make_lambda_path(prepared.rot, config.n_lambda, config.resolve_min_ratio(dataset.n, dataset.p))
    else:
        lambdas = np.asarray(lambdas, dtype=float)
        path = LambdaPath(lambdas=lambdas, min_ratio=float(lambdas[-1] / lambdas[0]))

    model = fit_path(
        prepared.rot,
        path,
        dataset.y,
        prepared.Xstd,
        prepared.eta,
        solver=CoordinateDescentSolver(tol=config.tol, max_iter=config.max_iter),
        spectrum=prepared.spectrum,
        feature_names=dataset.feature_names,
        row_ids=dataset.row_ids,
        data_hash=array_checksum(dataset.X, dataset.y),
    )
    logger.info(
        "Fitted n=%d, p=%d (active %d): eta=%.4f, lambda_max=%.6g, max nvar=%d",
        dataset.n,
        dataset.p,
        int(np.count_nonzero(model.active)),
        model.eta,
        path.lambda_max,
        int(model.nvar.max()),
    )
    return model
