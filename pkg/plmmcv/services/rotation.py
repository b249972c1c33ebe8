import logging

import numpy as np

from plmmcv.models import DEFAULT_VARIANCE_THRESHOLD, Preconditioner, RotatedData, StandardizedMatrix, standardize
from plmmcv.utils import DataValidationError

logger = logging.getLogger(__name__)


def rotate(
    pre: Preconditioner,
    Xstd: StandardizedMatrix,
    y_centered: np.ndarray,
    variance_threshold: float = DEFAULT_VARIANCE_THRESHOLD,
) -> RotatedData:
    """
    Precondition the standardized design and the centered outcome, then rescale
    the rotated columns.

    The rotated design is rescaled to unit mean square without re-centering: a
    shift of the rotated columns would reintroduce the intercept direction that
    β0 = ȳ removes. Columns whose rotated mean square is at or below
    'variance_threshold' are screened out, on top of the raw-stage screen.

    Args:
        pre (Preconditioner): Rotation diag(w)·Uᵀ; U may be a row subset.
        Xstd (StandardizedMatrix): Standardized design with one row per row of pre.U.
        y_centered (np.ndarray): Centered outcome.
        variance_threshold (float): Rotated-stage screening threshold.

    Returns:
        RotatedData: The rotated, rescaled design and the rotated outcome.

    Raises:
        DataValidationError: If the dimensions of the inputs disagree.
    """
    y_centered = np.asarray(y_centered, dtype=float)
    m = pre.U.shape[0]
    if Xstd.n != m or y_centered.shape != (m,):
        raise DataValidationError(
            f"Rotation expects {m} rows. Current design rows: {Xstd.n}, outcome shape: {y_centered.shape}.",
        )

    rescaled = standardize(pre.apply(Xstd.values), variance_threshold=variance_threshold, center=False)
    active = Xstd.active & rescaled.active

    Xrot = rescaled.values
    Xrot[:, ~active] = 0.0
    screened = int(np.count_nonzero(Xstd.active & ~rescaled.active))
    if screened:
        logger.debug("Rotated-stage screen removed %d column(s)", screened)

    return RotatedData(
        Xrot=Xrot,
        yrot=pre.apply(y_centered),
        rot_centers=rescaled.centers,
        rot_scales=rescaled.scales,
        active=active,
    )
