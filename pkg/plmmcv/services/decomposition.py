import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy import linalg

from plmmcv.models import Kinship, Preconditioner, Spectrum, StandardizedMatrix
from plmmcv.utils import DataValidationError, DecompositionError, array_checksum

logger = logging.getLogger(__name__)

EIGENVALUE_TOLERANCE = 1e-8


def compute_kinship(Xstd: StandardizedMatrix) -> Kinship:
    """
    Build the realized relationship matrix K̂ = (1/p)·XXᵀ over the active columns.

    Args:
        Xstd (StandardizedMatrix): Standardized design.

    Returns:
        Kinship: The symmetric n x n kinship.

    Raises:
        DataValidationError: If no column is active.
    """
    X_active = Xstd.active_values()
    p_active = X_active.shape[1]
    if p_active == 0:
        raise DataValidationError("Kinship needs at least one active column; every column was screened out.")

    K = X_active @ X_active.T / p_active
    K = (K + K.T) / 2
    return Kinship(K=K, n_features=p_active)


def eigendecompose(kinship: Union[Kinship, np.ndarray]) -> Spectrum:
    """
    Take the full symmetric eigendecomposition of K̂.

    Eigenvalues are sorted in descending order. Every eigenvalue within
    1e-8·max(1, s_max) of zero is set to zero. This covers small positive
    values as well as rounding below zero, so the count of nonzero eigenvalues
    is the numerical rank of K̂.

    Args:
        kinship (Union[Kinship, np.ndarray]): The kinship, or a square symmetric matrix.

    Returns:
        Spectrum: Eigenvectors in columns and eigenvalues.

    Raises:
        DataValidationError: If the matrix is not square and symmetric.
        DecompositionError: If the eigensolver fails or an eigenvalue is clearly negative.
    """
    K = kinship.K if isinstance(kinship, Kinship) else np.asarray(kinship, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DataValidationError(f"Kinship must be a square matrix. Current shape: {K.shape}.")
    scale = max(1.0, float(np.max(np.abs(K)))) if K.size else 1.0
    if not np.allclose(K, K.T, rtol=0.0, atol=1e-10 * scale):
        raise DataValidationError("Kinship must be symmetric.")

    try:
        s, U = linalg.eigh(K)
    except linalg.LinAlgError as e:
        raise DecompositionError(f"Eigendecomposition of the {K.shape[0]} x {K.shape[0]} kinship failed: {e}") from e

    s = s[::-1].copy()
    U = U[:, ::-1].copy()

    tol = EIGENVALUE_TOLERANCE * max(1.0, float(s[0]))
    if s[-1] < -tol:
        raise DecompositionError(f"Kinship is not positive semidefinite (smallest eigenvalue {s[-1]:.3e}).")
    s[np.abs(s) <= tol] = 0.0

    logger.debug("Eigendecomposition: n=%d, rank=%d, s_max=%.4g", K.shape[0], np.count_nonzero(s), s[0])
    return Spectrum(U=U, s=s)


def build_preconditioner(spectrum: Spectrum, eta: float, eta_max: float = 0.99) -> Preconditioner:
    """
    Build the whitening rotation M = diag(w)·Uᵀ with wᵢ = (η·sᵢ + 1 − η)^(−1/2).

    Args:
        spectrum (Spectrum): Eigendecomposition of K̂.
        eta (float): Variance ratio in [0, eta_max].
        eta_max (float): Upper bound for η.

    Returns:
        Preconditioner: The rotation.

    Raises:
        TypeError: If 'eta' is not a number.
        ValueError: If 'eta' is outside [0, eta_max].
    """
    if isinstance(eta, bool) or not isinstance(eta, (int, float, np.floating)):
        raise TypeError("'eta' must be a number.", f"Current type: {type(eta)}.")
    if not 0.0 <= eta <= eta_max:
        raise ValueError(f"'eta' must be in [0, {eta_max}].", f"Current value: {eta}.")

    w = 1.0 / np.sqrt(eta * spectrum.s + (1.0 - eta))
    return Preconditioner(U=spectrum.U, w=w, eta=float(eta))


def save_spectrum(spectrum: Spectrum, file_path: Union[str, Path], Xstd: StandardizedMatrix) -> None:
    """
    Cache a spectrum together with the hash of the standardized design it came from.

    Args:
        spectrum (Spectrum): The spectrum to store.
        file_path (Union[str, Path]): Destination '.npz' file.
        Xstd (StandardizedMatrix): The standardized design the kinship was built from.
    """
    np.savez(Path(file_path), U=spectrum.U, s=spectrum.s, data_hash=np.array(array_checksum(Xstd.values)))
    logger.info("Spectrum cached to %s", file_path)


def load_spectrum(file_path: Union[str, Path], Xstd: Optional[StandardizedMatrix] = None) -> Spectrum:
    """
    Load a cached spectrum.

    Args:
        file_path (Union[str, Path]): Source '.npz' file.
        Xstd (Optional[StandardizedMatrix]): When given, the cache must have been built from it.

    Returns:
        Spectrum: The cached spectrum.

    Raises:
        FileNotFoundError: If the file does not exist.
        DataValidationError: If the cache is malformed or was built from different data.
    """
    file_path = Path(file_path)
    if not file_path.is_file():
        raise FileNotFoundError(f"'{file_path}' file does not exist.")

    with np.load(file_path) as cache:
        missing = {"U", "s", "data_hash"} - set(cache.files)
        if missing:
            raise DataValidationError(f"Spectrum cache '{file_path}' is missing {sorted(missing)}.")
        U = cache["U"]
        s = cache["s"]
        stored_hash = str(cache["data_hash"])

    if Xstd is not None and stored_hash != array_checksum(Xstd.values):
        raise DataValidationError(f"Spectrum cache '{file_path}' was built from different data.")
    if U.ndim != 2 or U.shape[0] != U.shape[1] or s.shape != (U.shape[0],):
        raise DataValidationError(f"Spectrum cache '{file_path}' has inconsistent shapes.")
    return Spectrum(U=U, s=s)
