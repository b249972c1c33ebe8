import logging

import numpy as np
from scipy import optimize

from plmmcv.models import EtaEstimate, Spectrum
from plmmcv.utils import DataValidationError

logger = logging.getLogger(__name__)


def profile_loglik(eta: float, z2: np.ndarray, s: np.ndarray) -> tuple[float, float]:
    """
    Profile log-likelihood of the null model y ~ N(0, τ²(ηK̂ + (1−η)I)).

    With dᵢ = η·sᵢ + 1 − η and τ̂² = mean(zᵢ²/dᵢ), the value is
    −½[n·log(2π·τ̂²) + Σ log dᵢ + n].

    Args:
        eta (float): Variance ratio.
        z2 (np.ndarray): Squared rotated outcome (Uᵀy)².
        s (np.ndarray): Eigenvalues of K̂.

    Returns:
        tuple[float, float]: The log-likelihood and τ̂².
    """
    n = len(z2)
    d = eta * s + (1.0 - eta)
    tau2 = float(np.mean(z2 / d))
    loglik = -0.5 * (n * np.log(2.0 * np.pi * tau2) + np.sum(np.log(d)) + n)
    return float(loglik), tau2


def estimate_eta(
    spectrum: Spectrum,
    y: np.ndarray,
    eta_max: float = 0.99,
    eta_grid: int = 100,
    eta_tol: float = 1e-4,
) -> EtaEstimate:
    """
    Estimate η by maximizing the profile likelihood of the null model.

    A grid of equally spaced values on [0, eta_max] is searched first; ties go
    to the smaller η. The best grid point is then refined by a bounded scalar
    search on its bracketing interval and the refinement is kept only when it
    strictly improves the likelihood.

    Args:
        spectrum (Spectrum): Eigendecomposition of K̂.
        y (np.ndarray): Centered outcome.
        eta_max (float): Upper end of the search interval.
        eta_grid (int): Number of grid points.
        eta_tol (float): Absolute tolerance of the refinement.

    Returns:
        EtaEstimate: The estimate with its log-likelihood and τ̂².

    Raises:
        DataValidationError: If y has the wrong length, fewer than 3 entries, is not centered
            or is identically zero.
    """
    y = np.asarray(y, dtype=float)
    n = spectrum.n
    if y.shape != (n,):
        raise DataValidationError(f"'y' must have length {n}. Current shape: {y.shape}.")
    if n < 3:
        raise DataValidationError(f"η estimation needs at least 3 observations. Current: {n}.")

    norm = float(np.linalg.norm(y))
    if norm == 0.0:
        raise DataValidationError("η estimation needs a non-constant outcome; y is identically zero.")
    if abs(float(y.mean())) > 1e-8 * max(1.0, float(y.std())):
        raise DataValidationError(f"'y' must be centered before η estimation. Current mean: {y.mean():.3e}.")

    z2 = (spectrum.U.T @ y) ** 2
    s = spectrum.s

    grid = np.linspace(0.0, eta_max, eta_grid)
    values = np.array([profile_loglik(e, z2, s)[0] for e in grid])
    best = int(np.argmax(values))
    eta_hat = float(grid[best])
    best_loglik = float(values[best])

    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, eta_grid - 1)]
    if hi > lo:
        result = optimize.minimize_scalar(
            lambda e: -profile_loglik(e, z2, s)[0],
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": eta_tol},
        )
        if result.success and -result.fun > best_loglik:
            eta_hat = float(np.clip(result.x, 0.0, eta_max))
            best_loglik = float(-result.fun)

    loglik, tau2 = profile_loglik(eta_hat, z2, s)
    logger.debug("Estimated eta=%.4f (loglik=%.4f, tau2=%.4g)", eta_hat, loglik, tau2)
    return EtaEstimate(eta=eta_hat, loglik=loglik, tau2=tau2)
