from dataclasses import dataclass
from typing import Self

import numpy as np


@dataclass(frozen=True)
class Kinship:
    """
    Realized relationship matrix K̂ = (1/p)·XXᵀ over standardized active columns.

    Attributes:
        K (np.ndarray): n x n symmetric matrix.
        n_features (int): Number of active columns that entered the product.
    """

    K: np.ndarray
    n_features: int

    @property
    def n(self) -> int:
        """
        int: Number of observations.
        """
        return self.K.shape[0]


@dataclass(frozen=True)
class Spectrum:
    """
    Full eigendecomposition of K̂.

    Attributes:
        U (np.ndarray): n x n orthogonal matrix, eigenvectors in columns.
        s (np.ndarray): Length-n eigenvalues sorted in descending order, clamped at 0.
    """

    U: np.ndarray
    s: np.ndarray

    @property
    def n(self) -> int:
        """
        int: Number of observations.
        """
        return self.U.shape[0]

    def reconstruct(self) -> np.ndarray:
        """
        Rebuild K̂ from its eigenpairs.

        Returns:
            np.ndarray: U·diag(s)·Uᵀ.
        """
        return (self.U * self.s) @ self.U.T


@dataclass(frozen=True)
class Preconditioner:
    """
    Rotation M = diag(w)·Uᵀ that whitens Ŝ = ηK̂ + (1−η)I.

    U may be a row subset of the full eigenvector matrix (inner cross-validation);
    M then maps the subset rows into the full n-dimensional eigenbasis.

    Attributes:
        U (np.ndarray): m x n eigenvector rows.
        w (np.ndarray): Length-n weights (η·s + 1 − η)^(−1/2).
        eta (float): Variance ratio used to build the weights.
    """

    U: np.ndarray
    w: np.ndarray
    eta: float

    @property
    def matrix(self) -> np.ndarray:
        """
        np.ndarray: The n x m rotation matrix M = diag(w)·Uᵀ.
        """
        return self.w[:, None] * self.U.T

    def apply(self, A: np.ndarray) -> np.ndarray:
        """
        Rotate a matrix or vector.

        Args:
            A (np.ndarray): m x k matrix or length-m vector.

        Returns:
            np.ndarray: diag(w)·Uᵀ·A.
        """
        rotated = self.U.T @ A
        if rotated.ndim == 1:
            return self.w * rotated
        return self.w[:, None] * rotated

    def subset_rows(self, rows: np.ndarray) -> Self:
        """
        Restrict the preconditioner to a subset of observations, keeping the weights.

        Args:
            rows (np.ndarray): Integer row indices into U.

        Returns:
            Preconditioner: The row-subset preconditioner.
        """
        return type(self)(U=self.U[np.asarray(rows)], w=self.w, eta=self.eta)
