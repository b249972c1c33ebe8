"""
The `models` module defines the immutable records passed between the fitting
steps: the dataset and its standardization, the kinship spectrum and the
preconditioner built from it, the fitted path, cross-validation results and the
synthetic datasets used by the benchmark.

Classes:
    Dataset: Design matrix, outcome and labels.
    StandardizedMatrix: Column-standardized matrix with its centers, scales and active mask.
    Kinship: Realized relationship matrix over active standardized columns.
    Spectrum: Eigendecomposition of the kinship matrix.
    Preconditioner: Whitening rotation diag(w)·Uᵀ for a given η.
    EtaEstimate: Maximum-likelihood η with its log-likelihood.
    RotatedData: Preconditioned design and outcome.
    LambdaPath: Descending penalty grid.
    PlmmModel: Fitted coefficient path with everything prediction needs.
    FoldAssignment: Partition of the rows into folds.
    CvResult: Cross-validation error curve and selected penalties.
    SimDataset: Synthetic data with ground truth.
    SimMetrics: Selection and prediction metrics of one replicate.
    RunManifest: Provenance of a command-line run.

Functions:
    standardize: Center and scale columns, screening near-constant ones.
    center_outcome: Subtract the outcome mean to within rounding.
    apply_standardization: Apply learned centers and scales to new rows.
"""

from .cv_result import CvResult, FoldAssignment
from .dataset import DEFAULT_VARIANCE_THRESHOLD, Dataset, StandardizedMatrix, apply_standardization, center_outcome, standardize
from .fit import EtaEstimate, LambdaPath, PlmmModel, RotatedData
from .manifest import MANIFEST_NAME, RunManifest
from .simulation import SimDataset, SimMetrics
from .spectrum import Kinship, Preconditioner, Spectrum

__all__ = [
    "apply_standardization",
    "center_outcome",
    "CvResult",
    "Dataset",
    "DEFAULT_VARIANCE_THRESHOLD",
    "EtaEstimate",
    "FoldAssignment",
    "Kinship",
    "LambdaPath",
    "MANIFEST_NAME",
    "PlmmModel",
    "Preconditioner",
    "RotatedData",
    "RunManifest",
    "SimDataset",
    "SimMetrics",
    "Spectrum",
    "StandardizedMatrix",
    "standardize",
]
