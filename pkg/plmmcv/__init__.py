"""
plmmcv fits penalized linear mixed models: lasso regression on data
preconditioned by the inverse square root of a covariance estimated from the
kinship of the observations. It cross-validates the fit under the full, inner
and outer strategies, predicts with BLUP and simulates structured data to
compare them.

Classes and Components:
    CSVSource: Class for loading delimited text files.
    CrossValidator: K-fold cross-validation on a shared penalty grid.
    CvResult: Cross-validation error curve and selected penalties.
    CVStrategy: Enum of the cross-validation strategies.
    Dataset: Validated feature matrix and outcome.
    PlmmModel: A fitted regularization path.
    ScenarioConfig: Validated benchmark scenario.
    SolverConfig: Numeric settings of the solver.
    PlmmError, DataValidationError, NumericalError: Error hierarchy.

Functions:
    load_dataset: Read a delimited file into a Dataset.
    fit_plmm: Fit the regularization path.
    cross_validate: Cross-validate under one strategy.
    predict_blup: BLUP predictions for new rows.
    run_benchmark: Run a simulation scenario.
"""

from .data_sources import CSVSource, load_dataset, load_features, save_dataset
from .models import CvResult, Dataset, PlmmModel
from .services import CrossValidator, ScenarioConfig, cross_validate, fit_plmm, predict_blup, predict_linear, run_benchmark
from .utils import CVStrategy, DataValidationError, NumericalError, PlmmError, SolverConfig

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "CSVSource",
    "CVStrategy",
    "CrossValidator",
    "CvResult",
    "DataValidationError",
    "Dataset",
    "NumericalError",
    "PlmmError",
    "PlmmModel",
    "ScenarioConfig",
    "SolverConfig",
    "cross_validate",
    "fit_plmm",
    "load_dataset",
    "load_features",
    "predict_blup",
    "predict_linear",
    "run_benchmark",
    "save_dataset",
]
