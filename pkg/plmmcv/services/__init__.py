"""
The `services` module holds the operations of the penalized linear mixed
model: decomposition of the kinship matrix, estimation of η, rotation, the
lasso path, BLUP prediction, cross-validation and the simulation harness.

Classes:
    BlupComponents: Covariance blocks of a BLUP prediction.
    BenchmarkResult: Metrics and curves of a benchmark run.
    CoordinateDescentSolver: Lasso solver with warm starts along a path.
    CrossValidator: K-fold cross-validation under the full, inner and outer strategies.
    FullDataContext: Full-data standardization needed by the incorrect BLUP.
    PreparedData: Standardized design, spectrum, η and rotation of one dataset.
    ScenarioConfig: Validated benchmark scenario.

Functions:
    compute_kinship, eigendecompose, build_preconditioner, save_spectrum, load_spectrum
    profile_loglik, estimate_eta
    rotate
    soft_threshold, lasso_objective, lambda_max, make_lambda_path, check_kkt, fit_path, predict_linear
    build_blup_components, predict_blup
    prepare, fit_plmm
    assign_folds, select_lambda, fit_fold, cross_validate
    generate_correlated_data, inject_confounder, compute_metrics, run_replicate, run_benchmark, bundled_scenarios
"""

from .blup import BlupComponents, FullDataContext, build_blup_components, predict_blup
from .cv_engine import CrossValidator, assign_folds, cross_validate, fit_fold, select_lambda
from .decomposition import build_preconditioner, compute_kinship, eigendecompose, load_spectrum, save_spectrum
from .lasso_path import CoordinateDescentSolver, check_kkt, fit_path, lambda_max, lasso_objective, make_lambda_path, predict_linear, soft_threshold
from .pipeline import PreparedData, fit_plmm, prepare
from .rotation import rotate
from .simulation import (
    BenchmarkResult,
    ReplicateResult,
    ScenarioConfig,
    bundled_scenarios,
    compute_metrics,
    generate_correlated_data,
    inject_confounder,
    run_benchmark,
    run_replicate,
)
from .variance_estimation import estimate_eta, profile_loglik

__all__ = [
    "BenchmarkResult",
    "BlupComponents",
    "CoordinateDescentSolver",
    "CrossValidator",
    "FullDataContext",
    "PreparedData",
    "ReplicateResult",
    "ScenarioConfig",
    "assign_folds",
    "build_blup_components",
    "build_preconditioner",
    "bundled_scenarios",
    "check_kkt",
    "compute_kinship",
    "compute_metrics",
    "cross_validate",
    "eigendecompose",
    "estimate_eta",
    "fit_fold",
    "fit_path",
    "fit_plmm",
    "generate_correlated_data",
    "inject_confounder",
    "lambda_max",
    "lasso_objective",
    "load_spectrum",
    "make_lambda_path",
    "predict_blup",
    "predict_linear",
    "prepare",
    "profile_loglik",
    "rotate",
    "run_benchmark",
    "run_replicate",
    "save_spectrum",
    "select_lambda",
    "soft_threshold",
]
