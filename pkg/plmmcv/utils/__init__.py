"""
This module aggregates and exports the shared helpers used across the
library: enums, the solver configuration, the error hierarchy and content
hashing.

Exports:
    BenchmarkMethod: Enum for the model-selection procedures compared by the benchmark.
    BlupMode: Enum for the BLUP covariance scaling (correct/incorrect).
    CVStrategy: Enum for the cross-validation strategies (full/inner/outer).
    EncodingType: Enum for the text encodings accepted by the file reader.
    GeneratorKind: Enum for the synthetic data generators.
    LambdaChoice: Enum for the named penalty selections (min/1se).
    PredictionMode: Enum for the predictors (blup/linear).
    SolverConfig: Class holding every numeric knob of the pipeline.
    PlmmError: Base class of the library errors.
    DataValidationError: Invalid input data or configuration.
    NumericalError: Numerical failure on valid input.
    ConvergenceError: Coordinate descent did not converge.
    DecompositionError: Kinship eigendecomposition failed.
    array_checksum: Content hash of numeric arrays.
    file_checksum: Content hash of a file.
    default_thread_count: Worker count from PLMMCV_THREADS.
"""

from .checksum import array_checksum, file_checksum
from .errors import ConvergenceError, DataValidationError, DecompositionError, NumericalError, PlmmError
from .solver_config import THREADS_ENV_VAR, SolverConfig, default_thread_count
from .types import BenchmarkMethod, BlupMode, CVStrategy, EncodingType, GeneratorKind, LambdaChoice, PredictionMode

__all__ = [
    "array_checksum",
    "BenchmarkMethod",
    "BlupMode",
    "ConvergenceError",
    "CVStrategy",
    "DataValidationError",
    "DecompositionError",
    "default_thread_count",
    "EncodingType",
    "file_checksum",
    "GeneratorKind",
    "LambdaChoice",
    "NumericalError",
    "PlmmError",
    "PredictionMode",
    "SolverConfig",
    "THREADS_ENV_VAR",
]
