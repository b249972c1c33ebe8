import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
import polars as pl

from plmmcv.models import Dataset
from plmmcv.utils import DataValidationError, EncodingType

from .csv_source import CSVSource

logger = logging.getLogger(__name__)


def _numeric_column(df: pl.DataFrame, name: str) -> np.ndarray:
    raw = df[name]
    values = raw.str.strip_chars().cast(pl.Float64, strict=False)
    bad = values.is_null() | ~values.is_finite().fill_null(False)
    if bad.any():
        row = int(bad.arg_true()[0])
        cell = raw[row]
        shown = "missing" if cell is None else repr(cell)
        raise DataValidationError(f"Non-numeric or non-finite value ({shown}) in row {row + 1}, column '{name}'.")
    return values.to_numpy().astype(float)


def load_dataset(
    file_path: Union[str, Path],
    outcome_column: str,
    delimiter: str = ",",
    id_column: Optional[str] = None,
    encoding: Union[str, EncodingType] = "utf-8",
) -> Dataset:
    """
    Read a delimited file with a header into a Dataset.

    Every column other than the outcome and the optional id column becomes a
    feature, in file order. Row numbers in error messages count data rows from
    1, not counting the header.

    Args:
        file_path (Union[str, Path]): Path to the file.
        outcome_column (str): Name of the outcome column.
        delimiter (str): Field separator.
        id_column (Optional[str]): Name of a column holding row labels.
        encoding (Union[str, EncodingType]): File encoding.

    Returns:
        Dataset: The parsed dataset.

    Raises:
        FileNotFoundError: If the file does not exist.
        DataValidationError: If a named column is missing, a cell is not a finite
            number, or the file has fewer than 2 rows or no feature column.
    """
    source = CSVSource(file_path, delimiter=delimiter, encoding=encoding)
    df = source.load_data()

    for role, name in (("Outcome", outcome_column), ("Id", id_column)):
        if name is not None and name not in df.columns:
            raise DataValidationError(f"{role} column '{name}' not found in '{file_path}'. Available columns: {df.columns}.")
    if df.height < 2:
        raise DataValidationError(f"'{file_path}' needs at least 2 data rows. Current rows: {df.height}.")

    feature_names = [c for c in df.columns if c not in (outcome_column, id_column)]
    if not feature_names:
        raise DataValidationError(f"'{file_path}' has no feature columns besides '{outcome_column}'.")

    y = _numeric_column(df, outcome_column)
    X = np.column_stack([_numeric_column(df, name) for name in feature_names])
    row_ids = tuple(df[id_column].fill_null("").to_list()) if id_column else ()
    if row_ids and len(set(row_ids)) != len(row_ids):
        raise DataValidationError(f"Id column '{id_column}' has duplicate values.")

    logger.info("Loaded %s: n=%d, p=%d", file_path, X.shape[0], X.shape[1])
    return Dataset(X=X, y=y, feature_names=tuple(feature_names), row_ids=row_ids)


def load_features(
    file_path: Union[str, Path],
    feature_names: tuple[str, ...],
    delimiter: str = ",",
    id_column: Optional[str] = None,
) -> tuple[np.ndarray, tuple[str, ...]]:
    """
    Read new rows for prediction, aligned to the training feature order.

    Columns that are not features (an outcome, an id) are ignored.

    Args:
        file_path (Union[str, Path]): Path to the file.
        feature_names (tuple[str, ...]): Training feature names, in training order.
        delimiter (str): Field separator.
        id_column (Optional[str]): Name of a column holding row labels.

    Returns:
        tuple[np.ndarray, tuple[str, ...]]: The m x p matrix and the row labels
            (empty when no id column is given).

    Raises:
        DataValidationError: If training features are missing from the file.
    """
    df = CSVSource(file_path, delimiter=delimiter).load_data()
    missing = [name for name in feature_names if name not in df.columns]
    if missing:
        extra = [c for c in df.columns if c not in feature_names and c != id_column]
        raise DataValidationError(f"Feature columns do not match the model. Missing: {missing}. Extra: {extra}.")
    if id_column is not None and id_column not in df.columns:
        raise DataValidationError(f"Id column '{id_column}' not found in '{file_path}'.")

    X = np.column_stack([_numeric_column(df, name) for name in feature_names])
    row_ids = tuple(df[id_column].fill_null("").to_list()) if id_column else ()
    return X, row_ids


def save_dataset(
    dataset: Dataset,
    file_path: Union[str, Path],
    outcome_column: str = "y",
    delimiter: str = ",",
    id_column: Optional[str] = None,
) -> None:
    """
    Write a Dataset as a delimited file that load_dataset reads back unchanged.

    Args:
        dataset (Dataset): The data.
        file_path (Union[str, Path]): Destination path.
        outcome_column (str): Header of the outcome column.
        delimiter (str): Field separator.
        id_column (Optional[str]): Header of a leading row-label column; omitted when None.

    Raises:
        DataValidationError: If a header would be duplicated.
    """
    reserved = [c for c in (outcome_column, id_column) if c is not None]
    clash = [c for c in reserved if c in dataset.feature_names]
    if clash or len(set(reserved)) != len(reserved):
        raise DataValidationError(f"Column names {reserved} clash with each other or with feature names.")

    columns: dict[str, object] = {}
    if id_column is not None:
        columns[id_column] = list(dataset.row_ids)
    for j, name in enumerate(dataset.feature_names):
        columns[name] = dataset.X[:, j]
    columns[outcome_column] = dataset.y
    pl.DataFrame(columns).write_csv(file_path, separator=delimiter)


def load_matrix(file_path: Union[str, Path], delimiter: str = ",") -> np.ndarray:
    """
    Read a headed delimited file whose every column is a feature.

    Args:
        file_path (Union[str, Path]): Path to the file.
        delimiter (str): Field separator.

    Returns:
        np.ndarray: The n x p matrix, columns in file order.

    Raises:
        DataValidationError: If a cell is not a finite number or the file has no rows.
    """
    df = CSVSource(file_path, delimiter=delimiter).load_data()
    if df.height == 0 or df.width == 0:
        raise DataValidationError(f"'{file_path}' holds no matrix.")
    return np.column_stack([_numeric_column(df, name) for name in df.columns])
