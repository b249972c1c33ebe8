"""
The `data_sources` module reads and writes the delimited files the library
works on. `CSVSource` loads a table as raw strings on top of Polars, and the
dataset helpers turn it into a validated numeric `Dataset`.

Classes:
    CSVSource: Class for loading headed delimited text files.

Functions:
    load_dataset: Read a file into a Dataset, reporting bad cells by row and column.
    load_features: Read new rows aligned to a model's feature order.
    load_matrix: Read a purely numeric matrix.
    save_dataset: Write a Dataset that load_dataset reads back unchanged.
"""

from .csv_source import CSVSource
from .dataset_io import load_dataset, load_features, load_matrix, save_dataset

__all__ = [
    "CSVSource",
    "load_dataset",
    "load_features",
    "load_matrix",
    "save_dataset",
]
