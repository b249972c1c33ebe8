from pathlib import Path
from typing import Union

import polars as pl

from plmmcv.utils import DataValidationError, EncodingType

MISSING_TOKENS = ("NA", "NaN", "nan", "NULL", "null", "")


class CSVSource:
    """
    A headed delimited file read as string columns.

    Cells are not parsed here: numeric conversion happens in the dataset
    helpers, which report the offending row and column.

    Attributes:
        file_path (Path): Path to an existing file.
        delimiter (str): Field separator, a single character.
        encoding (EncodingType): Text encoding of the file.
        missing_tokens (tuple[str, ...]): Cell values read as missing.
    """

    def __init__(
        self,
        file_path: Union[str, Path],
        delimiter: str = ",",
        encoding: Union[str, EncodingType] = "utf-8",
        missing_tokens: tuple[str, ...] = MISSING_TOKENS,
    ):
        """
        Initializes an instance of the CSVSource class.

        Args:
            file_path (Union[str, Path]): Path to the file.
            delimiter (str): Field separator; the two-character escape '\\t' means tab.
            encoding (Union[str, EncodingType]): Text encoding.
            missing_tokens (tuple[str, ...]): Cell values read as missing.
        """
        self.file_path = file_path
        self.delimiter = delimiter
        self.encoding = encoding
        self.missing_tokens = missing_tokens

    @property
    def file_path(self) -> Path:
        """
        Path: Path to the file.
        """
        return self._file_path

    @file_path.setter
    def file_path(self, value: Union[str, Path]) -> None:
        """
        Parameters:
            value (Union[str, Path]): Path to an existing file.

        Raises:
            TypeError: If 'value' is neither a string nor a Path.
            FileNotFoundError: If no file exists at 'value'.
        """
        if not isinstance(value, (str, Path)):
            raise TypeError("'file_path' must be a string or a Path.", f"Current type: {type(value)}.")
        path = Path(value)
        if not path.is_file():
            raise FileNotFoundError(f"'{value}' file does not exist.")
        self._file_path = path

    @property
    def delimiter(self) -> str:
        """
        str: Field separator.
        """
        return self._delimiter

    @delimiter.setter
    def delimiter(self, value: str) -> None:
        """
        Parameters:
            value (str): A single character, or '\\t' as typed on a command line.

        Raises:
            TypeError: If 'value' is not a string.
            ValueError: If 'value' is not a single character.
        """
        if not isinstance(value, str):
            raise TypeError("'delimiter' must be a string.", f"Current type: {type(value)}.")
        if value == "\\t":
            value = "\t"
        if len(value) != 1:
            raise ValueError("'delimiter' must be a single character.", f"Current value: {value!r}.")
        self._delimiter = value

    @property
    def encoding(self) -> EncodingType:
        """
        EncodingType: Text encoding.
        """
        return self._encoding

    @encoding.setter
    def encoding(self, value: Union[str, EncodingType]) -> None:
        self._encoding = EncodingType.parse(value)

    @property
    def missing_tokens(self) -> tuple[str, ...]:
        """
        tuple[str, ...]: Cell values read as missing.
        """
        return self._missing_tokens

    @missing_tokens.setter
    def missing_tokens(self, value: tuple[str, ...]) -> None:
        """
        Parameters:
            value (tuple[str, ...]): Tokens such as 'NA'.

        Raises:
            TypeError: If 'value' is not a sequence of strings.
        """
        if not isinstance(value, (tuple, list)) or not all(isinstance(v, str) for v in value):
            raise TypeError("'missing_tokens' must be a sequence of strings.", f"Current value: {value!r}.")
        self._missing_tokens = tuple(value)

    def _read(self, **kwargs) -> pl.DataFrame:
        try:
            return pl.read_csv(
                source=self.file_path,
                separator=self.delimiter,
                encoding=self.encoding.value,
                null_values=list(self.missing_tokens),
                infer_schema_length=0,
                **kwargs,
            )
        except pl.exceptions.NoDataError as e:
            raise DataValidationError(f"'{self.file_path}' is empty.") from e
        except pl.exceptions.DuplicateError as e:
            raise DataValidationError(f"'{self.file_path}' has duplicate column names.") from e

    def load_data(self) -> pl.DataFrame:
        """
        Read every row.

        Returns:
            pl.DataFrame: All columns as strings, missing cells as null.

        Raises:
            DataValidationError: If the file is empty or its header repeats a name.
        """
        return self._read()

    def header(self) -> list[str]:
        """
        Read only the header row.

        Returns:
            list[str]: Column names in file order.

        Raises:
            DataValidationError: If the file is empty or its header repeats a name.
        """
        return self._read(n_rows=0).columns
