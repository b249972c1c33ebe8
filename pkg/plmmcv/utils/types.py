from enum import Enum


class _ValuesEnum(Enum):
    """
    Base enum exposing the list of accepted string values.
    """

    @classmethod
    def values(cls) -> list[str]:
        """
        Returns a list of all the values in the enum.

        Returns:
            list[str]: List of all the values in the enum.
        """
        return [item.value for item in cls]

    @classmethod
    def parse(cls, value: "str | _ValuesEnum"):
        """
        Converts a string (or an existing member) into a member of the enum.

        Args:
            value (str | _ValuesEnum): The value to convert.

        Returns:
            The matching enum member.

        Raises:
            TypeError: If 'value' is neither a string nor a member of the enum.
            ValueError: If 'value' is not one of the accepted values.
        """
        if isinstance(value, cls):
            return value

        if not isinstance(value, str):
            raise TypeError(
                f"'{cls.__name__}' value must be a string.",
                f"Current type: {type(value)}.",
            )

        if value not in cls.values():
            raise ValueError(f"Unsupported {cls.__name__} '{value}'. Must be one of {cls.values()}.")

        return cls(value)


class EncodingType(_ValuesEnum):
    """
    Enum class for the text encodings accepted by the delimited-file reader.
    """

    UTF8 = "utf-8"
    ISO_8859_1 = "iso-8859-1"
    ASCII = "ascii"
    UTF16 = "utf-16"


class CVStrategy(_ValuesEnum):
    """
    Cross-validation strategies, differing in which pipeline steps are repeated per fold.

    FULL repeats standardization, decomposition, η estimation, rotation and fitting.
    INNER reuses the full-data decomposition and η̂ but rotates per fold.
    OUTER rotates once and only subsets rotated rows per fold.
    """

    FULL = "full"
    INNER = "inner"
    OUTER = "outer"


class PredictionMode(_ValuesEnum):
    """
    Predictor used for new observations.
    """

    BLUP = "blup"
    LINEAR = "linear"


class BlupMode(_ValuesEnum):
    """
    Scaling used for the covariance blocks of the BLUP adjustment.

    CORRECT standardizes new rows with the training centers/scales.
    INCORRECT subsets a kinship built from the whole dataset.
    """

    CORRECT = "correct"
    INCORRECT = "incorrect"


class LambdaChoice(_ValuesEnum):
    """
    Named penalty selections stored after cross-validation.
    """

    MIN = "min"
    ONE_SE = "1se"


class GeneratorKind(_ValuesEnum):
    """
    Synthetic data generators available to benchmark scenarios.
    """

    CORRELATED = "correlated"
    CONFOUNDER = "confounder"


class BenchmarkMethod(_ValuesEnum):
    """
    Model-selection procedures compared by the benchmark.

    LASSO is full cross-validation with η fixed at 0. INCORRECT_BLUP is full
    cross-validation whose held-out predictions use full-data kinship blocks.
    """

    FULL = "full"
    INNER = "inner"
    OUTER = "outer"
    INCORRECT_BLUP = "incorrect_blup"
    LASSO = "lasso"
