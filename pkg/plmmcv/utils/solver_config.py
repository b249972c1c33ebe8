import os
from typing import Any, Optional, Self

THREADS_ENV_VAR = "PLMMCV_THREADS"


def default_thread_count() -> int:
    """
    Resolve the default worker count from the environment.

    Returns:
        int: The value of PLMMCV_THREADS when set to a positive integer, otherwise 1.

    Raises:
        ValueError: If PLMMCV_THREADS is set but is not a positive integer.
    """
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or not raw.strip():
        return 1
    try:
        value = int(raw)
    except ValueError as e:
        raise ValueError(f"{THREADS_ENV_VAR} must be a positive integer. Current value: {raw!r}.") from e
    if value < 1:
        raise ValueError(f"{THREADS_ENV_VAR} must be a positive integer. Current value: {raw!r}.")
    return value


def _check_number(name: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(
            f"'{name}' must be a number.",
            f"Current type: {type(value)}.",
        )
    return float(value)


def _check_integer(name: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(
            f"'{name}' must be an integer.",
            f"Current type: {type(value)}.",
        )
    return value


class SolverConfig:
    """
    Numeric settings shared by the fitting pipeline, cross-validation and the benchmark.

    Attributes:
        eta (Optional[float]): Fixed η; None means estimate it by maximum likelihood.
        eta_max (float): Upper bound for η, keeps preconditioner weights finite.
        eta_grid (int): Number of grid points for the η search.
        eta_tol (float): Refinement tolerance on η.
        n_lambda (int): Number of penalty values on the path.
        min_ratio (Optional[float]): Ratio of the smallest to the largest penalty;
            None picks 0.001 when n > p and 0.05 otherwise.
        tol (float): Convergence tolerance on the largest coefficient change per sweep.
        max_iter (int): Maximum number of coordinate-descent sweeps per penalty value.
        variance_threshold (float): Columns with variance at or below this are screened out.
    """

    def __init__(
        self,
        eta: Optional[float] = None,
        eta_max: float = 0.99,
        eta_grid: int = 100,
        eta_tol: float = 1e-4,
        n_lambda: int = 100,
        min_ratio: Optional[float] = None,
        tol: float = 1e-7,
        max_iter: int = 100_000,
        variance_threshold: float = 1e-10,
    ):
        """
        Initializes an instance of the SolverConfig class.

        Args:
            eta (Optional[float]): Fixed η or None to estimate it.
            eta_max (float): Upper bound for η.
            eta_grid (int): Number of grid points for the η search.
            eta_tol (float): Refinement tolerance on η.
            n_lambda (int): Number of penalty values on the path.
            min_ratio (Optional[float]): Smallest-to-largest penalty ratio.
            tol (float): Coordinate-descent convergence tolerance.
            max_iter (int): Maximum sweeps per penalty value.
            variance_threshold (float): Near-constant column screen.
        """
        self.eta_max = eta_max
        self.eta = eta
        self.eta_grid = eta_grid
        self.eta_tol = eta_tol
        self.n_lambda = n_lambda
        self.min_ratio = min_ratio
        self.tol = tol
        self.max_iter = max_iter
        self.variance_threshold = variance_threshold

    @property
    def eta_max(self) -> float:
        """
        Get the upper bound for η.

        Returns:
            float: Upper bound for η.
        """
        return self.__eta_max

    @eta_max.setter
    def eta_max(self, value: float) -> None:
        """
        Set the upper bound for η.

        Args:
            value (float): Upper bound, in [0, 1).

        Raises:
            TypeError: If 'value' is not a number.
            ValueError: If 'value' is outside [0, 1).
        """
        value = _check_number("eta_max", value)
        if not 0.0 <= value < 1.0:
            raise ValueError(
                "'eta_max' must be in [0, 1).",
                f"Current value: {value}.",
            )
        self.__eta_max = value

    @property
    def eta(self) -> Optional[float]:
        """
        Get the fixed η, or None when η is estimated.

        Returns:
            Optional[float]: Fixed η.
        """
        return self.__eta

    @eta.setter
    def eta(self, value: Optional[float]) -> None:
        """
        Set the fixed η.

        Args:
            value (Optional[float]): η in [0, eta_max], or None.

        Raises:
            TypeError: If 'value' is not a number or None.
            ValueError: If 'value' is outside [0, eta_max].
        """
        if value is None:
            self.__eta = None
            return

        value = _check_number("eta", value)
        if not 0.0 <= value <= self.eta_max:
            raise ValueError(
                f"'eta' must be in [0, {self.eta_max}].",
                f"Current value: {value}.",
            )
        self.__eta = value

    @property
    def eta_grid(self) -> int:
        """
        Get the number of grid points for the η search.

        Returns:
            int: Grid size.
        """
        return self.__eta_grid

    @eta_grid.setter
    def eta_grid(self, value: int) -> None:
        """
        Set the number of grid points for the η search.

        Args:
            value (int): Grid size, at least 2.

        Raises:
            TypeError: If 'value' is not an integer.
            ValueError: If 'value' is smaller than 2.
        """
        value = _check_integer("eta_grid", value)
        if value < 2:
            raise ValueError("'eta_grid' must be at least 2.", f"Current value: {value}.")
        self.__eta_grid = value

    @property
    def eta_tol(self) -> float:
        """
        Get the η refinement tolerance.

        Returns:
            float: Tolerance on η.
        """
        return self.__eta_tol

    @eta_tol.setter
    def eta_tol(self, value: float) -> None:
        value = _check_number("eta_tol", value)
        if value <= 0:
            raise ValueError("'eta_tol' must be positive.", f"Current value: {value}.")
        self.__eta_tol = value

    @property
    def n_lambda(self) -> int:
        """
        Get the number of penalty values on the path.

        Returns:
            int: Path length.
        """
        return self.__n_lambda

    @n_lambda.setter
    def n_lambda(self, value: int) -> None:
        """
        Set the number of penalty values on the path.

        Args:
            value (int): Path length, at least 1.

        Raises:
            TypeError: If 'value' is not an integer.
            ValueError: If 'value' is smaller than 1.
        """
        value = _check_integer("n_lambda", value)
        if value < 1:
            raise ValueError("'n_lambda' must be at least 1.", f"Current value: {value}.")
        self.__n_lambda = value

    @property
    def min_ratio(self) -> Optional[float]:
        """
        Get the smallest-to-largest penalty ratio.

        Returns:
            Optional[float]: The ratio, or None for the size-dependent default.
        """
        return self.__min_ratio

    @min_ratio.setter
    def min_ratio(self, value: Optional[float]) -> None:
        """
        Set the smallest-to-largest penalty ratio.

        Args:
            value (Optional[float]): Ratio in (0, 1), or None.

        Raises:
            TypeError: If 'value' is not a number or None.
            ValueError: If 'value' is outside (0, 1).
        """
        if value is None:
            self.__min_ratio = None
            return

        value = _check_number("min_ratio", value)
        if not 0.0 < value < 1.0:
            raise ValueError("'min_ratio' must be in (0, 1).", f"Current value: {value}.")
        self.__min_ratio = value

    @property
    def tol(self) -> float:
        """
        Get the coordinate-descent convergence tolerance.

        Returns:
            float: Tolerance.
        """
        return self.__tol

    @tol.setter
    def tol(self, value: float) -> None:
        value = _check_number("tol", value)
        if value <= 0:
            raise ValueError("'tol' must be positive.", f"Current value: {value}.")
        self.__tol = value

    @property
    def max_iter(self) -> int:
        """
        Get the maximum number of sweeps per penalty value.

        Returns:
            int: Sweep budget.
        """
        return self.__max_iter

    @max_iter.setter
    def max_iter(self, value: int) -> None:
        value = _check_integer("max_iter", value)
        if value < 1:
            raise ValueError("'max_iter' must be at least 1.", f"Current value: {value}.")
        self.__max_iter = value

    @property
    def variance_threshold(self) -> float:
        """
        Get the near-constant column threshold.

        Returns:
            float: Variance threshold.
        """
        return self.__variance_threshold

    @variance_threshold.setter
    def variance_threshold(self, value: float) -> None:
        value = _check_number("variance_threshold", value)
        if value < 0:
            raise ValueError("'variance_threshold' must be non-negative.", f"Current value: {value}.")
        self.__variance_threshold = value

    def resolve_min_ratio(self, n: int, p: int) -> float:
        """
        Resolve the penalty ratio for a design of the given size.

        Args:
            n (int): Number of observations.
            p (int): Number of features.

        Returns:
            float: The configured ratio, or 0.001 when n > p and 0.05 otherwise.
        """
        if self.min_ratio is not None:
            return self.min_ratio
        return 0.001 if n > p else 0.05

    def with_eta(self, eta: Optional[float]) -> Self:
        """
        Return a copy of this configuration with a different fixed η.

        Args:
            eta (Optional[float]): The new fixed η or None.

        Returns:
            SolverConfig: The modified copy.
        """
        values = self.to_dict()
        values["eta"] = eta
        return type(self)(**values)

    def to_dict(self) -> dict[str, Any]:
        """
        Represent the configuration as a plain dictionary.

        Returns:
            dict[str, Any]: Constructor keyword arguments.
        """
        return {
            "eta": self.eta,
            "eta_max": self.eta_max,
            "eta_grid": self.eta_grid,
            "eta_tol": self.eta_tol,
            "n_lambda": self.n_lambda,
            "min_ratio": self.min_ratio,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "variance_threshold": self.variance_threshold,
        }

    def __str__(self) -> str:
        """
        Get a string representation of the SolverConfig instance.

        Returns:
            str: String representation of the SolverConfig instance.
        """
        return str(self.to_dict())
