"""Data containers, column standardization and coefficient back-transformation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import ConstantColumnError, DimensionMismatchError, EmptyDataError


@dataclass(frozen=True)
class Dataset:
    """Standardized design and centered response.

    ``x`` has columns with mean 0 and ``(1/n) * x_j @ x_j == 1``; ``y`` is
    ``raw_y - y_mean``. The raw data can be recovered from the stored
    ``column_means``, ``column_scales`` and ``y_mean``.
    """

    x: np.ndarray
    y: np.ndarray
    column_means: np.ndarray
    column_scales: np.ndarray
    y_mean: float
    standardized: bool = True
    column_names: Optional[tuple] = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def raw_x(self) -> np.ndarray:
        return self.x * self.column_scales + self.column_means

    def raw_y(self) -> np.ndarray:
        return self.y + self.y_mean


def _as_2d(raw_x) -> np.ndarray:
    x = np.asarray(raw_x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DimensionMismatchError(f"design must be 2-d, got shape {x.shape}")
    return x


def standardize(raw_x, raw_y, column_names=None) -> Dataset:
    """Center and scale predictors, center the response.

    Column scales are the ``1/n`` (population) standard deviations, so every
    standardized column satisfies ``(1/n) x_j'x_j = 1``.

    Raises
    ------
    DimensionMismatchError
        If ``raw_x`` and ``raw_y`` disagree in length.
    ConstantColumnError
        If some predictor has zero spread.
    """
    x = _as_2d(raw_x)
    y = np.asarray(raw_y, dtype=float).ravel()
    n, p = x.shape
    if y.shape[0] != n:
        raise DimensionMismatchError(f"raw_x has {n} rows but raw_y has {y.shape[0]} entries")
    if n < 2 or p < 1:
        raise EmptyDataError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite values in input data")

    means = x.mean(axis=0)
    centered = x - means
    scales = np.sqrt(np.mean(centered**2, axis=0))
    for j in range(p):
        # relative guard; exact-zero spread is the common case
        if scales[j] <= 1e-12 * max(1.0, abs(means[j])):
            name = column_names[j] if column_names is not None else None
            raise ConstantColumnError(j, name)
    xs = np.asfortranarray(centered / scales)
    y_mean = float(y.mean())
    return Dataset(
        x=xs,
        y=y - y_mean,
        column_means=means,
        column_scales=scales,
        y_mean=y_mean,
        standardized=True,
        column_names=tuple(column_names) if column_names is not None else None,
    )


def back_transform(beta_std, intercept_std: float, ds: Dataset):
    """Map standardized-scale coefficients to the original predictor scale.

    Returns ``(beta, intercept)`` such that ``raw_x @ beta + intercept``
    equals ``ds.y_mean + intercept_std + ds.x @ beta_std``.
    """
    beta_std = np.asarray(beta_std, dtype=float)
    beta = beta_std / ds.column_scales
    intercept = ds.y_mean + intercept_std - float(ds.column_means @ beta)
    return beta, intercept


@dataclass(frozen=True)
class FitResult:
    """Output of a single penalized RP fit at fixed (alpha, lambda)."""

    beta: np.ndarray
    beta_std: np.ndarray
    sigma: float
    intercept: float
    intercept_std: float
    lambda_: float
    alpha: float
    family: str
    a: float
    objective_trace: tuple
    converged: bool
    n_iter: int
    active_set: tuple

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]

    @property
    def df(self) -> int:
        return len(self.active_set)

    def predict(self, raw_x) -> np.ndarray:
        return _as_2d(raw_x) @ self.beta + self.intercept
