"""Regularization paths, lambda grids and HBIC model selection.

The penalized RP criterion couples lambda to the scale: the loss curvature
in beta grows like ``sigma**-(alpha/(alpha+1) + 2)``, so a lambda that gives
a sensible sparse fit at the noise level is far above the value at which
the null model (whose sigma is the marginal spread of y) first lets a
variable in. Starting every fit from the null model therefore lands either
back at the null model or, once a few variables enter and sigma shrinks,
on a near-interpolating fit.

:func:`fit_path` therefore works in two stages.

1. Pilot path. A warm-started path of ``step="unit"`` fits, started from the
   null model with a MAD scale. Each beta-step is a weighted lasso-type
   problem with lambda in response units, so the sparsity level does not
   drift as sigma shrinks. The pilot is selected by HBIC and plays the role
   of a robust initial estimate. The MM weights only see residuals, and at
   the null model a leverage point (gross covariate outlier with an ordinary
   response) has an ordinary residual, so the pilot is computed on the rows
   kept by :func:`screen_rows`.
2. Criterion path. Exact majorize-minimize fits of the penalized criterion
   on the grid ``C * pilot_grid`` (``C`` is the majorizer curvature at the
   selected pilot), each started from the pilot. At the pilot's own lambda
   this reproduces the pilot for the L1 penalty and stays in its basin for
   SCAD/MCP. HBIC over these fits gives the reported model.

``init="warm"`` skips the pilot and warm-starts the criterion path from the
converged null model instead, on the exact-curvature grid whose first value
keeps every coefficient at zero.
"""
from __future__ import annotations

import math
import statistics
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import _kernels as K
from .data import Dataset, FitResult, standardize
from .exceptions import ConstantColumnError, DegenerateScaleError, DomainError, EmptyDataError, NotConvergedWarning, RpSparseError
from .penalties import Family, PenaltySpec
from .solver import SolverConfig, fit

DEFAULT_GRID_SIZE = 50
DEFAULT_GRID_RATIO = 0.01
LAMBDA_MAX_MARGIN = 1e-10
HBIC_TIE_TOL = 1e-10


@dataclass
class PathResult:
    lambdas: np.ndarray
    fits: list
    hbic: np.ndarray
    selected_index: int
    errors: dict = field(default_factory=dict)
    pilot: Optional["PathResult"] = None
    curvature: float = 1.0   # factor mapping the pilot grid to this grid

    @property
    def selected(self) -> FitResult:
        return self.fits[self.selected_index]

    def table(self) -> list:
        """One row per lambda: lambda, hbic, df, sigma, objective, converged."""
        rows = []
        for lam, f, h in zip(self.lambdas, self.fits, self.hbic):
            if f is None:
                rows.append(dict(lambda_=float(lam), hbic=float(h), df=None, sigma=None,
                                 objective=None, converged=False))
            else:
                rows.append(dict(lambda_=float(lam), hbic=float(h), df=f.df, sigma=f.sigma,
                                 objective=f.objective, converged=f.converged))
        return rows


def null_fit(ds: Dataset, alpha: float, config: Optional[SolverConfig] = None) -> FitResult:
    """Intercept-and-scale fit with every coefficient held at zero."""
    # converged tightly (it is cheap) so that lambda_max is sharp
    cfg = replace(config or SolverConfig(), alpha=alpha, init=None, step="exact",
                  eps_outer=1e-15, eps_param=1e-13, max_outer=10000)
    # an infinite L1 level thresholds every coordinate to zero
    return fit(ds, PenaltySpec(Family.L1, np.inf), cfg)


def lambda_max(ds: Dataset, alpha: float, config: Optional[SolverConfig] = None,
               step: str = "unit", null: Optional[FitResult] = None) -> float:
    """Smallest L1 level at which beta = 0 is a coordinate-descent fixed point.

    Computed at the converged null model from its MM weights mu:
    ``max_j |sum_i mu_i x_ij r_i|`` for ``step="unit"``, times the majorizer
    curvature for ``step="exact"``. With uniform weights (alpha = 0) the unit
    value is ``max_j |x_j' r| / n``.

    For SCAD and MCP with ``step="exact"`` the null model is a stationary
    point above this level but not necessarily the coordinate-wise global
    minimizer: when the curvature is small the scaled one-dimensional
    problem is nonconvex and its global minimizer may sit in the flat tail.
    """
    if ds.n == 0 or ds.p == 0:
        raise EmptyDataError("empty dataset")
    null = null or null_fit(ds, alpha, config)
    r = ds.y - null.intercept_std
    mu, log_w = K.mm_weights(r, null.sigma, float(alpha))
    lmax = float(np.max(np.abs(ds.x.T @ (mu * r))))
    if step == "exact":
        lmax *= K.curvature(null.sigma, float(alpha), log_w, ds.n)
    # a relative margin keeps the null model a fixed point despite rounding
    return lmax * (1.0 + LAMBDA_MAX_MARGIN)


def lambda_grid(ds: Dataset, alpha: float, k: int = DEFAULT_GRID_SIZE, ratio: float = DEFAULT_GRID_RATIO,
                config: Optional[SolverConfig] = None, step: str = "unit") -> np.ndarray:
    """Geometric grid of k values from lambda_max down to ratio * lambda_max."""
    if ds.n == 0 or ds.p == 0:
        raise EmptyDataError("empty dataset")
    if k < 1:
        raise ValueError("grid size must be >= 1")
    if not 0 < ratio < 1:
        raise ValueError("grid ratio must lie in (0, 1)")
    lmax = lambda_max(ds, alpha, config, step)
    if k == 1:
        return np.array([lmax])
    return lmax * np.geomspace(1.0, ratio, k)


def hbic_value(sigma: float, n: int, p: int, df: int) -> float:
    """``log(sigma^2) + log(log n) * log(p) / n * df``."""
    if n < 3 or p < 2:
        raise DomainError(f"HBIC needs n >= 3 and p >= 2, got n={n}, p={p}")
    if not sigma > 0:
        raise DomainError(f"HBIC needs sigma > 0, got {sigma}")
    return math.log(sigma * sigma) + math.log(math.log(n)) * math.log(p) / n * df


def hbic(fit_result: FitResult, n: int, p: int) -> float:
    """HBIC of a fit; df counts the nonzero coefficients (intercept excluded)."""
    return hbic_value(fit_result.sigma, n, p, fit_result.df)


def screen_rows(ds: Dataset, cutoff: Optional[float] = None) -> np.ndarray:
    """Boolean mask of rows that are not gross covariate outliers.

    A row is dropped when ``max_j |x_ij - median_j| / MAD_j`` exceeds
    ``cutoff``, by default the two-sided normal quantile at level
    ``0.01 / p`` (a clean Gaussian row is dropped with probability about
    1%). If that would drop more than half the rows, every row is kept.
    """
    x = ds.x
    med = np.median(x, axis=0)
    mad = 1.4826 * np.median(np.abs(x - med), axis=0)
    # columns with a vanishing MAD fall back to their standard deviation (1 after standardization)
    mad = np.where(mad > 0, mad, 1.0)
    if cutoff is None:
        cutoff = statistics.NormalDist().inv_cdf(1.0 - 0.005 / ds.p)
    keep = np.max(np.abs(x - med) / mad, axis=1) <= cutoff
    if keep.sum() < max(3, ds.n // 2):
        keep[:] = True
    return keep


def _to_coordinates(res: FitResult, src: Dataset, dst: Dataset) -> FitResult:
    """Express a fit made on ``src`` in the standardized coordinates of ``dst``."""
    beta_raw = res.beta_std / src.column_scales
    intercept_raw = src.y_mean + res.intercept_std - float(src.column_means @ beta_raw)
    beta_std = beta_raw * dst.column_scales
    intercept_std = intercept_raw - dst.y_mean + float(dst.column_means @ beta_raw)
    return replace(res, beta_std=beta_std, intercept_std=intercept_std, beta=beta_raw,
                   intercept=intercept_raw)


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("lambda grid must be a non-empty vector")
    if np.any(grid <= 0) or not np.all(np.isfinite(grid)):
        raise ValueError("lambda grid entries must be positive and finite")
    if np.any(np.diff(grid) >= 0):
        raise ValueError("lambda grid must be strictly decreasing")
    return grid


def _score(res: FitResult, ds: Dataset) -> float:
    # HBIC is undefined for tiny problems; every fit then scores equally
    if ds.n < 3 or ds.p < 2:
        return 0.0
    return hbic(res, ds.n, ds.p)


def _run(ds, family, a, grid, config, start, warm) -> PathResult:
    fits, scores, errors = [], [], {}
    prev = start
    stopped = False
    for i, lam in enumerate(grid):
        if stopped:
            errors[i] = "skipped: a larger lambda already collapsed the scale"
            fits.append(None)
            scores.append(math.inf)
            continue
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", NotConvergedWarning)
                res = fit(ds, PenaltySpec(family, lam, a), replace(config, init=prev))
        except RpSparseError as exc:
            errors[i] = f"{type(exc).__name__}: {exc}"
            # smaller lambdas only loosen the fit further
            stopped = isinstance(exc, DegenerateScaleError)
            fits.append(None)
            scores.append(math.inf)
            continue
        fits.append(res)
        scores.append(_score(res, ds))
        if warm:
            prev = res
    scores = np.asarray(scores)
    if not np.any(np.isfinite(scores)):
        raise RpSparseError(f"every lambda on the path failed; first error: {errors[0]}")
    # ties (up to rounding) go to the first minimizer, i.e. the largest lambda
    best = np.min(scores)
    sel = int(np.flatnonzero(scores <= best + HBIC_TIE_TOL * (1.0 + abs(best)))[0])
    return PathResult(grid, fits, scores, sel, errors)


def pilot_path(ds: Dataset, alpha: float, family="SCAD", config: Optional[SolverConfig] = None,
               a: float = float("nan"), k: int = DEFAULT_GRID_SIZE,
               ratio: float = DEFAULT_GRID_RATIO, screen: bool = True) -> PathResult:
    """Warm-started ``step="unit"`` path from the null model, selected by HBIC.

    With ``screen=True`` the path is fitted on the rows kept by
    :func:`screen_rows`, standardized afresh (column spreads inflated by the
    dropped rows would otherwise distort the penalty), and every fit is then
    expressed in the coordinates of ``ds``.
    """
    cfg = replace(config or SolverConfig(), alpha=alpha, step="unit", init=None)
    work = ds
    if screen:
        keep = screen_rows(ds)
        if not keep.all():
            try:
                work = standardize(ds.raw_x()[keep], ds.raw_y()[keep])
            except ConstantColumnError:
                work = ds
    grid = lambda_grid(work, alpha, k, ratio, cfg, step="unit")
    result = _run(work, family, a, grid, cfg, None, warm=True)
    if work is not ds:
        result.fits = [None if f is None else _to_coordinates(f, work, ds) for f in result.fits]
    return result


def fit_path(ds: Dataset, alpha: float, family="SCAD", grid=None, config: Optional[SolverConfig] = None,
             a: float = float("nan"), k: int = DEFAULT_GRID_SIZE, ratio: float = DEFAULT_GRID_RATIO,
             init: str = "pilot", screen: bool = True) -> PathResult:
    """Fit the penalized criterion over a decreasing lambda grid and select by HBIC.

    Parameters
    ----------
    grid : array, optional
        Strictly decreasing lambdas for the criterion. By default the pilot
        grid scaled by the curvature at the selected pilot.
    init : {"pilot", "warm"}
        ``"pilot"`` starts every fit from the HBIC-selected pilot (see the
        module docstring). ``"warm"`` warm-starts each lambda from the
        previous solution, the first from the converged null model.
    screen : bool
        Fit the pilot on the rows kept by :func:`screen_rows`.

    Failed lambdas are recorded in ``errors``, get an infinite HBIC and are
    never selected. Once a fit collapses the scale (exact fit), the remaining
    smaller lambdas are skipped. Ties go to the larger lambda.
    """
    config = replace(config or SolverConfig(), alpha=alpha, step="exact")
    if init not in ("pilot", "warm"):
        raise ValueError(f"init must be 'pilot' or 'warm', got {init!r}")
    if init == "warm":
        null = null_fit(ds, alpha, config)
        if grid is None:
            if k < 1 or not 0 < ratio < 1:
                raise ValueError("need k >= 1 and ratio in (0, 1)")
            lmax = lambda_max(ds, alpha, config, step="exact", null=null)
            grid = lmax * np.geomspace(1.0, ratio, k) if k > 1 else np.array([lmax])
        return _run(ds, family, a, _check_grid(grid), config, null, warm=True)

    pilot = pilot_path(ds, alpha, family, config, a, k, ratio, screen)
    start = pilot.selected
    r = ds.y - start.intercept_std - ds.x @ start.beta_std
    _, log_w = K.mm_weights(r, start.sigma, float(alpha))
    c = float(K.curvature(start.sigma, float(alpha), log_w, ds.n))
    grid = _check_grid(c * pilot.lambdas if grid is None else grid)
    result = _run(ds, family, a, grid, config, start, warm=False)
    result.pilot = pilot
    result.curvature = c
    return result
