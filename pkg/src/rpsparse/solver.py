"""MM / coordinate-descent solver for the penalized RP criterion.

Each outer iteration

1. computes MM weights ``mu_i ~ exp(-alpha/2 * (r_i/sigma)^2)`` at the current
   iterate, which turn the RP loss into a weighted least-squares majorizer
   ``C/2 * sum_i mu_i r_i^2`` (C is the majorizer curvature at fixed sigma);
2. minimizes that majorizer plus the penalty by cyclic coordinate descent,
   with an unpenalized intercept step before every pass;
3. updates sigma by minimizing the Jensen majorizer of the RP criterion,
   ``sigma^2 = (alpha+1) * sum_i mu_i r_i^2``;
4. stops once the penalized objective and the parameters stop moving.

Both half-steps are majorize-minimize moves, so the penalized objective is
non-increasing along the iterations.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from . import _kernels as K
from .data import Dataset, FitResult, back_transform
from .exceptions import (
    DegenerateScaleError,
    DegenerateWeightsError,
    NonPositiveSigmaError,
    NotConvergedWarning,
)
from .penalties import PenaltySpec

MAD_CONSTANT = 1.4826


@dataclass(frozen=True)
class SolverConfig:
    """Tuning of the MM loop.

    ``init`` is ``None`` (zero coefficients, robust MAD scale), a previous
    :class:`FitResult` (warm start) or a tuple ``(beta_std, sigma)`` /
    ``(beta_std, sigma, intercept_std)``.

    ``step="exact"`` scales the weighted least-squares step by the majorizer
    curvature, so every iteration decreases the penalized criterion.
    ``step="unit"`` drops that factor: the beta-step then minimizes
    ``0.5 * sum_i mu_i r_i^2 + sum_j p_lambda(|beta_j|)``, with lambda measured
    in response units and independent of sigma. This is the reweighted
    lasso-type iteration used to build robust starting points; its iterates
    need not decrease the criterion.
    """

    alpha: float = 0.0
    eps_outer: float = 1e-8
    eps_inner: float = 1e-8
    eps_param: float = 1e-7
    max_outer: int = 500
    max_inner: int = 1000
    init: Union[None, FitResult, tuple] = None
    fit_intercept: bool = True
    step: str = "exact"

    def __post_init__(self):
        if self.step not in ("exact", "unit"):
            raise ValueError(f"step must be 'exact' or 'unit', got {self.step!r}")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if min(self.eps_outer, self.eps_inner, self.eps_param) <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass
class MmState:
    beta: np.ndarray
    sigma: float
    intercept: float
    mu: np.ndarray
    residuals: np.ndarray
    objective: float
    curvature: float = 1.0


def robust_scale(y) -> float:
    """Normalized MAD, falling back to the standard deviation when the MAD vanishes."""
    y = np.asarray(y, dtype=float)
    s = MAD_CONSTANT * float(np.median(np.abs(y - np.median(y))))
    if s <= 0:
        s = float(np.std(y))
    if s <= 0:
        s = 1.0
    return s


def objective(beta, sigma: float, intercept: float, ds: Dataset, alpha: float,
              spec: PenaltySpec) -> float:
    """Penalized criterion: RP loss plus sum_j p_lambda(|beta_j|); intercept unpenalized."""
    if not sigma > 0:
        raise NonPositiveSigmaError(f"sigma must be positive, got {sigma}")
    beta = np.asarray(beta, dtype=float)
    r = ds.y - intercept - ds.x @ beta
    return float(K.rp_loss_from_residuals(r, float(sigma), float(alpha))
                 + K.penalty_sum(beta, spec.code, spec.lam, spec.a))


def make_state(beta, sigma: float, intercept: float, ds: Dataset, alpha: float,
               spec: PenaltySpec) -> MmState:
    """Build the MM state (weights, residuals, curvature) anchored at (beta, sigma, intercept)."""
    if not sigma > 0:
        raise NonPositiveSigmaError(f"sigma must be positive, got {sigma}")
    beta = np.array(beta, dtype=float)
    r = K.residuals(ds.x, ds.y, beta, float(intercept))
    mu, log_w = K.mm_weights(r, float(sigma), float(alpha))
    if not np.all(np.isfinite(mu)):
        raise DegenerateWeightsError("MM weights are not finite")
    c = K.curvature(float(sigma), float(alpha), log_w, ds.n)
    q = objective(beta, sigma, intercept, ds, alpha, spec)
    return MmState(beta, float(sigma), float(intercept), mu, r, q, float(c))


def surrogate_value(state: MmState, spec: PenaltySpec) -> float:
    """Weighted penalized least-squares surrogate at the state's coefficients."""
    return float(K.surrogate(state.residuals, state.mu, state.curvature, state.beta,
                             spec.code, spec.lam, spec.a))


def cd_sweep(state: MmState, ds: Dataset, spec: PenaltySpec,
             config: Optional[SolverConfig] = None) -> MmState:
    """One cyclic pass j = 1..p of coordinate descent on the weighted surrogate.

    Coordinate j solves ``(C v_j / 2)(b - z_j)^2 + p_lambda(|b|)`` exactly,
    with ``v_j = sum_i mu_i x_ij^2`` and ``z_j`` the weighted partial-residual
    regression coefficient. Weights, curvature and sigma stay fixed.
    """
    beta = state.beta.copy()
    r = state.residuals.copy()
    v = K.weighted_colsq(ds.x, state.mu)
    idx = np.arange(ds.p)
    K.sweep(ds.x, r, beta, state.mu, v, state.curvature, spec.code, spec.lam, spec.a, idx, ds.p)
    alpha = config.alpha if config is not None else 0.0
    q = objective(beta, state.sigma, state.intercept, ds, alpha, spec)
    return replace(state, beta=beta, residuals=r, objective=q)


def update_intercept(state: MmState, ds: Dataset) -> float:
    """Weighted mean of the partial residuals ``y - x'beta`` under the MM weights."""
    return float(np.sum(state.mu * (ds.y - ds.x @ state.beta)))


def update_sigma(beta, intercept: float, prev_state: MmState, ds: Dataset, alpha: float,
                 weights: str = "current") -> float:
    """Scale update ``sigma^2 = (alpha+1) * sum_i mu_i r_i^2`` with residuals at the new beta.

    ``weights="current"`` evaluates mu at (new beta, previous sigma), which is
    an exact majorize-minimize step and used by :func:`fit`.
    ``weights="previous"`` reuses ``prev_state.mu`` (weights at the previous
    iterate, as in the lagged form of the update).
    """
    r = ds.y - intercept - ds.x @ np.asarray(beta, dtype=float)
    if not np.any(r != 0):
        raise DegenerateScaleError("all residuals are zero")
    if weights == "current":
        s = K.sigma_step(r, prev_state.sigma, float(alpha))
    elif weights == "previous":
        if alpha == 0:
            s = math.sqrt(np.mean(r * r))
        else:
            s = math.sqrt((alpha + 1.0) * np.sum(prev_state.mu * r * r))
    else:
        raise ValueError(f"unknown weights mode {weights!r}")
    if not (math.isfinite(s) and s > K.SIGMA_FLOOR):
        raise DegenerateScaleError(f"scale estimate collapsed to {s}")
    return float(s)


def _initial_point(ds: Dataset, config: SolverConfig):
    init = config.init
    if init is None:
        beta = np.zeros(ds.p)
        b0 = float(np.median(ds.y)) if config.fit_intercept else 0.0
        sigma = robust_scale(ds.y - b0)
    elif isinstance(init, FitResult):
        beta = np.array(init.beta_std, dtype=float)
        b0 = init.intercept_std if config.fit_intercept else 0.0
        sigma = init.sigma
    else:
        beta = np.array(init[0], dtype=float)
        sigma = float(init[1])
        b0 = float(init[2]) if len(init) > 2 and config.fit_intercept else 0.0
    if beta.shape != (ds.p,):
        raise ValueError(f"initial beta has shape {beta.shape}, expected ({ds.p},)")
    if not sigma > 0:
        raise NonPositiveSigmaError(f"initial sigma must be positive, got {sigma}")
    return beta, b0, sigma


def fit(ds: Dataset, spec: PenaltySpec, config: Optional[SolverConfig] = None) -> FitResult:
    """Penalized RP fit at a single (alpha, lambda).

    Raises
    ------
    DegenerateScaleError
        If sigma collapses to the floor, or the active set plus intercept
        reaches n coefficients (an exact fit is then available).

    Warns
    -----
    NotConvergedWarning
        If ``max_outer`` is reached; the last iterate is returned with
        ``converged=False``.
    """
    config = config or SolverConfig()
    beta, b0, sigma = _initial_point(ds, config)
    trace = np.empty(config.max_outer + 1)
    b0, sigma, ntrace, status, n_iter = K.fit_core(
        ds.x, ds.y, beta, float(b0), float(sigma), float(config.alpha),
        spec.code, spec.lam, spec.a, bool(config.fit_intercept),
        config.eps_outer, config.eps_inner, config.eps_param,
        config.max_outer, config.max_inner, trace, config.step == "unit",
    )
    done = tuple(float(t) for t in trace[:ntrace])
    if status == K.STATUS_DEGENERATE_SCALE:
        raise DegenerateScaleError("scale estimate reached the floor; the data are fitted exactly", done)
    if status == K.STATUS_SATURATED:
        raise DegenerateScaleError(
            "active set is saturated (an exact fit is possible and the scale collapses); "
            "increase lambda", done)
    if status == K.STATUS_DEGENERATE_WEIGHTS:
        raise DegenerateWeightsError("MM weights became non-finite")
    converged = status == K.STATUS_CONVERGED
    if not converged:
        warnings.warn(
            f"MM loop hit max_outer={config.max_outer} (alpha={config.alpha}, lambda={spec.lam:.4g})",
            NotConvergedWarning,
            stacklevel=2,
        )
    beta_raw, intercept = back_transform(beta, b0, ds)
    return FitResult(
        beta=beta_raw,
        beta_std=beta,
        sigma=float(sigma),
        intercept=float(intercept),
        intercept_std=float(b0),
        lambda_=spec.lam,
        alpha=float(config.alpha),
        family=spec.family.value,
        a=spec.a,
        objective_trace=done,
        converged=converged,
        n_iter=int(n_iter),
        active_set=tuple(int(j) for j in np.flatnonzero(beta)),
    )


def kkt_residuals(result: FitResult, ds: Dataset) -> dict:
    """Stationarity residuals of the penalized criterion at a fitted point.

    ``active``: max over nonzero j of |dL/dbeta_j + p'(|beta_j|) sign(beta_j)|.
    ``inactive``: max over zero j of (|dL/dbeta_j| - p'(0+)), floored at 0.
    ``sigma``: |dL/dsigma|. ``intercept``: |dL/db0| (0 when no intercept).
    """
    from .loss import phi1, phi2

    alpha = result.alpha
    spec = PenaltySpec(result.family, result.lambda_, result.a)
    beta = result.beta_std
    s = result.sigma
    r = ds.y - result.intercept_std - ds.x @ beta
    u = r / s
    if alpha == 0:
        g1 = u / s
        g2 = (u * u - 1.0) / s
    else:
        c = alpha * s ** (-(2 * alpha + 1) / (alpha + 1))
        g1 = c * phi1(u, alpha)
        g2 = c * phi2(u, alpha)
    score = ds.x.T @ g1 / ds.n   # equals -dL/dbeta
    d_sigma = -np.mean(g2)
    active = beta != 0
    res_active = 0.0
    if np.any(active):
        pd = np.array([K.pen_deriv(abs(b), spec.code, spec.lam, spec.a) for b in beta[active]])
        res_active = float(np.max(np.abs(-score[active] + pd * np.sign(beta[active]))))
    res_inactive = 0.0
    if np.any(~active):
        res_inactive = float(max(0.0, np.max(np.abs(score[~active])) - spec.lam))
    return {
        "active": res_active,
        "inactive": res_inactive,
        "sigma": float(abs(d_sigma)),
        "intercept": float(abs(np.mean(g1))),
    }
