"""Renyi-pseudodistance (RP) loss for the Gaussian linear model.

For ``alpha > 0`` the empirical loss is

    L(beta, sigma) = -(1/n) * sigma**(-alpha/(alpha+1)) * sum_i exp(-alpha/2 * r_i**2)

with standardized residuals ``r_i = (y_i - x_i'beta) / sigma``; ``alpha == 0``
gives the Gaussian negative log-likelihood.
"""
from __future__ import annotations

import math

import numpy as np

from . import _kernels as K
from .data import Dataset
from .exceptions import DegenerateWeightsError, NonPositiveSigmaError


def _check_sigma(sigma):
    if not sigma > 0:
        raise NonPositiveSigmaError(f"sigma must be positive, got {sigma}")


def phi1(u, alpha):
    """u * exp(-alpha u^2 / 2); bounded by alpha**-0.5 * exp(-0.5) for alpha > 0."""
    u = np.asarray(u, dtype=float)
    return u * np.exp(-0.5 * alpha * u * u)


def phi2(u, alpha):
    u = np.asarray(u, dtype=float)
    return (u * u - 1.0 / (alpha + 1.0)) * np.exp(-0.5 * alpha * u * u)


def _resid(beta, ds: Dataset, intercept):
    return ds.y - intercept - ds.x @ np.asarray(beta, dtype=float)


def rp_loss(beta, sigma: float, ds: Dataset, alpha: float, intercept: float = 0.0) -> float:
    _check_sigma(sigma)
    r = _resid(beta, ds, intercept)
    return float(K.rp_loss_from_residuals(r, float(sigma), float(alpha)))


def rp_loss_terms(residuals, sigma: float, alpha: float) -> np.ndarray:
    """Per-observation loss contributions (their mean is the RP loss for alpha > 0)."""
    _check_sigma(sigma)
    r = np.asarray(residuals, dtype=float)
    if alpha == 0:
        return np.log(sigma * math.sqrt(2 * math.pi)) + 0.5 * (r / sigma) ** 2
    k = alpha / (alpha + 1.0)
    return -(sigma ** (-k)) * np.exp(-0.5 * alpha * (r / sigma) ** 2)


def mm_weights(beta, sigma: float, ds: Dataset, alpha: float, intercept: float = 0.0) -> np.ndarray:
    """Normalized MM weights mu_i proportional to f(y_i | x_i)**alpha.

    Computed in log space, so gross outliers get tiny but positive weight
    instead of underflowing the normalizer.
    """
    _check_sigma(sigma)
    r = _resid(beta, ds, intercept)
    mu, _ = K.mm_weights(r, float(sigma), float(alpha))
    if not np.all(np.isfinite(mu)) or mu.sum() <= 0:
        raise DegenerateWeightsError("MM weights are not finite")
    return mu


def psi(x, y, beta, sigma: float, alpha: float) -> np.ndarray:
    """Gradient of the per-observation loss with respect to (beta, sigma).

    ``-alpha * sigma**(-(2alpha+1)/(alpha+1)) * (phi1(r) x, phi2(r))``. Accepts a
    single observation (x 1-d, y scalar) or a batch (x n-by-p, y length n).
    """
    _check_sigma(sigma)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = (y - x @ np.asarray(beta, dtype=float)) / sigma
    c = -alpha * sigma ** (-(2 * alpha + 1) / (alpha + 1))
    f1 = phi1(u, alpha)
    f2 = phi2(u, alpha)
    if x.ndim == 1:
        return c * np.append(f1 * x, f2)
    return c * np.column_stack([f1[:, None] * x, f2])


def psi_jacobian(x, y, beta, sigma: float, alpha: float) -> np.ndarray:
    """Jacobian of ``psi`` in (beta, sigma): shape (p+1, p+1), or (n, p+1, p+1) for a batch."""
    _check_sigma(sigma)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xb = np.atleast_2d(x)
    u = (np.atleast_1d(np.asarray(y, dtype=float)) - xb @ np.asarray(beta, dtype=float)) / sigma
    e = np.exp(-0.5 * alpha * u * u)
    c = alpha * sigma ** (-(2 * alpha + 1) / (alpha + 1) - 1)
    bb = c * (1 - alpha * u * u) * e
    bs = -c * e * (alpha * u**3 - (3 * alpha + 2) / (alpha + 1) * u)
    ss = -c * e * (alpha * u**4 - (5 * alpha + 3) / (alpha + 1) * u**2
                   + (2 * alpha + 1) / (alpha + 1) ** 2)
    n, p = xb.shape
    out = np.empty((n, p + 1, p + 1))
    out[:, :p, :p] = bb[:, None, None] * xb[:, :, None] * xb[:, None, :]
    out[:, :p, p] = bs[:, None] * xb
    out[:, p, :p] = bs[:, None] * xb
    out[:, p, p] = ss
    return out[0] if single else out


def rp_divergence(beta, sigma: float, ds: Dataset, alpha: float, intercept: float = 0.0) -> float:
    """Empirical RP between the model and the residual distribution (log form).

    A strictly increasing transform of ``rp_loss`` at every (beta, sigma),
    so both share minimizers and descent directions.
    """
    _check_sigma(sigma)
    if alpha == 0:
        return rp_loss(beta, sigma, ds, 0.0, intercept) - math.log(ds.n)
    r = _resid(beta, ds, intercept)
    n = ds.n
    log_f_alpha = -0.5 * alpha * math.log(2 * math.pi * sigma**2) - 0.5 * alpha * (r / sigma) ** 2
    m = log_f_alpha.max()
    log_mean = m + math.log(np.mean(np.exp(log_f_alpha - m)))
    return (
        (-0.5 * alpha * math.log(2 * math.pi * sigma**2) - 0.5 * math.log(alpha + 1)) / (alpha + 1)
        - math.log(n) / (alpha + 1)
        - log_mean / alpha
    )


def jensen_majorizer(beta, sigma, anchor_beta, anchor_sigma, ds: Dataset, alpha: float,
                     intercept: float = 0.0, anchor_intercept: float = 0.0) -> float:
    """Jensen-inequality majorizer of ``rp_divergence`` anchored at a previous iterate.

    Touches ``rp_divergence`` at the anchor and lies above it elsewhere.
    Its (beta, sigma)-dependent part is ``(1/(alpha+1)) log sigma + sum mu_i r_i^2 / (2 sigma^2)``.
    """
    _check_sigma(sigma)
    _check_sigma(anchor_sigma)
    if alpha == 0:
        return rp_divergence(beta, sigma, ds, 0.0, intercept)
    n = ds.n
    r = _resid(beta, ds, intercept)
    r0 = _resid(anchor_beta, ds, anchor_intercept)
    log_f0 = -0.5 * alpha * math.log(2 * math.pi * anchor_sigma**2) - 0.5 * alpha * (r0 / anchor_sigma) ** 2
    m = log_f0.max()
    w = np.exp(log_f0 - m)
    mu = w / w.sum()
    log_mean0 = m + math.log(w.mean())
    log_f = -0.5 * alpha * math.log(2 * math.pi * sigma**2) - 0.5 * alpha * (r / sigma) ** 2
    jensen = -np.sum(mu * (log_f + log_mean0 - log_f0)) / alpha
    return (
        (-0.5 * alpha * math.log(2 * math.pi * sigma**2) - 0.5 * math.log(alpha + 1)) / (alpha + 1)
        - math.log(n) / (alpha + 1)
        + float(jensen)
    )


def quadratic_majorizer(beta, anchor_beta, sigma: float, ds: Dataset, alpha: float,
                        intercept: float = 0.0, anchor_intercept: float = 0.0) -> float:
    """Tangent-line majorizer of ``rp_loss`` in beta at fixed sigma.

    ``L(anchor) + C/2 * sum mu_i (r_i^2 - r0_i^2)`` where mu and C are
    evaluated at the anchor; this is the weighted least-squares surrogate
    minimized by coordinate descent.
    """
    _check_sigma(sigma)
    r = _resid(beta, ds, intercept)
    r0 = _resid(anchor_beta, ds, anchor_intercept)
    mu, log_w = K.mm_weights(r0, float(sigma), float(alpha))
    c = K.curvature(float(sigma), float(alpha), log_w, ds.n)
    base = K.rp_loss_from_residuals(r0, float(sigma), float(alpha))
    return float(base + 0.5 * c * np.sum(mu * (r * r - r0 * r0)))
