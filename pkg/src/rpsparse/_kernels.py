"""Compiled scalar/array kernels shared by the penalty, loss and solver modules.

Penalty families are encoded as small ints so they can cross the numba
boundary: 0 = L1, 1 = SCAD, 2 = MCP.
"""
import math

import numpy as np
from numba import njit

L1 = 0
SCAD = 1
MCP = 2

STATUS_CONVERGED = 0
STATUS_MAX_ITER = 1
STATUS_DEGENERATE_SCALE = 2
STATUS_DEGENERATE_WEIGHTS = 3
STATUS_SATURATED = 4

SIGMA_FLOOR = 1e-10


@njit(cache=True, nogil=True)
def soft_threshold(z, lam):
    if z > lam:
        return z - lam
    if z < -lam:
        return z + lam
    return 0.0


@njit(cache=True, nogil=True)
def pen_value(s, fam, lam, a):
    if fam == L1:
        return lam * s
    if fam == SCAD:
        if s <= lam:
            return lam * s
        if s <= a * lam:
            return (2.0 * a * lam * s - s * s - lam * lam) / (2.0 * (a - 1.0))
        return (a + 1.0) * lam * lam / 2.0
    if s <= a * lam:
        return lam * s - s * s / (2.0 * a)
    return a * lam * lam / 2.0


@njit(cache=True, nogil=True)
def pen_deriv(s, fam, lam, a):
    if fam == L1:
        return lam
    if fam == SCAD:
        if s <= lam:
            return lam
        if s <= a * lam:
            return (a * lam - s) / (a - 1.0)
        return 0.0
    if s <= a * lam:
        return lam - s / a
    return 0.0


@njit(cache=True, nogil=True)
def pen_second(s, fam, lam, a):
    # right limit at the kinks
    if fam == L1:
        return 0.0
    if fam == SCAD:
        if lam <= s < a * lam:
            return -1.0 / (a - 1.0)
        return 0.0
    if s < a * lam:
        return -1.0 / a
    return 0.0


@njit(cache=True, nogil=True)
def penalty_sum(beta, fam, lam, a):
    total = 0.0
    for j in range(beta.shape[0]):
        if beta[j] != 0.0:
            total += pen_value(abs(beta[j]), fam, lam, a)
    return total


@njit(cache=True, nogil=True)
def _uni_obj(b, z, gamma, fam, lam, a):
    return 0.5 * (b - z) ** 2 + gamma * pen_value(abs(b), fam, lam, a)


@njit(cache=True, nogil=True)
def uni_min(z, fam, lam, a, gamma):
    """argmin_b 0.5*(b - z)**2 + gamma * p(|b|)."""
    if fam == L1:
        return soft_threshold(z, gamma * lam)
    az = abs(z)
    sgn = 1.0 if z >= 0.0 else -1.0
    if fam == MCP:
        if gamma < a:
            if az <= a * lam:
                return soft_threshold(z, gamma * lam) / (1.0 - gamma / a)
            return z
        # non-convex univariate problem: the concave piece is minimized at an endpoint
        best = 0.0
        best_v = _uni_obj(0.0, z, gamma, fam, lam, a)
        cands = (sgn * a * lam, sgn * max(az, a * lam))
        for c in cands:
            v = _uni_obj(c, z, gamma, fam, lam, a)
            if v < best_v:
                best, best_v = c, v
        return best
    if gamma < a - 1.0:
        if az <= lam * (1.0 + gamma):
            return soft_threshold(z, gamma * lam)
        if az <= a * lam:
            return soft_threshold(z, gamma * a * lam / (a - 1.0)) / (1.0 - gamma / (a - 1.0))
        return z
    best = 0.0
    best_v = _uni_obj(0.0, z, gamma, fam, lam, a)
    cands = (
        sgn * min(max(az - gamma * lam, 0.0), lam),
        sgn * lam,
        sgn * a * lam,
        sgn * max(az, a * lam),
    )
    for c in cands:
        v = _uni_obj(c, z, gamma, fam, lam, a)
        if v < best_v:
            best, best_v = c, v
    return best


@njit(cache=True, nogil=True)
def residuals(x, y, beta, b0):
    r = y - b0
    for j in range(x.shape[1]):
        if beta[j] != 0.0:
            r -= beta[j] * x[:, j]
    return r


@njit(cache=True, nogil=True)
def mm_weights(r, sigma, alpha):
    """Normalized weights proportional to exp(-alpha/2 (r/sigma)^2) and log of their raw sum."""
    n = r.shape[0]
    mu = np.empty(n)
    if alpha == 0.0:
        mu[:] = 1.0 / n
        return mu, math.log(n)
    t = -0.5 * alpha * (r / sigma) ** 2
    m = t.max()
    w = np.exp(t - m)
    s = w.sum()
    mu[:] = w / s
    return mu, m + math.log(s)


@njit(cache=True, nogil=True)
def curvature(sigma, alpha, log_w, n):
    """Coefficient C of the quadratic majorizer C/2 * sum(mu * r**2) of the loss at fixed sigma."""
    if alpha == 0.0:
        return 1.0 / (sigma * sigma)
    k = alpha / (alpha + 1.0)
    return alpha * math.exp(log_w - (k + 2.0) * math.log(sigma) - math.log(n))


@njit(cache=True, nogil=True)
def rp_loss_from_residuals(r, sigma, alpha):
    n = r.shape[0]
    if alpha == 0.0:
        return math.log(sigma * math.sqrt(2.0 * math.pi)) + np.sum(r * r) / (2.0 * n * sigma * sigma)
    k = alpha / (alpha + 1.0)
    return -(sigma ** (-k)) * np.mean(np.exp(-0.5 * alpha * (r / sigma) ** 2))


@njit(cache=True, nogil=True)
def weighted_colsq(x, mu):
    p = x.shape[1]
    v = np.empty(p)
    for j in range(p):
        v[j] = np.sum(mu * x[:, j] * x[:, j])
    return v


@njit(cache=True, nogil=True)
def intercept_step(r, mu):
    """Move the intercept to the weighted mean of partial residuals; returns the shift."""
    d = np.sum(mu * r)
    r -= d
    return d


@njit(cache=True, nogil=True)
def sweep(x, r, beta, mu, v, c, fam, lam, a, idx, nidx):
    """One coordinate pass over idx[:nidx]; updates beta and r in place, returns max |step|."""
    maxd = 0.0
    for t in range(nidx):
        j = idx[t]
        vj = v[j]
        if vj <= 1e-300:
            continue
        xj = x[:, j]
        g = np.sum(mu * xj * r)
        z = g / vj + beta[j]
        b = uni_min(z, fam, lam, a, 1.0 / (c * vj))
        d = b - beta[j]
        if d != 0.0:
            r -= d * xj
            beta[j] = b
            if abs(d) > maxd:
                maxd = abs(d)
    return maxd


@njit(cache=True, nogil=True)
def surrogate(r, mu, c, beta, fam, lam, a):
    return 0.5 * c * np.sum(mu * r * r) + penalty_sum(beta, fam, lam, a)


@njit(cache=True, nogil=True)
def sigma_step(r, sigma, alpha):
    """Minimize the Jensen majorizer of the RP criterion in sigma at the current residuals."""
    if alpha == 0.0:
        return math.sqrt(np.mean(r * r))
    mu, _ = mm_weights(r, sigma, alpha)
    return math.sqrt((alpha + 1.0) * np.sum(mu * r * r))


@njit(cache=True, nogil=True)
def fit_core(x, y, beta, b0, sigma, alpha, fam, lam, a, fit_intercept,
             eps_outer, eps_inner, eps_param, max_outer, max_inner, trace, unit_curvature=False):
    n, p = x.shape
    r = residuals(x, y, beta, b0)
    q = rp_loss_from_residuals(r, sigma, alpha) + penalty_sum(beta, fam, lam, a)
    trace[0] = q
    ntrace = 1
    status = STATUS_MAX_ITER
    all_idx = np.arange(p)
    active = np.empty(p, dtype=np.int64)
    beta_old = beta.copy()
    n_outer = 0
    for m in range(max_outer):
        n_outer = m + 1
        mu, log_w = mm_weights(r, sigma, alpha)
        if not np.all(np.isfinite(mu)):
            status = STATUS_DEGENERATE_WEIGHTS
            break
        c = 1.0 if unit_curvature else curvature(sigma, alpha, log_w, n)
        v = weighted_colsq(x, mu)
        beta_old[:] = beta
        b0_old = b0
        sigma_old = sigma

        s_val = surrogate(r, mu, c, beta, fam, lam, a)
        full = True
        for _ in range(max_inner):
            maxd = 0.0
            if fit_intercept:
                d0 = intercept_step(r, mu)
                b0 += d0
                maxd = abs(d0)
            if full:
                md = sweep(x, r, beta, mu, v, c, fam, lam, a, all_idx, p)
            else:
                na = 0
                for j in range(p):
                    if beta[j] != 0.0:
                        active[na] = j
                        na += 1
                md = sweep(x, r, beta, mu, v, c, fam, lam, a, active, na)
            maxd = max(maxd, md)
            s_new = surrogate(r, mu, c, beta, fam, lam, a)
            scale = 1.0 + max(np.max(np.abs(beta)) if p > 0 else 0.0, abs(b0))
            ok = (s_val - s_new) <= eps_inner * (abs(s_new) + 1.0) and maxd <= eps_param * scale
            s_val = s_new
            if ok:
                if full:
                    break
                full = True
            else:
                full = False

        na = 0
        for j in range(p):
            if beta[j] != 0.0:
                na += 1
        if na + (1 if fit_intercept else 0) >= n:
            # enough free parameters to interpolate: the criterion is unbounded below
            status = STATUS_SATURATED
            break

        sigma_new = sigma_step(r, sigma, alpha)
        if not math.isfinite(sigma_new) or sigma_new <= SIGMA_FLOOR:
            status = STATUS_DEGENERATE_SCALE
            break
        sigma = sigma_new
        q_new = rp_loss_from_residuals(r, sigma, alpha) + penalty_sum(beta, fam, lam, a)
        trace[ntrace] = q_new
        ntrace += 1

        dtheta = max(np.max(np.abs(beta - beta_old)) if p > 0 else 0.0,
                     abs(b0 - b0_old), abs(sigma - sigma_old))
        scale = 1.0 + max(np.max(np.abs(beta)) if p > 0 else 0.0, abs(b0), sigma)
        if abs(q_new - q) <= eps_outer * (abs(q) + 1.0) and dtheta <= eps_param * scale:
            status = STATUS_CONVERGED
            q = q_new
            break
        q = q_new
    return b0, sigma, ntrace, status, n_outer
