"""Influence functions of the penalized RP functional at the Gaussian model.

At a contamination point ``(y_t, x_t)`` with standardized residual
``u = (y_t - x_t'beta) / sigma`` the influence function is

    IF = -J*^{-1} (psi(u, x_t) + (p'(|beta_j|) sign(beta_j), 0))

where ``psi`` is the per-observation score in ``(beta, sigma)`` and
``J* = J + diag(p''(|beta_j|), 0)``. ``J`` is the expected Jacobian of the
score under the model, which has the closed form returned by
:func:`j_alpha`. Coordinates where ``beta`` is zero have an identically
zero influence function; the formula is then applied to the block of
nonzero coordinates and sigma.

For ``alpha = 0`` the Gaussian likelihood score ``-(u x, u^2 - 1) / sigma``
and the Fisher information ``blockdiag(E[XX'], 2) / sigma^2`` are used. This
is the alpha -> 0 limit after dividing both by alpha.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .exceptions import AlphaZeroError, NonPositiveSigmaError, SingularJError
from .loss import phi1, phi2
from .penalties import Family, PenaltySpec

COND_LIMIT = 1e12


@dataclass(frozen=True)
class IfSetting:
    """Point ``(beta_star, sigma_star)`` and design second moment ``exx = E[XX']``."""

    beta_star: np.ndarray
    sigma_star: float
    alpha: float
    exx: np.ndarray
    spec: PenaltySpec = PenaltySpec(Family.L1, 0.0)

    def __post_init__(self):
        beta = np.atleast_1d(np.asarray(self.beta_star, dtype=float))
        exx = np.atleast_2d(np.asarray(self.exx, dtype=float))
        p = beta.size
        if exx.shape != (p, p):
            raise ValueError(f"exx must be {p}x{p}, got {exx.shape}")
        if not np.allclose(exx, exx.T, rtol=0, atol=1e-12):
            raise ValueError("exx must be symmetric")
        if np.linalg.eigvalsh(exx).min() <= 0:
            raise ValueError("exx must be positive definite")
        if not self.sigma_star > 0:
            raise NonPositiveSigmaError(f"sigma_star must be positive, got {self.sigma_star}")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        object.__setattr__(self, "beta_star", beta)
        object.__setattr__(self, "exx", exx)

    @property
    def p(self) -> int:
        return self.beta_star.size


def _exponent(alpha: float) -> float:
    return (2 * alpha + 1) / (alpha + 1)


def j_alpha(setting: IfSetting) -> np.ndarray:
    """Closed-form expected score Jacobian at the model, for alpha > 0.

    ``alpha sigma^(-(2alpha+1)/(alpha+1) - 1) *
    blockdiag(E[XX'] / (alpha+1)^(3/2), 2 / (alpha+1)^(5/2))``
    """
    a = setting.alpha
    if a == 0:
        raise AlphaZeroError("the closed-form J holds for alpha > 0; use information_matrix for alpha = 0")
    p = setting.p
    c = a * setting.sigma_star ** (-_exponent(a) - 1.0)
    j = np.zeros((p + 1, p + 1))
    j[:p, :p] = c / (a + 1.0) ** 1.5 * setting.exx
    j[p, p] = 2.0 * c / (a + 1.0) ** 2.5
    return j


def information_matrix(setting: IfSetting) -> np.ndarray:
    """:func:`j_alpha` for alpha > 0, the Gaussian Fisher information for alpha = 0."""
    if setting.alpha > 0:
        return j_alpha(setting)
    p = setting.p
    j = np.zeros((p + 1, p + 1))
    j[:p, :p] = setting.exx / setting.sigma_star**2
    j[p, p] = 2.0 / setting.sigma_star**2
    return j


def score(setting: IfSetting, u, x_t) -> np.ndarray:
    """Score at residuals ``u`` (vector) and covariate ``x_t``: shape (len(u), p+1)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    x_t = np.asarray(x_t, dtype=float)
    a, s = setting.alpha, setting.sigma_star
    if a == 0:
        f1, f2, c = u, u * u - 1.0, -1.0 / s
    else:
        f1, f2, c = phi1(u, a), phi2(u, a), -a * s ** (-_exponent(a))
    return c * np.column_stack([f1[:, None] * x_t[None, :], f2])


def _smoothed_derivs(b, spec, m):
    """First and second derivatives of p(sqrt(b^2 + 1/m)) in b."""
    t = np.sqrt(b * b + 1.0 / m)
    d1 = np.array([K.pen_deriv(v, spec.code, spec.lam, spec.a) for v in t])
    d2 = np.array([K.pen_second(v, spec.code, spec.lam, spec.a) for v in t])
    return d1 * b / t, d2 * (b / t) ** 2 + d1 / (m * t**3)


def if_curve(setting: IfSetting, u_grid, x_t, smoothing: Optional[float] = None) -> np.ndarray:
    """Influence function along a residual grid: shape (len(u_grid), p+1).

    Columns are ``beta_1..beta_p`` then ``sigma``. Without ``smoothing``,
    zero entries of ``beta_star`` get an identically zero column and the
    formula is applied to the remaining block. With ``smoothing=m`` the
    penalty is replaced by ``p(sqrt(s^2 + 1/m))`` and every coordinate is
    kept; as m grows this converges to the unsmoothed result.

    Raises
    ------
    SingularJError
        If the penalized Jacobian is singular or its condition number
        exceeds 1e12.
    """
    u = np.atleast_1d(np.asarray(u_grid, dtype=float))
    x_t = np.asarray(x_t, dtype=float)
    p = setting.p
    if x_t.shape != (p,):
        raise ValueError(f"x_t must have length {p}")
    beta = setting.beta_star
    spec = setting.spec
    if smoothing is None:
        head = np.flatnonzero(beta != 0)
        b = np.abs(beta[head])
        d1 = np.array([K.pen_deriv(v, spec.code, spec.lam, spec.a) for v in b]) * np.sign(beta[head])
        d2 = np.array([K.pen_second(v, spec.code, spec.lam, spec.a) for v in b])
    else:
        head = np.arange(p)
        d1, d2 = _smoothed_derivs(beta, spec, float(smoothing))
    keep = np.append(head, p)
    j = information_matrix(setting)[np.ix_(keep, keep)]
    j[np.arange(head.size), np.arange(head.size)] += d2
    cond = np.linalg.cond(j)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularJError(f"penalized Jacobian is not invertible at this point (condition number {cond:.3g})", cond)
    rhs = score(setting, u, x_t)[:, keep]
    rhs[:, : head.size] += d1
    out = np.zeros((u.size, p + 1))
    out[:, keep] = -np.linalg.solve(j, rhs.T).T
    return out


def component_names(p: int) -> list:
    return [f"beta{j + 1}" for j in range(p)] + ["sigma"]


def _sup_norm(setting, x_t, u_max, n_grid):
    u = np.linspace(-u_max, u_max, n_grid)
    norms = np.linalg.norm(if_curve(setting, u, x_t), axis=1)
    k = int(np.argmax(norms))
    return float(norms[k]), float(u[k])


def boundedness_report(alpha_list: Sequence[float], setting: IfSetting, x_t, u_max: float = 50.0,
                       doublings: int = 3, n_grid: int = 4001) -> list:
    """Supremum of ||IF|| over ``[-u_max, u_max]`` per alpha, with a growth test.

    For each alpha the supremum is also taken over ``[-2^k u_max, 2^k u_max]``,
    k = 1..doublings. An alpha is flagged unbounded when every successive
    ratio of suprema exceeds 1.9.
    """
    rows = []
    for a in alpha_list:
        st = IfSetting(setting.beta_star, setting.sigma_star, float(a), setting.exx, setting.spec)
        sup, arg = _sup_norm(st, x_t, u_max, n_grid)
        sups = [sup] + [_sup_norm(st, x_t, u_max * 2**k, n_grid)[0] for k in range(1, doublings + 1)]
        ratios = [sups[k + 1] / sups[k] for k in range(doublings)]
        rows.append({
            "alpha": float(a),
            "sup_norm": sup,
            "argmax_u": arg,
            "growth_ratios": ratios,
            "unbounded": all(r > 1.9 for r in ratios),
        })
    return rows


def if_table(alpha_list: Sequence[float], setting: IfSetting, u_grid, x_t) -> list:
    """Long-format rows ``(alpha, u, component, value)`` for plotting."""
    names = component_names(setting.p)
    rows = []
    for a in alpha_list:
        st = IfSetting(setting.beta_star, setting.sigma_star, float(a), setting.exx, setting.spec)
        vals = if_curve(st, u_grid, x_t)
        for i, u in enumerate(np.atleast_1d(u_grid)):
            for k, name in enumerate(names):
                rows.append((float(a), float(u), name, float(vals[i, k])))
    return rows


def write_if_csv(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "u", "component", "value"])
        for a, u, name, v in rows:
            w.writerow([repr(a), repr(u), name, repr(v)])
