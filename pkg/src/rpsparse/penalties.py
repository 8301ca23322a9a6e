"""L1, SCAD and MCP penalties: values, derivatives and univariate minimizers."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .exceptions import NegativeArgumentError, NonPositiveArgumentError, ZeroComponentError

DEFAULT_A = {"SCAD": 3.7, "MCP": 3.0}


class Family(str, enum.Enum):
    L1 = "L1"
    SCAD = "SCAD"
    MCP = "MCP"

    @property
    def code(self) -> int:
        return {"L1": K.L1, "SCAD": K.SCAD, "MCP": K.MCP}[self.value]


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty family, level ``lam`` and shape ``a``.

    ``a`` defaults to 3.7 for SCAD and 3 for MCP and is ignored for L1.
    SCAD needs ``a > 2`` and MCP ``a > 1``.
    """

    family: Family
    lam: float
    a: float = float("nan")

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        if not self.lam >= 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")
        a = self.a
        if fam is Family.L1:
            a = 0.0
        elif np.isnan(a):
            a = DEFAULT_A[fam.value]
        if fam is Family.SCAD and not a > 2:
            raise ValueError(f"SCAD requires a > 2, got {a}")
        if fam is Family.MCP and not a > 1:
            raise ValueError(f"MCP requires a > 1, got {a}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "a", float(a))

    def with_lambda(self, lam: float) -> "PenaltySpec":
        return PenaltySpec(self.family, lam, self.a)

    @property
    def code(self) -> int:
        return self.family.code


def penalty_value(s, spec: PenaltySpec):
    """p_lambda(s) for s >= 0 (scalar or array)."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise NegativeArgumentError("penalty is defined on |beta|; got a negative argument")
    out = np.vectorize(lambda v: K.pen_value(v, spec.code, spec.lam, spec.a), otypes=[float])(s_arr)
    return out if out.ndim else float(out)


def penalty_deriv(s, spec: PenaltySpec):
    """p'_lambda(s) for s > 0 (scalar or array)."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0):
        raise NonPositiveArgumentError("penalty derivative needs s > 0")
    out = np.vectorize(lambda v: K.pen_deriv(v, spec.code, spec.lam, spec.a), otypes=[float])(s_arr)
    return out if out.ndim else float(out)


def penalty_second_deriv(s, spec: PenaltySpec):
    """Piecewise p''_lambda(s), taking the right limit at kink points."""
    s_arr = np.asarray(s, dtype=float)
    out = np.vectorize(lambda v: K.pen_second(v, spec.code, spec.lam, spec.a), otypes=[float])(s_arr)
    return out if out.ndim else float(out)


def soft_threshold(z, lam: float):
    if lam < 0:
        raise ValueError("threshold must be non-negative")
    z = np.asarray(z, dtype=float)
    out = np.sign(z) * np.maximum(np.abs(z) - lam, 0.0)
    return out if out.ndim else float(out)


def univariate_min(z: float, spec: PenaltySpec, scale: float = 1.0) -> float:
    """Minimize ``0.5*(z - b)**2 + scale * p_lambda(|b|)`` over b.

    With ``scale == 1`` this is the familiar closed form (soft thresholding for
    L1, the firm-threshold type rules for SCAD and MCP). Other scales arise
    from weighted column norms inside coordinate descent; when the scaled
    problem loses convexity the global minimizer is found among the finitely
    many stationary and boundary candidates.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    return float(K.uni_min(float(z), spec.code, spec.lam, spec.a, float(scale)))


def local_concavity(b, spec: PenaltySpec) -> float:
    """Local concavity max_j(-p''(|b_j|)), with kinks counted as in the neighbourhood sup.

    SCAD gives 1/(a-1) once some |b_j| lies in [lam, a*lam]; MCP gives 1/a
    once some |b_j| <= a*lam; L1 is always 0.
    """
    b = np.abs(np.asarray(b, dtype=float).ravel())
    if np.any(b == 0):
        raise ZeroComponentError("local concavity is defined at vectors with nonzero entries")
    lam, a = spec.lam, spec.a
    if spec.family is Family.SCAD:
        return 1.0 / (a - 1.0) if np.any((b >= lam) & (b <= a * lam)) else 0.0
    if spec.family is Family.MCP:
        return 1.0 / a if np.any(b <= a * lam) else 0.0
    return 0.0


def max_concavity(spec: PenaltySpec) -> float:
    if spec.family is Family.SCAD:
        return 1.0 / (spec.a - 1.0)
    if spec.family is Family.MCP:
        return 1.0 / spec.a
    return 0.0
