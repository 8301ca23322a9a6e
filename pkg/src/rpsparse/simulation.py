"""Simulation harness: correlated Gaussian designs, Y/X contamination, metrics.

Designs have rows drawn from N(0, Sigma) with ``Sigma_ij = 0.5**|i-j|``,
generated by the AR(1) recursion ``x_1 ~ N(0,1)``,
``x_j = 0.5 x_{j-1} + sqrt(0.75) e_j``. Contamination touches the training
sample only; the test sample of the same size is always clean.
"""
from __future__ import annotations

import csv
import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .data import FitResult, standardize
from .exceptions import PTooSmallError, RpSparseError
from .path import fit_path
from .penalties import Family
from .solver import SolverConfig

TRUE_SUPPORT = (0, 1, 3, 6, 10)   # zero-based positions of coefficients 1, 2, 4, 7, 11


class Signal(str, enum.Enum):
    StrongA = "StrongA"
    WeakB = "WeakB"


@dataclass(frozen=True)
class YOutliers:
    fraction: float = 0.1
    shift: float = 20.0


@dataclass(frozen=True)
class XOutliers:
    """Shift the first ``n_cols`` covariates of a random ``fraction`` of samples.

    With ``rows_mode=True`` the alternative reading is used: the first
    ``n_cols`` samples (rows) get every covariate shifted, and ``fraction``
    is ignored.
    """

    fraction: float = 0.1
    shift: float = 20.0
    n_cols: int = 10
    rows_mode: bool = False


Contamination = Union[None, YOutliers, XOutliers]


@dataclass(frozen=True)
class ScenarioSpec:
    n: int = 100
    p: int = 100
    sigma0: float = 0.5
    signal: Signal = Signal.StrongA
    contamination: Contamination = None
    replications: int = 100
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "signal", Signal(self.signal))
        if self.n < 3:
            raise ValueError("n must be >= 3")
        if self.p < 11:
            raise PTooSmallError(f"the signal settings need p >= 11, got {self.p}")
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        c = self.contamination
        if c is not None:
            if not 0 <= c.fraction < 1:
                raise ValueError("contamination fraction must lie in [0, 1)")
            if isinstance(c, XOutliers) and not 1 <= c.n_cols <= self.p:
                raise ValueError("n_cols must lie in [1, p]")
            if isinstance(c, XOutliers) and c.rows_mode and c.n_cols > self.n:
                raise ValueError("rows_mode needs n_cols <= n")

    def label(self) -> str:
        c = self.contamination
        if c is None:
            cont = "clean"
        elif isinstance(c, YOutliers):
            cont = f"y{c.fraction:g}"
        else:
            cont = f"x{c.fraction:g}" + ("rows" if c.rows_mode else "")
        return f"n{self.n}_p{self.p}_{self.signal.value}_{cont}"


@dataclass(frozen=True)
class Method:
    alpha: float
    family: Family = Family.SCAD

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))

    @property
    def name(self) -> str:
        return f"alpha={self.alpha:g}/{self.family.value}"


@dataclass(frozen=True)
class Replicate:
    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    beta0: np.ndarray
    contaminated: np.ndarray   # row indices of the train set that were altered


METRIC_NAMES = ("ms", "tp", "tn", "mses", "msen", "aprb", "ee", "rmse")


@dataclass(frozen=True)
class MetricsRow:
    ms: float
    tp: float
    tn: float
    mses: float
    msen: float
    aprb: float
    ee: float
    rmse: float

    def as_dict(self) -> dict:
        return asdict(self)


def true_beta(p: int, signal="StrongA") -> np.ndarray:
    """Five-sparse truth with support {1, 2, 4, 7, 11} (one-based)."""
    if p < 11:
        raise PTooSmallError(f"the signal settings need p >= 11, got {p}")
    signal = Signal(signal)
    beta = np.zeros(p)
    values = (1.0, 2.0, 4.0, 7.0, 11.0) if signal is Signal.StrongA else (1.5, 0.5, 1.0, 1.5, 1.0)
    beta[list(TRUE_SUPPORT)] = values
    return beta


def ar1_design(rng: np.random.Generator, n: int, p: int, rho: float = 0.5) -> np.ndarray:
    x = np.empty((n, p))
    x[:, 0] = rng.standard_normal(n)
    scale = math.sqrt(1.0 - rho * rho)
    eps = rng.standard_normal((n, p - 1))
    for j in range(1, p):
        x[:, j] = rho * x[:, j - 1] + scale * eps[:, j - 1]
    return x


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Independent stream per replicate, derived from (seed, replicate) only."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replicate,)))


def generate(spec: ScenarioSpec, replicate: int) -> Replicate:
    rng = replicate_rng(spec.seed, replicate)
    beta0 = true_beta(spec.p, spec.signal)
    x = ar1_design(rng, spec.n, spec.p)
    y = x @ beta0 + spec.sigma0 * rng.standard_normal(spec.n)
    x_test = ar1_design(rng, spec.n, spec.p)
    y_test = x_test @ beta0 + spec.sigma0 * rng.standard_normal(spec.n)
    c = spec.contamination
    rows = np.empty(0, dtype=int)
    if isinstance(c, YOutliers):
        rows = np.sort(rng.choice(spec.n, size=int(math.floor(c.fraction * spec.n)), replace=False))
        y[rows] += c.shift
    elif isinstance(c, XOutliers):
        if c.rows_mode:
            rows = np.arange(c.n_cols)
            x[rows, :] += c.shift
        else:
            rows = np.sort(rng.choice(spec.n, size=int(math.floor(c.fraction * spec.n)), replace=False))
            x[np.ix_(rows, np.arange(c.n_cols))] += c.shift
    return Replicate(x, y, x_test, y_test, beta0, rows)


def metrics(fit: FitResult, beta0, x_test, y_test, sigma0: float) -> MetricsRow:
    beta0 = np.asarray(beta0, dtype=float)
    beta = np.asarray(fit.beta, dtype=float)
    s_mask = beta0 != 0
    s = int(s_mask.sum())
    if s == 0:
        raise ValueError("the true support is empty")
    p = beta0.size
    sel = beta != 0
    resid = np.asarray(y_test, dtype=float) - np.asarray(x_test, dtype=float) @ beta - fit.intercept
    return MetricsRow(
        ms=float(sel.sum()),
        tp=float(np.sum(sel & s_mask)) / s,
        tn=float(np.sum(~sel & ~s_mask)) / (p - s) if p > s else 1.0,
        mses=float(np.sum((beta[s_mask] - beta0[s_mask]) ** 2)) / s,
        msen=float(np.sum(beta[~s_mask] ** 2)) / (p - s) if p > s else 0.0,
        aprb=float(np.sum(np.abs(resid))),
        ee=abs(fit.sigma - sigma0),
        rmse=float(math.sqrt(np.mean(resid * resid))),
    )


@dataclass
class ReplicateOutcome:
    method: str
    replicate: int
    metrics: Optional[MetricsRow]
    selected_lambda: float = float("nan")
    error: str = ""


@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    methods: list
    outcomes: list            # ReplicateOutcome, ordered by (method, replicate)
    summary: list = field(default_factory=list)   # one dict per method

    def failure_rate(self, method: str) -> float:
        rows = [o for o in self.outcomes if o.method == method]
        return sum(1 for o in rows if o.metrics is None) / len(rows)


def fit_replicate(rep: Replicate, method: Method, grid_size: int = 50, grid_ratio: float = 0.01,
                  config: Optional[SolverConfig] = None) -> FitResult:
    ds = standardize(rep.x_train, rep.y_train)
    path = fit_path(ds, method.alpha, method.family, config=config, k=grid_size, ratio=grid_ratio)
    return path.selected


def _one(spec, method, r, grid_size, grid_ratio, config):
    rep = generate(spec, r)
    try:
        res = fit_replicate(rep, method, grid_size, grid_ratio, config)
    except RpSparseError as exc:
        return ReplicateOutcome(method.name, r, None, error=repr(exc))
    return ReplicateOutcome(method.name, r, metrics(res, rep.beta0, rep.x_test, rep.y_test, spec.sigma0),
                            res.lambda_)


def run_scenario(spec: ScenarioSpec, methods: Sequence, threads: Optional[int] = None,
                 grid_size: int = 50, grid_ratio: float = 0.01,
                 config: Optional[SolverConfig] = None) -> ScenarioResult:
    """HBIC-selected fits for every (method, replicate), averaged per method.

    Replicates run on a thread pool (the compiled kernels release the GIL);
    results are collected by index, so the output does not depend on the
    completion order. A method whose failure rate exceeds 5% is flagged.
    """
    methods = [m if isinstance(m, Method) else Method(*m) for m in methods]
    jobs = [(m, r) for m in methods for r in range(spec.replications)]
    threads = threads or os.cpu_count() or 1
    if threads == 1:
        outcomes = [_one(spec, m, r, grid_size, grid_ratio, config) for m, r in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(lambda job: _one(spec, job[0], job[1], grid_size, grid_ratio, config),
                                     jobs))
    result = ScenarioResult(spec, methods, outcomes)
    for m in methods:
        rows = [o.metrics for o in outcomes if o.method == m.name and o.metrics is not None]
        failures = sum(1 for o in outcomes if o.method == m.name and o.metrics is None)
        entry = {"scenario": spec.label(), "method": m.name, "alpha": m.alpha, "family": m.family.value}
        for name in METRIC_NAMES:
            entry[name] = float(np.mean([getattr(row, name) for row in rows])) if rows else float("nan")
        entry["replications"] = spec.replications
        entry["failures"] = failures
        entry["flagged"] = failures > 0.05 * spec.replications
        result.summary.append(entry)
    return result


SUMMARY_COLUMNS = ("scenario", "method", "alpha", "family") + METRIC_NAMES + ("replications", "failures", "flagged")
REPLICATE_COLUMNS = ("scenario", "method", "replicate", "selected_lambda") + METRIC_NAMES + ("error",)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_summary_csv(results: Sequence[ScenarioResult], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for res in results:
            for entry in res.summary:
                w.writerow([_fmt(entry[c]) for c in SUMMARY_COLUMNS])


def write_replicates_csv(results: Sequence[ScenarioResult], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPLICATE_COLUMNS)
        for res in results:
            for o in res.outcomes:
                vals = [res.spec.label(), o.method, o.replicate, _fmt(o.selected_lambda)]
                if o.metrics is None:
                    vals += [""] * len(METRIC_NAMES)
                else:
                    vals += [_fmt(getattr(o.metrics, name)) for name in METRIC_NAMES]
                vals.append(o.error)
                w.writerow(vals)


def write_series_csv(rows: Sequence[tuple], header: Sequence[str], path) -> None:
    """Plot-ready series, e.g. (contamination_level, method, rmse) or (p, method, rmse)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_raw_csv(x, y, path, names: Optional[Sequence[str]] = None) -> None:
    """Response in the first column, predictors after it, with a header row."""
    x = np.asarray(x, dtype=float)
    names = list(names) if names is not None else [f"x{j + 1}" for j in range(x.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y"] + names)
        for yi, row in zip(y, x):
            w.writerow([repr(float(yi))] + [repr(float(v)) for v in row])
