import math
import warnings

import numpy as np
import pytest

from conftest import random_dataset
from rpsparse import PenaltySpec, SolverConfig, fit, fit_path, hbic, lambda_grid, standardize
from rpsparse.exceptions import DomainError, EmptyDataError, RpSparseError
from rpsparse.path import hbic_value, lambda_max, null_fit, screen_rows
from rpsparse.simulation import ScenarioSpec, generate
from rpsparse.solver import kkt_residuals


def test_grid_endpoints_and_ratio():
    ds, _ = random_dataset(1, n=30, p=5)
    g = lambda_grid(ds, 0.3, 2, 0.01)
    lm = lambda_max(ds, 0.3, SolverConfig(alpha=0.3))
    assert g[0] == pytest.approx(lm, rel=1e-12)
    assert g[1] == pytest.approx(0.01 * lm, rel=1e-12)
    g = lambda_grid(ds, 0.3, 20, 0.05)
    r = g[1:] / g[:-1]
    assert np.max(np.abs(r - r[0])) < 1e-12


def test_grid_errors():
    ds, _ = random_dataset(1, n=30, p=5)
    with pytest.raises(ValueError):
        lambda_grid(ds, 0.3, 10, 1.5)
    with pytest.raises(ValueError):
        lambda_grid(ds, 0.3, 0, 0.1)
    from rpsparse.data import Dataset
    empty = Dataset(np.zeros((0, 2)), np.zeros(0), np.zeros(2), np.ones(2), 0.0)
    with pytest.raises(EmptyDataError):
        lambda_grid(empty, 0.3, 10, 0.1)


def test_lambda_max_orthonormal():
    x = np.array([[1, 1], [-1, 1], [1, -1], [-1, -1]], dtype=float)
    ds = standardize(x, x[:, 0])
    assert lambda_max(ds, 0.0, SolverConfig(alpha=0.0)) == pytest.approx(1.0, abs=1e-9)


def test_lambda_max_kills_everything():
    ds, _ = random_dataset(2, n=40, p=6)
    for alpha in (0.0, 0.5):
        null = null_fit(ds, alpha)
        lm = lambda_max(ds, alpha, SolverConfig(alpha=alpha), step="exact", null=null)
        res = fit(ds, PenaltySpec("L1", lm), SolverConfig(alpha=alpha, init=null))
        assert res.active_set == ()
        res = fit(ds, PenaltySpec("L1", lm * 0.9), SolverConfig(alpha=alpha, init=null))
    assert res.active_set != ()


def test_hbic_arithmetic():
    expected = math.log(0.25) + 5 * math.log(math.log(100)) * math.log(500) / 100
    assert hbic_value(0.5, 100, 500, 5) == pytest.approx(expected, abs=1e-12)
    assert hbic_value(0.5, 100, 500, 5) == pytest.approx(-0.91167, abs=1e-4)
    assert hbic_value(0.7, 50, 20, 0) == math.log(0.7 * 0.7)
    vals = [hbic_value(0.7, 50, 20, d) for d in range(10)]
    assert np.all(np.diff(vals) > 0)
    with pytest.raises(DomainError):
        hbic_value(0.5, 2, 10, 1)
    with pytest.raises(DomainError):
        hbic_value(0.5, 10, 1, 1)


def test_single_lambda_grid_selects_null():
    ds, _ = random_dataset(3, n=40, p=6)
    lm = lambda_max(ds, 0.3, SolverConfig(alpha=0.3), step="exact")
    pr = fit_path(ds, 0.3, "L1", grid=[lm], init="warm")
    assert pr.selected_index == 0
    assert pr.selected.active_set == ()


def test_grid_must_decrease():
    ds, _ = random_dataset(3, n=40, p=6)
    with pytest.raises(ValueError):
        fit_path(ds, 0.3, "SCAD", grid=[0.1, 0.2], init="warm")


def test_scad_can_leave_null_above_lambda_max():
    """Exact-curvature SCAD steps take the global coordinate minimizer, which may skip the null."""
    ds, _ = random_dataset(3, n=40, p=6)
    lm = lambda_max(ds, 0.3, SolverConfig(alpha=0.3), step="exact")
    pr = fit_path(ds, 0.3, "SCAD", grid=[lm], init="warm")
    null = null_fit(ds, 0.3)
    assert pr.selected.objective < null.objective


def test_ties_go_to_larger_lambda():
    ds, _ = random_dataset(4, n=40, p=6)
    lm = lambda_max(ds, 0.3, SolverConfig(alpha=0.3), step="exact")
    pr = fit_path(ds, 0.3, "L1", grid=[3 * lm, 2 * lm, lm], init="warm")
    assert np.ptp(pr.hbic) < 1e-12
    assert pr.selected_index == 0


def test_every_path_fit_is_stationary():
    ds, _ = random_dataset(5, n=60, p=10, outliers=4)
    pr = fit_path(ds, 0.3, "SCAD", k=15)
    checked = 0
    for f in pr.fits:
        if f is None or not f.converged:
            continue
        k = kkt_residuals(f, ds)
        assert max(k.values()) < 1e-4
        checked += 1
    assert checked >= 5


def test_warm_path_not_worse_than_cold():
    for seed in range(20):
        ds, _ = random_dataset(500 + seed, n=40, p=6, outliers=seed % 3)
        pr = fit_path(ds, 0.3, "SCAD", k=10, init="warm")
        for lam, f in zip(pr.lambdas, pr.fits):
            if f is None:
                continue
            try:
                cold = fit(ds, PenaltySpec("SCAD", lam), SolverConfig(alpha=0.3))
            except RpSparseError:
                continue
            assert f.objective <= cold.objective + 1e-9


def test_selection_invariant_to_row_permutation(rng):
    ds, _ = random_dataset(6, n=50, p=8, outliers=5)
    pr = fit_path(ds, 0.3, "SCAD", k=15)
    perm = rng.permutation(50)
    pr2 = fit_path(standardize(ds.raw_x()[perm], ds.raw_y()[perm]), 0.3, "SCAD", k=15)
    assert pr2.selected_index == pr.selected_index
    assert pr2.selected.active_set == pr.selected.active_set
    np.testing.assert_allclose(pr2.selected.beta, pr.selected.beta, atol=1e-6)


def test_failed_lambda_is_recorded_and_skipped():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((12, 20))
    y = x[:, 0] + 0.1 * rng.standard_normal(12)
    ds = standardize(x, y)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pr = fit_path(ds, 0.0, "L1", k=30, ratio=1e-4, init="warm")
    assert pr.errors
    assert all(math.isinf(pr.hbic[i]) for i in pr.errors)
    assert pr.selected_index not in pr.errors
    assert pr.selected is not None


def test_screen_rows_flags_leverage_points():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((100, 20))
    x[:5, :3] += 20
    keep = screen_rows(standardize(x, rng.standard_normal(100)))
    assert not np.any(keep[:5])
    assert keep[5:].mean() > 0.9


def test_strong_signal_support_recovery():
    hits = 0
    for r in range(10):
        rep = generate(ScenarioSpec(n=100, p=100, replications=10, seed=7), r)
        pr = fit_path(standardize(rep.x_train, rep.y_train), 0.1, "SCAD")
        hits += pr.selected.active_set == (0, 1, 3, 6, 10)
    assert hits >= 9


def test_table_rows():
    ds, _ = random_dataset(8, n=40, p=6)
    pr = fit_path(ds, 0.3, "SCAD", k=5)
    rows = pr.table()
    assert len(rows) == 5
    for row, f in zip(rows, pr.fits):
        assert set(row) == {"lambda_", "hbic", "df", "sigma", "objective", "converged"}
        if f is not None:
            assert row["hbic"] == pytest.approx(hbic_value(f.sigma, ds.n, ds.p, f.df))
            assert row["hbic"] == pytest.approx(hbic(f, ds.n, ds.p))
