import math

import numpy as np
import pytest

from rpsparse import standardize
from rpsparse.data import Dataset
from rpsparse.exceptions import NonPositiveSigmaError
from rpsparse.loss import (
    jensen_majorizer,
    mm_weights,
    phi1,
    phi2,
    psi,
    psi_jacobian,
    rp_divergence,
    rp_loss,
    rp_loss_terms,
)


def raw_dataset(x, y):
    """Dataset holding the given arrays unchanged (no centering or scaling)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    p = x.shape[1]
    return Dataset(x, np.asarray(y, dtype=float), np.zeros(p), np.ones(p), 0.0, standardized=False)


def test_phi1_examples():
    assert phi1(0.0, 0.5) == 0.0
    assert phi1(1.0, 1.0) == pytest.approx(math.exp(-0.5), abs=1e-6)
    u = np.linspace(-10, 10, 200001)
    vals = phi1(u, 1.0)
    assert u[np.argmax(vals)] == pytest.approx(1.0, abs=1e-4)
    assert np.max(np.abs(phi1(u, 0.5))) <= 0.5**-0.5 * math.exp(-0.5) + 1e-15


def test_phi2_examples():
    assert phi2(0.0, 1.0) == -0.5
    for a in (0.1, 0.5, 2.0):
        assert abs(phi2(1 / math.sqrt(a + 1), a)) < 1e-15
    assert phi2(2.0, 0.5) == pytest.approx((4 - 2 / 3) * math.exp(-1), abs=1e-5)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 1.0, 3.0])
def test_phi_bounds(alpha):
    u = np.linspace(-50, 50, 100001)
    assert np.max(np.abs(phi1(u, alpha))) <= alpha**-0.5 * math.exp(-0.5) + 1e-14
    # sup |phi2| is at most max(1/(alpha+1), 2 exp(-1 - alpha/(2(alpha+1)))/alpha) by calculus
    bound = max(1 / (alpha + 1), 2 / alpha * math.exp(-1))
    assert np.max(np.abs(phi2(u, alpha))) <= bound + 1e-14


def test_rp_loss_examples():
    ds = raw_dataset(np.ones((3, 1)), np.ones(3))
    assert rp_loss([1.0], 2.0, ds, 1.0) == pytest.approx(-(2**-0.5), abs=1e-5)
    ds = raw_dataset(np.zeros((2, 1)), [1.0, -1.0])
    assert rp_loss([0.0], 1.0, ds, 0.0) == pytest.approx(math.log(math.sqrt(2 * math.pi)) + 0.5, abs=1e-5)
    with pytest.raises(NonPositiveSigmaError):
        rp_loss([0.0], 0.0, ds, 0.5)


def test_rp_loss_matches_direct_sum(rng):
    x = rng.standard_normal((20, 2))
    y = rng.standard_normal(20)
    ds = raw_dataset(x, y)
    beta = np.array([0.3, -0.2])
    for alpha in (0.0, 0.3, 1.0):
        total = 0.0
        for i in range(20):
            r = y[i] - x[i] @ beta
            if alpha == 0:
                total += math.log(0.7 * math.sqrt(2 * math.pi)) + r * r / (2 * 0.49)
            else:
                total -= 0.7 ** (-alpha / (alpha + 1)) * math.exp(-alpha * r * r / (2 * 0.49))
        assert rp_loss(beta, 0.7, ds, alpha) == pytest.approx(total / 20, abs=1e-12)


def test_small_alpha_argmin_continuity():
    """The alpha -> 0 loss and the likelihood share their minimizer location."""
    x = np.array([[-1.0], [0.0], [1.0], [2.0]])
    y = np.array([-0.8, 0.1, 1.1, 1.9])
    ds = raw_dataset(x, y)
    grid = np.linspace(0.8, 1.2, 4001)
    sig = 0.2
    l0 = [rp_loss([b], sig, ds, 0.0) for b in grid]
    l1 = [rp_loss([b], sig, ds, 1e-6) for b in grid]
    assert abs(grid[np.argmin(l0)] - grid[np.argmin(l1)]) < 1e-4


def test_mm_weights():
    ds = raw_dataset(np.zeros((4, 1)), [1.0, -3.0, 0.2, 5.0])
    np.testing.assert_allclose(mm_weights([0.0], 1.0, ds, 0.0), 0.25)
    ds = raw_dataset(np.zeros((2, 1)), [2.0, -2.0])
    np.testing.assert_allclose(mm_weights([0.0], 1.0, ds, 0.7), 0.5)
    ds = raw_dataset(np.zeros((2, 1)), [0.0, 10.0])
    w = mm_weights([0.0], 1.0, ds, 1.0)
    assert w[1] < 1e-21
    assert w[0] == pytest.approx(1.0)


def test_mm_weights_extreme_outliers_stay_finite():
    ds = raw_dataset(np.zeros((3, 1)), [1e3, 2e3, -1e3])
    w = mm_weights([0.0], 1.0, ds, 1.0)
    assert np.all(np.isfinite(w))
    assert w.sum() == pytest.approx(1.0)


def test_mm_weights_sum_and_permutation(rng):
    x = rng.standard_normal((25, 3))
    y = rng.standard_normal(25) * 3
    beta = rng.standard_normal(3)
    w = mm_weights(beta, 0.8, raw_dataset(x, y), 0.5)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    perm = rng.permutation(25)
    np.testing.assert_allclose(mm_weights(beta, 0.8, raw_dataset(x[perm], y[perm]), 0.5), w[perm], rtol=1e-14)


def test_psi_examples():
    a, s = 0.5, 1.3
    out = psi(np.array([1.0, 2.0]), 3.0, np.array([1.0, 1.0]), s, a)
    np.testing.assert_allclose(out[:2], 0, atol=1e-15)
    assert out[2] == pytest.approx(a * s ** (-(2 * a + 1) / (a + 1)) / (a + 1))
    x = np.array([0.5, -1.0])
    beta = np.array([0.2, 0.4])
    y = 1.7
    y_neg = 2 * x @ beta - y
    np.testing.assert_allclose(psi(x, y, beta, s, a)[:2], -psi(x, y_neg, beta, s, a)[:2])


def test_psi_finite_difference(rng):
    def loss(theta, x, y, a):
        return rp_loss_terms(np.array([y - x @ theta[:-1]]), theta[-1], a)[0]

    h = 1e-6
    for _ in range(100):
        p = 3
        a = rng.uniform(0.1, 2.0)
        x = rng.standard_normal(p)
        theta = np.append(rng.standard_normal(p), rng.uniform(0.5, 2.0))
        y = x @ theta[:-1] + rng.standard_normal()
        g = psi(x, y, theta[:-1], theta[-1], a)
        fd = np.array([(loss(theta + h * e, x, y, a) - loss(theta - h * e, x, y, a)) / (2 * h)
                       for e in np.eye(p + 1)])
        np.testing.assert_allclose(g, fd, atol=1e-6)


def test_psi_jacobian_finite_difference(rng):
    h = 1e-6
    for _ in range(20):
        a = rng.uniform(0.1, 2.0)
        x = rng.standard_normal(2)
        beta = rng.standard_normal(2)
        s = rng.uniform(0.5, 2.0)
        y = x @ beta + rng.standard_normal()
        jac = psi_jacobian(x, y, beta, s, a)
        theta = np.append(beta, s)
        fd = np.column_stack([
            (psi(x, y, (theta + h * e)[:2], (theta + h * e)[2], a)
             - psi(x, y, (theta - h * e)[:2], (theta - h * e)[2], a)) / (2 * h)
            for e in np.eye(3)
        ])
        np.testing.assert_allclose(jac, fd, atol=1e-6)


def test_jensen_majorization(rng):
    """h(theta | anchor) - h(anchor | anchor) >= R(theta) - R(anchor)."""
    for _ in range(200):
        a = rng.choice([0.1, 0.5, 1.0])
        n = 15
        x = rng.standard_normal((n, 2))
        y = x @ np.array([1.0, -1.0]) + rng.standard_normal(n)
        y[:2] += 10
        ds = raw_dataset(x, y)
        b, b0 = rng.standard_normal(2), rng.standard_normal(2)
        s, s0 = rng.uniform(0.3, 3), rng.uniform(0.3, 3)
        lhs = jensen_majorizer(b, s, b0, s0, ds, a) - jensen_majorizer(b0, s0, b0, s0, ds, a)
        rhs = rp_divergence(b, s, ds, a) - rp_divergence(b0, s0, ds, a)
        assert lhs >= rhs - 1e-9
        assert jensen_majorizer(b0, s0, b0, s0, ds, a) == pytest.approx(rp_divergence(b0, s0, ds, a), abs=1e-10)


def test_divergence_is_monotone_transform_of_loss(rng):
    ds = standardize(rng.standard_normal((20, 2)), rng.standard_normal(20))
    pts = [(rng.standard_normal(2), rng.uniform(0.3, 3)) for _ in range(50)]
    loss = [rp_loss(b, s, ds, 0.5) for b, s in pts]
    div = [rp_divergence(b, s, ds, 0.5) for b, s in pts]
    assert np.array_equal(np.argsort(loss), np.argsort(div))
