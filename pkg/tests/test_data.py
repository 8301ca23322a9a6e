import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rpsparse import back_transform, standardize
from rpsparse.exceptions import ConstantColumnError, DimensionMismatchError, EmptyDataError


def test_three_point_column():
    ds = standardize(np.array([[1.0], [2.0], [3.0]]), np.zeros(3))
    assert ds.column_means[0] == pytest.approx(2.0)
    # population standard deviation of (1, 2, 3)
    assert ds.column_scales[0] == pytest.approx(np.sqrt(2 / 3))
    assert ds.y_mean == 0.0


def test_unit_mean_square_columns(rng):
    ds = standardize(rng.normal(3, 2, (50, 4)), rng.standard_normal(50))
    np.testing.assert_allclose(ds.x.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(np.mean(ds.x**2, axis=0), 1, atol=1e-12)


def test_idempotent(rng):
    ds = standardize(rng.normal(3, 2, (40, 3)), rng.standard_normal(40))
    ds2 = standardize(ds.x, ds.y)
    np.testing.assert_allclose(ds2.column_means, 0, atol=1e-10)
    np.testing.assert_allclose(ds2.column_scales, 1, atol=1e-10)
    np.testing.assert_allclose(ds2.x, ds.x, atol=1e-10)


def test_constant_column_named():
    x = np.column_stack([np.arange(5.0), np.full(5, 7.0)])
    with pytest.raises(ConstantColumnError) as exc:
        standardize(x, np.arange(5.0), column_names=["a", "b"])
    assert exc.value.column == 1
    assert exc.value.name == "b"


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        standardize(np.ones((4, 2)), np.ones(3))


def test_empty():
    with pytest.raises(EmptyDataError):
        standardize(np.ones((1, 2)), np.ones(1))


def test_back_transform_null(rng):
    ds = standardize(rng.standard_normal((10, 3)), rng.standard_normal(10) + 4)
    beta, b0 = back_transform(np.zeros(3), 0.0, ds)
    np.testing.assert_array_equal(beta, 0)
    assert b0 == pytest.approx(ds.y_mean)


def test_back_transform_identity_scales():
    x = np.array([[1.0, -1.0], [-1.0, 1.0], [1.0, 1.0], [-1.0, -1.0]])
    ds = standardize(x, np.zeros(4))
    beta, _ = back_transform(np.array([0.3, -2.0]), 0.0, ds)
    np.testing.assert_allclose(beta, [0.3, -2.0])


def test_back_transform_predictions(rng):
    x = rng.normal(5, 3, (5, 3))
    y = rng.standard_normal(5)
    ds = standardize(x, y)
    bs = rng.standard_normal(3)
    b0s = 0.7
    beta, b0 = back_transform(bs, b0s, ds)
    direct = ds.y_mean + b0s + ds.x @ bs
    assert np.max(np.abs(x @ beta + b0 - direct)) < 1e-10


@settings(max_examples=50, deadline=None)
@given(arrays(float, (8, 3), elements=st.floats(-100, 100)),
       arrays(float, 3, elements=st.floats(-10, 10)))
def test_roundtrip_property(x, bs):
    if np.any(x.std(axis=0) < 1e-3):
        return
    ds = standardize(x, np.zeros(8))
    beta, b0 = back_transform(bs, 0.0, ds)
    np.testing.assert_allclose(x @ beta + b0, ds.x @ bs, atol=1e-10 * (1 + np.abs(ds.x @ bs).max()) * 100)
