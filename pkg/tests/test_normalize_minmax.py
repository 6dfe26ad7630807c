import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal
from pytest import approx, raises

from models.errors import DimensionMismatchError
from models.models import FeatureRange
from normalizers.normalize_minmax import fit_min_max, normalize_min_max
from oracles import make_dataset


def test_linear_map_constant_and_identity_columns():
    ds = make_dataset([[2, 5, 0], [4, 5, 1], [6, 5, 1]], normalized=False)
    out = normalize_min_max(ds)
    assert_allclose(out.objects[:, 0], [0.0, 0.5, 1.0])
    assert_array_equal(out.objects[:, 1], [0.0, 0.0, 0.0])
    assert_array_equal(out.objects[:, 2], [0.0, 1.0, 1.0])
    assert out.normalized


def test_labels_survive(iris_raw):
    out = normalize_min_max(iris_raw)
    assert_array_equal(out.labels, iris_raw.labels)
    assert out.objects.min() == 0.0
    assert out.objects.max() == approx(1.0)


def test_external_range_clips():
    train = make_dataset([[0.0], [10.0]], normalized=False)
    test = make_dataset([[-5.0], [5.0], [20.0]], normalized=False)
    out = normalize_min_max(test, fit_min_max(train))
    assert_allclose(out.objects[:, 0], [0.0, 0.5, 1.0])


def test_range_shape_mismatch():
    ds = make_dataset([[1.0, 2.0]], normalized=False)
    rng = FeatureRange(minimum=np.zeros(3), maximum=np.ones(3))
    with raises(DimensionMismatchError):
        normalize_min_max(ds, rng)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=2, max_size=20))
def test_order_preserving_and_bounded(values):
    out = normalize_min_max(make_dataset(values, normalized=False)).objects[:, 0]
    assert out.min() >= 0.0 and out.max() <= 1.0
    x = np.asarray(values)
    for i in range(len(values)):
        for j in range(len(values)):
            if x[i] <= x[j]:
                assert out[i] <= out[j]
