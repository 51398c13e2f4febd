import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fogrnn.balance import SmoteSpec, n_synthetic, smote, smote_arrays
from fogrnn.features import FeatureMatrix


def _matrix(X, y):
    return FeatureMatrix(X, y, [f"ankle_x_{s}" for s in ("mean", "std", "var", "median", "range", "max", "min")][: X.shape[1]])


def test_balances_counts(rng):
    X = rng.normal(size=(60, 3))
    y = np.r_[np.ones(10), np.zeros(50)]
    out = smote(_matrix(X, y), SmoteSpec())
    assert np.sum(out.labels == 1) == 50
    assert np.sum(out.labels == 0) == 50


def test_segment_interpolation():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [5.0, 2.0], [6.0, 1.0], [7.0, 0.0], [8.0, 3.0]])
    y = np.array([1, 1, 0, 0, 0, 0])
    out = smote(_matrix(X, y), SmoteSpec(k_neighbors=1, seed=4))
    synth = out.values[6:]
    assert len(synth) == 2
    np.testing.assert_allclose(synth[:, 0], synth[:, 1])
    assert np.all((synth >= 0) & (synth <= 1))


def test_deterministic(rng):
    X = rng.normal(size=(40, 4))
    y = np.r_[np.ones(8), np.zeros(32)]
    a = smote(_matrix(X, y), SmoteSpec(seed=1))
    b = smote(_matrix(X, y), SmoteSpec(seed=1))
    np.testing.assert_array_equal(a.values, b.values)
    c = smote(_matrix(X, y), SmoteSpec(seed=2))
    assert not np.array_equal(a.values, c.values)


def test_originals_untouched_and_synthetic_meta(rng):
    X = rng.normal(size=(30, 3))
    y = np.r_[np.ones(6), np.zeros(24)]
    m = FeatureMatrix(X, y, ["ankle_x_mean", "ankle_x_std", "ankle_x_var"], patient_id=np.arange(30), stride=32)
    out = smote(m, SmoteSpec(k_neighbors=3))
    np.testing.assert_array_equal(out.values[:30], X)
    np.testing.assert_array_equal(out.patient_id[:30], np.arange(30))
    assert np.all(out.patient_id[30:] == -1)
    assert out.stride == 32


def test_single_class_error():
    with pytest.raises(ValueError, match="two classes"):
        smote(_matrix(np.zeros((5, 2)), np.ones(5)), SmoteSpec())


def test_too_few_minority():
    X = np.arange(20.0).reshape(10, 2)
    y = np.r_[np.ones(3), np.zeros(7)]
    with pytest.raises(ValueError, match="lower k_neighbors"):
        smote(_matrix(X, y), SmoteSpec(k_neighbors=5))


def test_spec_validation():
    with pytest.raises(ValueError):
        SmoteSpec(k_neighbors=0)
    with pytest.raises(ValueError):
        SmoteSpec(target_ratio=1.5)


@pytest.mark.parametrize("ratio, n_min, n_maj, expected", [(1.0, 10, 50, 40), (0.5, 10, 50, 15), (0.3, 1, 10, 2), (0.1, 10, 50, 0)])
def test_synthetic_count(ratio, n_min, n_maj, expected):
    assert n_synthetic(n_min, n_maj, ratio) == expected


@settings(max_examples=40, deadline=None)
@given(
    st.integers(6, 25),
    st.integers(26, 80),
    st.integers(1, 5),
    st.floats(0.3, 1.0),
    st.integers(0, 2**31 - 1),
)
def test_smote_properties(n_min, n_maj, k, ratio, seed):
    rng = np.random.default_rng(seed)
    X = np.r_[rng.normal(2, 1, size=(n_min, 3)), rng.normal(0, 3, size=(n_maj, 3))]
    y = np.r_[np.ones(n_min), np.zeros(n_maj)].astype(int)
    synth, minority = smote_arrays(X, y, SmoteSpec(k_neighbors=k, target_ratio=ratio, seed=seed))
    assert minority == 1
    assert len(synth) == max(0, math.ceil(round(ratio * n_maj, 9)) - n_min)
    lo, hi = X[:n_min].min(axis=0), X[:n_min].max(axis=0)
    assert np.all(synth >= lo) and np.all(synth <= hi)
