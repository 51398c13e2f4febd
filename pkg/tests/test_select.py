import numpy as np
import pytest

from fogrnn.features import FeatureMatrix, catalog
from fogrnn.select import fit_logistic, rfe_select


def _matrix(X, y, names=None):
    names = names or [d.name for d in catalog("both", "all")][: X.shape[1]]
    return FeatureMatrix(X, y, names)


def _informative(rng, n=400, d=10):
    X = rng.normal(size=(n, d))
    y = (X[:, 0] > 0).astype(int)
    return X, y


@pytest.mark.parametrize("k", [1, 3, 9])
def test_informative_column_survives(rng, k):
    X, y = _informative(rng)
    res = rfe_select(_matrix(X, y), k)
    first = _matrix(X, y).names[0]
    assert first in res.selected
    assert res.matrix.values.shape == (400, k)
    assert res.ranking[first] == 1


def test_remove_exactly_one(rng):
    X, y = _informative(rng)
    res = rfe_select(_matrix(X, y), 9)
    assert len(res.elimination_order) == 1
    assert sorted(res.ranking.values()) == [1] * 9 + [2]


def test_constant_columns_go_first(rng):
    X, y = _informative(rng)
    X[:, 4] = 3.0
    X[:, 7] = -1.0
    res = rfe_select(_matrix(X, y), 5)
    names = _matrix(X, y).names
    assert res.elimination_order[:2] == [names[4], names[7]]


def test_rfe_25_of_145(rng):
    X = rng.normal(size=(300, 145))
    y = (X[:, 10] + 0.5 * X[:, 50] > 0).astype(int)
    res = rfe_select(_matrix(X, y), 25, n_iter=100)
    assert len(res.selected) == 25
    assert len(res.elimination_order) == 120
    names = _matrix(X, y).names
    assert names[10] in res.selected and names[50] in res.selected
    assert res.matrix.names == res.selected


def test_rfe_deterministic(rng):
    X, y = _informative(rng, n=900)
    a = rfe_select(_matrix(X, y), 4, max_rows=500, seed=3)
    b = rfe_select(_matrix(X, y), 4, max_rows=500, seed=3)
    assert a.elimination_order == b.elimination_order


def test_rfe_bad_k(rng):
    X, y = _informative(rng)
    with pytest.raises(ValueError):
        rfe_select(_matrix(X, y), 10)
    with pytest.raises(ValueError):
        rfe_select(_matrix(X, y), 0)


def test_logistic_decreases_loss(rng):
    X, y = _informative(rng)

    def nll(w, b):
        z = X @ w + b
        return np.mean(np.logaddexp(0, z) - y * z)

    w0 = np.zeros(X.shape[1])
    w, b = fit_logistic(X, y, n_iter=200)
    assert nll(w, b) < nll(w0, 0.0) - 0.3
    assert np.argmax(np.abs(w)) == 0
