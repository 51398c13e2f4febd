"""SMOTE oversampling of the minority class."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .features import FeatureMatrix


@dataclass(frozen=True)
class SmoteSpec:
    k_neighbors: int = 5
    target_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if not (0 < self.target_ratio <= 1):
            raise ValueError("target_ratio must be in (0, 1]")


def n_synthetic(n_minority, n_majority, target_ratio):
    # round() guards against 0.3 * 10 = 3.0000000000000004
    return max(0, math.ceil(round(target_ratio * n_majority, 9)) - n_minority)


def smote_arrays(X, y, spec):
    """Synthetic minority rows for ``(X, y)``.

    Returns ``(synthetic_rows, minority_label)``.  Neighbours are found on
    z-scored columns; interpolation happens in the original space.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) != 2:
        raise ValueError(f"SMOTE needs exactly two classes, got {len(classes)}")
    minority = classes[np.argmin(counts)]
    n_min, n_maj = counts.min(), counts.max()
    if n_min < spec.k_neighbors + 1:
        raise ValueError(
            f"only {n_min} minority rows for k_neighbors={spec.k_neighbors}; lower k_neighbors to at most {n_min - 1}"
        )
    need = n_synthetic(int(n_min), int(n_maj), spec.target_ratio)
    M = X[y == minority]
    if need == 0:
        return np.empty((0, X.shape[1])), minority
    sd = X.std(axis=0)
    Z = (M - X.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
    neighbours = kernels.knn(Z, spec.k_neighbors)

    rng = np.random.default_rng(spec.seed)
    base = rng.integers(0, len(M), size=need)
    pick = rng.integers(0, spec.k_neighbors, size=need)
    lam = rng.random(size=need)[:, None]
    a = M[base]
    b = M[neighbours[base, pick]]
    out = a + lam * (b - a)
    # keep the convex-combination guarantee exact under rounding
    np.clip(out, np.minimum(a, b), np.maximum(a, b), out=out)
    return out, minority


def smote(matrix, spec=SmoteSpec()):
    """Append synthetic minority rows to ``matrix`` until the class ratio is met.

    Original rows keep their order and metadata; synthetic rows have no
    patient or segment (metadata ``-1``).
    """
    synth, minority = smote_arrays(matrix.values, matrix.labels, spec)
    if len(synth) == 0:
        return matrix.take(np.arange(len(matrix)))
    extra = FeatureMatrix(synth, np.full(len(synth), minority), matrix.columns, stride=matrix.stride)
    return FeatureMatrix.concat([matrix, extra])
