"""Recursive feature elimination with an L2-regularized logistic scorer."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class RFEResult:
    matrix: object  # FeatureMatrix restricted to the survivors
    selected: list
    ranking: dict  # name -> rank; 1 = selected, higher = dropped earlier
    elimination_order: list


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def fit_logistic(X, y, l2=1e-2, n_iter=300, w0=None, b0=0.0):
    """Full-batch gradient descent on mean log-loss + ``l2/2 * |w|^2``.

    Step size is ``1/L`` with ``L`` the Lipschitz constant of the gradient,
    so the iteration is monotone.  Returns ``(w, b)``.
    """
    n, d = X.shape
    w = np.zeros(d) if w0 is None else np.array(w0, dtype=np.float64)
    b = float(b0)
    smax = np.linalg.norm(X, 2) if d else 0.0
    # intercept adds a column of ones to the design
    lip = (smax**2 + n) / (4.0 * n) + l2
    step = 1.0 / lip
    for _ in range(n_iter):
        r = _sigmoid(X @ w + b) - y
        w -= step * (X.T @ r / n + l2 * w)
        b -= step * r.mean()
    return w, b


def rfe_select(matrix, k, l2=1e-2, n_iter=300, max_rows=5000, seed=0):
    """Drop the feature with the smallest absolute weight until ``k`` remain.

    Columns are z-scored first.  Constant columns carry no information and
    are dropped before any fitting.  Above ``max_rows`` rows, a fixed random
    subsample (from ``seed``) is used for the fits.
    """
    n_cols = matrix.values.shape[1]
    if not (1 <= k < n_cols):
        raise ValueError(f"need 1 <= k < {n_cols}, got k={k}")
    names = matrix.names
    X = matrix.values
    y = (matrix.labels == 1).astype(np.float64)
    if len(np.unique(y)) < 2:
        raise ValueError("RFE needs both classes present")
    if X.shape[0] > max_rows:
        rows = np.sort(np.random.default_rng(seed).choice(X.shape[0], max_rows, replace=False))
        X, y = X[rows], y[rows]
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    constant = sd == 0
    Z = (X - mu) / np.where(constant, 1.0, sd)

    remaining = list(range(n_cols))
    order = []
    for j in np.flatnonzero(constant):
        if len(remaining) == k:
            break
        remaining.remove(int(j))
        order.append(int(j))

    w, b = None, 0.0
    while len(remaining) > k:
        w, b = fit_logistic(Z[:, remaining], y, l2=l2, n_iter=n_iter, w0=w, b0=b)
        drop = int(np.argmin(np.abs(w)))
        order.append(remaining.pop(drop))
        w = np.delete(w, drop)

    ranking = {names[j]: 1 for j in remaining}
    for rank, j in enumerate(reversed(order), start=2):
        ranking[names[j]] = rank
    selected = [names[j] for j in remaining]
    return RFEResult(matrix.select(selected), selected, ranking, [names[j] for j in order])
