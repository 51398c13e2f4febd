"""Freeze-Index threshold detector.

A window is flagged as freeze when its FI exceeds ``fi_threshold`` and its
band power exceeds ``power_threshold``.  The power gate keeps quiet standing
(low power, arbitrary FI) from firing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FIThresholds:
    fi_threshold: float
    power_threshold: float
    train_j: float
    channel: str = "ankle_x"


def _grid(values, n_grid):
    q = np.quantile(values, np.linspace(0.0, 1.0, n_grid))
    return np.unique(q)


def fi_baseline_calibrate(fi, power, labels, n_grid=40, channel="ankle_x"):
    """Grid search over (FI, power) thresholds maximizing Youden's J on training data.

    The FI grid holds ``n_grid`` quantiles of the training FI values; the
    power grid holds 0 plus ``n_grid`` quantiles of training power.  Ties in
    J keep the first (lowest) FI and then power threshold.
    """
    fi = np.asarray(fi, dtype=np.float64)
    power = np.asarray(power, dtype=np.float64)
    y = np.asarray(labels) == 1
    if y.all() or not y.any():
        raise ValueError("FI baseline calibration needs both classes in the training data")
    fi_grid = _grid(fi, n_grid)
    power_grid = np.unique(np.concatenate(([0.0], _grid(power, n_grid))))
    n_pos, n_neg = y.sum(), (~y).sum()
    best = (-np.inf, 0.0, 0.0)
    for pt in power_grid:
        gate = power > pt
        # (n_fi, n) predictions for every FI threshold at once
        pred = (fi[None, :] > fi_grid[:, None]) & gate[None, :]
        tp = (pred & y).sum(axis=1)
        tn = (~pred & ~y).sum(axis=1)
        j = tp / n_pos + tn / n_neg - 1.0
        k = int(np.argmax(j))
        if j[k] > best[0]:
            best = (float(j[k]), float(fi_grid[k]), float(pt))
    return FIThresholds(fi_threshold=best[1], power_threshold=best[2], train_j=best[0], channel=channel)


def fi_baseline_predict(th, fi, power):
    return ((np.asarray(fi) > th.fi_threshold) & (np.asarray(power) > th.power_threshold)).astype(np.int64)


def fi_baseline_scores(th, fi, power):
    """Continuous score for ROC analysis: FI where the power gate is open, else 0."""
    fi = np.asarray(fi, dtype=np.float64)
    return np.where(np.asarray(power) > th.power_threshold, fi, 0.0)


def channel_columns(channel):
    return f"{channel}_fi", f"{channel}_power"


def calibrate_from_matrix(matrix, channel="ankle_x", n_grid=40):
    fi_col, pw_col = channel_columns(channel)
    sub = matrix.select([fi_col, pw_col])
    return fi_baseline_calibrate(sub.values[:, 0], sub.values[:, 1], matrix.labels, n_grid, channel)


def predict_from_matrix(th, matrix):
    sub = matrix.select(list(channel_columns(th.channel)))
    return fi_baseline_predict(th, sub.values[:, 0], sub.values[:, 1])


def scores_from_matrix(th, matrix):
    sub = matrix.select(list(channel_columns(th.channel)))
    return fi_baseline_scores(th, sub.values[:, 0], sub.values[:, 1])
