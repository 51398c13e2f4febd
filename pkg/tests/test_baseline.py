import numpy as np
import pytest

from fogrnn.features import FeatureMatrix
from fogrnn.model.baseline import (
    calibrate_from_matrix,
    fi_baseline_calibrate,
    fi_baseline_predict,
    fi_baseline_scores,
    predict_from_matrix,
)


def test_disjoint_classes_perfect_j(rng):
    fi = np.r_[rng.uniform(0, 1, 50), rng.uniform(3, 5, 20)]
    power = np.r_[rng.uniform(10, 20, 50), rng.uniform(10, 20, 20)]
    y = np.r_[np.zeros(50), np.ones(20)]
    th = fi_baseline_calibrate(fi, power, y)
    assert th.train_j == 1.0
    np.testing.assert_array_equal(fi_baseline_predict(th, fi, power), y)


def test_power_gate_blocks_quiet_windows(rng):
    # quiet standing windows: huge FI, tiny power, labelled no_freeze
    fi = np.r_[rng.uniform(0, 1, 40), rng.uniform(3, 5, 20), rng.uniform(3, 5, 20)]
    power = np.r_[rng.uniform(10, 20, 40), rng.uniform(10, 20, 20), rng.uniform(0, 0.1, 20)]
    y = np.r_[np.zeros(40), np.ones(20), np.zeros(20)]
    th = fi_baseline_calibrate(fi, power, y)
    # FI alone caps J at 1 - 20/60; the gate is what lifts it
    assert th.train_j > 0.9
    assert th.power_threshold > 0


def test_thresholds_from_grid(rng):
    fi, power = rng.random(100), rng.random(100)
    y = rng.integers(0, 2, 100)
    th = fi_baseline_calibrate(fi, power, y, n_grid=10)
    assert th.fi_threshold in np.quantile(fi, np.linspace(0, 1, 10))
    assert th.power_threshold == 0 or th.power_threshold in np.quantile(power, np.linspace(0, 1, 10))
    assert -1 <= th.train_j <= 1


def test_single_class_raises():
    with pytest.raises(ValueError, match="both classes"):
        fi_baseline_calibrate([1.0, 2.0], [1.0, 1.0], [0, 0])


def test_scores_zero_when_gated(rng):
    th = fi_baseline_calibrate([0.1, 5.0], [1.0, 1.0], [0, 1])
    s = fi_baseline_scores(th, [9.0, 9.0], [0.0, 2.0])
    assert s[0] == 0.0 and s[1] == 9.0


def test_matrix_helpers():
    m = FeatureMatrix(
        np.array([[0.5, 5.0], [4.0, 5.0], [0.2, 5.0], [6.0, 5.0]]), np.array([0, 1, 0, 1]),
        ["trunk_y_fi", "trunk_y_power"],
    )
    th = calibrate_from_matrix(m, "trunk_y")
    assert th.channel == "trunk_y"
    np.testing.assert_array_equal(predict_from_matrix(th, m), m.labels)
    with pytest.raises(KeyError):
        calibrate_from_matrix(m, "ankle_x")
