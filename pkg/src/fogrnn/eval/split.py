"""Subject-independent and subject-dependent train/test splits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features import FeatureMatrix

MODES = ("subject_independent", "subject_dependent")


@dataclass(frozen=True)
class SplitPlan:
    mode: str = "subject_independent"
    train_patients: tuple = (5, 6, 7, 8, 9)
    test_patients: tuple = (1, 2, 3)
    train_fraction: float = 0.7
    chronological: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not (0 < self.train_fraction < 1):
            raise ValueError("train_fraction must be in (0, 1)")
        if self.mode == "subject_independent" and set(self.train_patients) & set(self.test_patients):
            raise ValueError("train and test patients overlap")


class SkippedPatient(Exception):
    def __init__(self, patient_id, reason):
        self.patient_id = patient_id
        self.reason = reason
        super().__init__(f"patient {patient_id}: {reason}")


def _time_order(matrix, rows):
    """``rows`` sorted by recording, segment, start index."""
    keys = np.lexsort((matrix.start_index[rows], matrix.segment[rows], matrix.recording[rows].astype(str)))
    return rows[keys]


def split_patient(matrix, patient_id, plan):
    """Stratified per-class split of one patient's rows.

    With ``plan.chronological`` each class contributes its first
    ``round(train_fraction * n)`` windows in time to training; otherwise a
    seeded random subset of that size.
    """
    rows = np.flatnonzero(matrix.patient_id == patient_id)
    labels = matrix.labels[rows]
    n_freeze = int(np.sum(labels == 1))
    if n_freeze == 0:
        raise SkippedPatient(patient_id, "no freeze windows")
    if n_freeze == len(rows):
        raise SkippedPatient(patient_id, "no non-freeze windows")
    rng = np.random.default_rng([plan.seed, int(patient_id)])
    train, test = [], []
    for cls in (0, 1):
        r = rows[labels == cls]
        r = _time_order(matrix, r) if plan.chronological else rng.permutation(r)
        k = int(round(plan.train_fraction * len(r)))
        train.append(r[:k])
        test.append(r[k:])
    train = np.sort(np.concatenate(train))
    test = np.sort(np.concatenate(test))
    return matrix.take(train), matrix.take(test)


def dependent_splits(matrix, plan):
    """``([(patient_id, train, test), ...], [(patient_id, reason), ...])``."""
    done, skipped = [], []
    for pid in matrix.patients():
        try:
            tr, te = split_patient(matrix, pid, plan)
        except SkippedPatient as e:
            skipped.append((e.patient_id, e.reason))
            continue
        done.append((pid, tr, te))
    return done, skipped


def split(matrix, plan):
    """``(train, test)`` matrices for ``plan``.

    Subject-dependent mode returns the union of the per-patient splits;
    patients without both classes are left out of both parts.
    """
    if plan.mode == "subject_independent":
        present = set(matrix.patients())
        missing = (set(plan.train_patients) | set(plan.test_patients)) - present
        if missing:
            raise ValueError(f"patients {sorted(missing)} not present in data")
        tr = np.flatnonzero(np.isin(matrix.patient_id, plan.train_patients))
        te = np.flatnonzero(np.isin(matrix.patient_id, plan.test_patients))
        return matrix.take(tr), matrix.take(te)
    done, _ = dependent_splits(matrix, plan)
    if not done:
        raise ValueError("no patient has both classes")
    return (
        FeatureMatrix.concat([d[1] for d in done]),
        FeatureMatrix.concat([d[2] for d in done]),
    )
