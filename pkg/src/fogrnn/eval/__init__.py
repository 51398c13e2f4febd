from .metrics import ConfusionCounts, RocCurve, confusion, roc_auc, roc_curve, sens_spec, trapezoid_auc
from .split import SkippedPatient, SplitPlan, dependent_splits, split, split_patient

__all__ = [
    "ConfusionCounts",
    "RocCurve",
    "SkippedPatient",
    "SplitPlan",
    "confusion",
    "dependent_splits",
    "roc_auc",
    "roc_curve",
    "sens_spec",
    "split",
    "split_patient",
    "trapezoid_auc",
]
