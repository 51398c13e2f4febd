from .baseline import (
    FIThresholds,
    calibrate_from_matrix,
    fi_baseline_calibrate,
    fi_baseline_predict,
    fi_baseline_scores,
)
from .lstm import (
    LstmHyper,
    LstmLayerParams,
    LstmModel,
    TrainingError,
    backward,
    forward,
    init_model,
    load_checkpoint,
    loss,
    predict,
    save_checkpoint,
    sequence_index,
    train,
    zero_model,
)

__all__ = [
    "FIThresholds",
    "LstmHyper",
    "LstmLayerParams",
    "LstmModel",
    "TrainingError",
    "backward",
    "calibrate_from_matrix",
    "fi_baseline_calibrate",
    "fi_baseline_predict",
    "fi_baseline_scores",
    "forward",
    "init_model",
    "load_checkpoint",
    "loss",
    "predict",
    "save_checkpoint",
    "sequence_index",
    "train",
    "zero_model",
]
