"""Two-layer stacked LSTM with a sigmoid head, trained by BPTT + Adam."""

from __future__ import annotations

import io
import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import kernels
from .._io import atomic_write_bytes

log = logging.getLogger(__name__)

EPS = 1e-12
PARAM_NAMES = ("l1.W", "l1.U", "l1.b", "l2.W", "l2.U", "l2.b", "head.w", "head.b")
CHECKPOINT_VERSION = 1


class TrainingError(FloatingPointError):
    pass


@dataclass
class LstmHyper:
    hidden1: int = 64
    hidden2: int = 32
    seq_len: int = 8
    batch_size: int = 64
    learning_rate: float = 1e-3
    epochs: int = 100
    patience: int = 10
    min_delta: float = 1e-4
    grad_clip: float = 5.0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0


@dataclass
class LstmLayerParams:
    """Gate blocks are stacked as rows in the order input, forget, output, candidate."""

    W: np.ndarray  # (4H, in)
    U: np.ndarray  # (4H, H)
    b: np.ndarray  # (4H,)

    @property
    def hidden(self):
        return self.U.shape[1]

    @property
    def n_in(self):
        return self.W.shape[1]

    def gate(self, name):
        k = ("input", "forget", "output", "candidate").index(name)
        H = self.hidden
        return self.W[k * H : (k + 1) * H], self.U[k * H : (k + 1) * H], self.b[k * H : (k + 1) * H]


@dataclass(eq=False)
class LstmModel:
    params: dict
    hyper: LstmHyper = field(default_factory=LstmHyper)
    feature_names: tuple = ()
    scaler_mean: np.ndarray | None = None
    scaler_std: np.ndarray | None = None

    @property
    def layer1(self):
        return LstmLayerParams(self.params["l1.W"], self.params["l1.U"], self.params["l1.b"])

    @property
    def layer2(self):
        return LstmLayerParams(self.params["l2.W"], self.params["l2.U"], self.params["l2.b"])

    @property
    def n_features(self):
        return self.params["l1.W"].shape[1]

    def copy(self):
        return LstmModel(
            {k: v.copy() for k, v in self.params.items()},
            LstmHyper(**asdict(self.hyper)),
            tuple(self.feature_names),
            None if self.scaler_mean is None else self.scaler_mean.copy(),
            None if self.scaler_std is None else self.scaler_std.copy(),
        )


def init_model(n_features, hyper=LstmHyper(), rng=None, feature_names=()):
    """Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases except forget = 1."""
    rng = np.random.default_rng(hyper.seed) if rng is None else rng
    H1, H2 = hyper.hidden1, hyper.hidden2

    def u(shape, fan_in):
        s = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-s, s, size=shape)

    def bias(H):
        b = np.zeros(4 * H)
        b[H : 2 * H] = 1.0
        return b

    params = {
        "l1.W": u((4 * H1, n_features), n_features),
        "l1.U": u((4 * H1, H1), H1),
        "l1.b": bias(H1),
        "l2.W": u((4 * H2, H1), H1),
        "l2.U": u((4 * H2, H2), H2),
        "l2.b": bias(H2),
        "head.w": u((H2,), H2),
        "head.b": np.zeros(1),
    }
    return LstmModel(params, hyper, tuple(feature_names))


def zero_model(n_features, hyper=LstmHyper()):
    m = init_model(n_features, hyper)
    for v in m.params.values():
        v[...] = 0.0
    return m


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _check_batch(model, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 3:
        raise ValueError(f"batch must be (B, T, F), got shape {X.shape}")
    if X.shape[2] != model.n_features:
        raise ValueError(f"batch has {X.shape[2]} features, model expects {model.n_features}")
    if X.shape[1] < 1:
        raise ValueError("sequence length must be >= 1")
    return np.ascontiguousarray(X)


def forward(model, X, return_cache=False):
    """Freeze probabilities for a ``(B, T, F)`` batch, read off the last step."""
    X = _check_batch(model, X)
    p = model.params
    h1, c1, g1 = kernels.lstm_forward(X, p["l1.W"], p["l1.U"], p["l1.b"])
    h2, c2, g2 = kernels.lstm_forward(h1, p["l2.W"], p["l2.U"], p["l2.b"])
    logits = h2[:, -1, :] @ p["head.w"] + p["head.b"][0]
    prob = _sigmoid(logits)
    if return_cache:
        return prob, (X, h1, c1, g1, h2, c2, g2)
    return prob


def loss(prob, labels, eps=EPS):
    """Mean binary cross-entropy with probabilities clamped to [eps, 1 - eps]."""
    prob = np.clip(np.asarray(prob, dtype=np.float64), eps, 1.0 - eps)
    y = np.asarray(labels, dtype=np.float64)
    return float(-np.mean(y * np.log(prob) + (1.0 - y) * np.log1p(-prob)))


def backward(model, X, labels, cache=None):
    """Gradients of :func:`loss` w.r.t. every parameter (same keys and shapes)."""
    if cache is None:
        prob, cache = forward(model, X, return_cache=True)
    else:
        prob = _sigmoid(cache[4][:, -1, :] @ model.params["head.w"] + model.params["head.b"][0])
    X, h1, c1, g1, h2, c2, g2 = cache
    p = model.params
    B, T, _ = X.shape
    dlogit = (prob - np.asarray(labels, dtype=np.float64)) / B
    grads = {
        "head.w": h2[:, -1, :].T @ dlogit,
        "head.b": np.array([dlogit.sum()]),
    }
    dh2 = np.zeros_like(h2)
    dh2[:, -1, :] = np.outer(dlogit, p["head.w"])
    dh1, grads["l2.W"], grads["l2.U"], grads["l2.b"] = kernels.lstm_backward(
        h1, p["l2.W"], p["l2.U"], h2, c2, g2, dh2
    )
    _, grads["l1.W"], grads["l1.U"], grads["l1.b"] = kernels.lstm_backward(
        X, p["l1.W"], p["l1.U"], h1, c1, g1, np.ascontiguousarray(dh1)
    )
    return {k: grads[k] for k in PARAM_NAMES}


def clip_global_norm(grads, max_norm):
    total = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))
    if max_norm and total > max_norm:
        scale = max_norm / (total + 1e-12)
        for g in grads.values():
            g *= scale
    return total


@dataclass
class TrainingLog:
    initial_loss: float
    epoch_loss: list
    epochs_run: int
    stopped_early: bool

    def to_dict(self):
        return asdict(self)


def train(X, y, hyper=LstmHyper(), feature_names=(), scaler=None):
    """Mini-batch Adam on sequences ``X (N, T, F)`` with labels ``y (N,)``.

    ``X`` must already be standardized; ``scaler = (mean, std)`` is only
    stored on the model so :func:`predict` can apply it to raw features.
    Stops after ``hyper.patience`` epochs without a ``min_delta`` loss gain.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 3 or len(X) != len(y) or len(X) == 0:
        raise ValueError("need non-empty X (N, T, F) and matching y")
    rng = np.random.default_rng(hyper.seed)
    model = init_model(X.shape[2], hyper, rng, feature_names)
    if scaler is not None:
        model.scaler_mean, model.scaler_std = (np.asarray(a, dtype=np.float64) for a in scaler)

    initial = loss(forward(model, X), y)
    m = {k: np.zeros_like(v) for k, v in model.params.items()}
    v = {k: np.zeros_like(val) for k, val in model.params.items()}
    step = 0
    history = []
    best, stale, stopped = np.inf, 0, False
    N = len(X)
    for epoch in range(hyper.epochs):
        order = rng.permutation(N)
        total = 0.0
        for a in range(0, N, hyper.batch_size):
            idx = order[a : a + hyper.batch_size]
            xb, yb = X[idx], y[idx]
            prob, cache = forward(model, xb, return_cache=True)
            batch_loss = loss(prob, yb)
            if not np.isfinite(batch_loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}, step {step}")
            grads = backward(model, xb, yb, cache)
            clip_global_norm(grads, hyper.grad_clip)
            step += 1
            lr_t = hyper.learning_rate * np.sqrt(1 - hyper.beta2**step) / (1 - hyper.beta1**step)
            for k, g in grads.items():
                m[k] = hyper.beta1 * m[k] + (1 - hyper.beta1) * g
                v[k] = hyper.beta2 * v[k] + (1 - hyper.beta2) * g * g
                model.params[k] -= lr_t * m[k] / (np.sqrt(v[k]) + hyper.adam_eps)
            total += batch_loss * len(idx)
        epoch_loss = total / N
        if not np.isfinite(epoch_loss):
            raise TrainingError(f"non-finite epoch loss at epoch {epoch}")
        history.append(epoch_loss)
        log.debug("epoch %d loss %.6f", epoch, epoch_loss)
        if epoch_loss < best - hyper.min_delta:
            best, stale = epoch_loss, 0
        else:
            stale += 1
            if stale >= hyper.patience:
                stopped = True
                break
    return model, TrainingLog(initial, history, len(history), stopped)


# ---------------------------------------------------------------------------
# sequences


def _infer_stride(starts_sorted, group_sorted):
    same = group_sorted[1:] == group_sorted[:-1]
    diffs = np.diff(starts_sorted)[same]
    diffs = diffs[diffs > 0]
    return int(diffs.min()) if len(diffs) else 1


def sequence_index(matrix, seq_len):
    """Row indices ``(n, seq_len)`` of each row's history, oldest first; -1 pads.

    History is the run of preceding windows in the same segment whose starts
    step back by exactly one stride.  Rows without a patient (synthetic) have
    no history.
    """
    n = len(matrix)
    keys = np.array(
        [f"{p}\x00{r}\x00{s}" if p >= 0 else f"syn\x00{i}" for i, (p, r, s) in
         enumerate(zip(matrix.patient_id, matrix.recording, matrix.segment))],
        dtype=object,
    )
    _, group = np.unique(keys, return_inverse=True)
    order = np.lexsort((matrix.start_index, group))
    g_sorted = group[order]
    s_sorted = matrix.start_index[order]
    stride = matrix.stride if matrix.stride else _infer_stride(s_sorted, g_sorted)
    linked = np.zeros(n, dtype=bool)
    if n > 1:
        linked[1:] = (g_sorted[1:] == g_sorted[:-1]) & (np.diff(s_sorted) == stride)
    # position within the current run of linked rows
    run_pos = np.zeros(n, dtype=np.int64)
    for i in range(1, n):
        if linked[i]:
            run_pos[i] = run_pos[i - 1] + 1
    out = np.full((n, seq_len), -1, dtype=np.int64)
    pos = np.arange(n)
    for lag in range(seq_len):
        ok = run_pos >= lag
        out[order[ok], seq_len - 1 - lag] = order[pos[ok] - lag]
    return out


def gather_sequences(values, index):
    """``(n, T, F)`` tensor from row ``values`` and a :func:`sequence_index`; pads are zero."""
    seq = values[np.maximum(index, 0)]
    seq[index < 0] = 0.0
    return seq


def standardize(values, mean, std):
    return (values - mean) / np.where(std > 0, std, 1.0)


def fit_scaler(values):
    return values.mean(axis=0), values.std(axis=0)


def predict(model, matrix, batch=4096):
    """One score in (0, 1) per matrix row, in row order."""
    if tuple(matrix.names) != tuple(model.feature_names):
        raise ValueError("feature columns differ from the ones the model was trained on")
    values = matrix.values
    if model.scaler_mean is not None:
        values = standardize(values, model.scaler_mean, model.scaler_std)
    index = sequence_index(matrix, model.hyper.seq_len)
    out = np.empty(len(matrix))
    for a in range(0, len(matrix), batch):
        out[a : a + batch] = forward(model, gather_sequences(values, index[a : a + batch]))
    return out


# ---------------------------------------------------------------------------
# checkpoints


def _meta(model):
    return {
        "format": "fogrnn-lstm",
        "version": CHECKPOINT_VERSION,
        "hyper": asdict(model.hyper),
        "feature_names": list(model.feature_names),
        "shapes": {k: list(v.shape) for k, v in model.params.items()},
        "has_scaler": model.scaler_mean is not None,
    }


def dumps_checkpoint(model):
    arrays = {k: v for k, v in model.params.items()}
    if model.scaler_mean is not None:
        arrays["scaler.mean"] = model.scaler_mean
        arrays["scaler.std"] = model.scaler_std
    arrays["meta"] = np.array(json.dumps(_meta(model), sort_keys=True))
    buf = io.BytesIO()
    np.savez(buf, **arrays)
    return buf.getvalue()


def save_checkpoint(model, path):
    atomic_write_bytes(path, dumps_checkpoint(model))


def load_checkpoint(path_or_bytes):
    src = io.BytesIO(path_or_bytes) if isinstance(path_or_bytes, (bytes, bytearray)) else path_or_bytes
    with np.load(src, allow_pickle=False) as z:
        meta = json.loads(str(z["meta"]))
        if meta.get("format") != "fogrnn-lstm":
            raise ValueError("not a fogrnn LSTM checkpoint")
        params = {k: np.array(z[k], dtype=np.float64) for k in PARAM_NAMES}
        for k, shape in meta["shapes"].items():
            if list(params[k].shape) != shape:
                raise ValueError(f"checkpoint shape mismatch for {k}")
        model = LstmModel(params, LstmHyper(**meta["hyper"]), tuple(meta["feature_names"]))
        if meta["has_scaler"]:
            model.scaler_mean = np.array(z["scaler.mean"])
            model.scaler_std = np.array(z["scaler.std"])
    return model
