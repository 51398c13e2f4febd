"""Hot numeric kernels.

Each public kernel resolves to a numba-compiled function or a numpy
fallback depending on :data:`fogrnn._accel.USE_NUMBA`.  Both variants are
importable by name (``*_numba`` / ``*_numpy``) for tests and benchmarks.

The LSTM layer kernels are written once in numba-compatible numpy, so the
fallback is literally the uncompiled source.  They are BLAS-bound, and the
compiled build measured slower than plain numpy at the batch sizes used in
training and prediction (see ``benchmarks/bench_kernels.py``), so
``lstm_forward``/``lstm_backward`` always dispatch to numpy; the compiled
variants stay available by name.  The window-statistics and
nearest-neighbour kernels have separate loop and vectorized forms and do
follow the flag.
"""

import numpy as np

from ._accel import NUMBA_INSTALLED, jit, pick

# --------------------------------------------------------------------------
# LSTM layer, gate order: input, forget, output, candidate
# --------------------------------------------------------------------------


def _lstm_forward(X, W, U, b):
    B, T, D = X.shape
    H = U.shape[1]
    hs = np.zeros((B, T, H))
    cs = np.zeros((B, T, H))
    gates = np.zeros((B, T, 4 * H))
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    WT = np.ascontiguousarray(W.T)
    UT = np.ascontiguousarray(U.T)
    for t in range(T):
        xt = np.ascontiguousarray(X[:, t, :])
        z = np.dot(xt, WT) + np.dot(h, UT) + b
        i = 1.0 / (1.0 + np.exp(-z[:, :H]))
        f = 1.0 / (1.0 + np.exp(-z[:, H : 2 * H]))
        o = 1.0 / (1.0 + np.exp(-z[:, 2 * H : 3 * H]))
        g = np.tanh(z[:, 3 * H :])
        c = f * c + i * g
        h = o * np.tanh(c)
        gates[:, t, :H] = i
        gates[:, t, H : 2 * H] = f
        gates[:, t, 2 * H : 3 * H] = o
        gates[:, t, 3 * H :] = g
        hs[:, t, :] = h
        cs[:, t, :] = c
    return hs, cs, gates


def _lstm_backward(X, W, U, hs, cs, gates, dhs):
    """Backpropagation through time for one layer.

    ``dhs`` is the loss gradient w.r.t. each emitted hidden state (B, T, H).
    Returns ``(dX, dW, dU, db)``.
    """
    B, T, D = X.shape
    H = U.shape[1]
    dX = np.zeros((B, T, D))
    dW = np.zeros((4 * H, D))
    dU = np.zeros((4 * H, H))
    db = np.zeros(4 * H)
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    dz = np.zeros((B, 4 * H))
    zero = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        i = gates[:, t, :H]
        f = gates[:, t, H : 2 * H]
        o = gates[:, t, 2 * H : 3 * H]
        g = gates[:, t, 3 * H :]
        c = cs[:, t, :]
        if t > 0:
            c_prev = np.ascontiguousarray(cs[:, t - 1, :])
            h_prev = np.ascontiguousarray(hs[:, t - 1, :])
        else:
            c_prev = zero
            h_prev = zero
        dh = dhs[:, t, :] + dh_next
        tc = np.tanh(c)
        dc = dc_next + dh * o * (1.0 - tc * tc)
        dz[:, :H] = dc * g * i * (1.0 - i)
        dz[:, H : 2 * H] = dc * c_prev * f * (1.0 - f)
        dz[:, 2 * H : 3 * H] = dh * tc * o * (1.0 - o)
        dz[:, 3 * H :] = dc * i * (1.0 - g * g)
        dc_next = dc * f
        xt = np.ascontiguousarray(X[:, t, :])
        dzT = np.ascontiguousarray(dz.T)
        dW += np.dot(dzT, xt)
        dU += np.dot(dzT, h_prev)
        db += dz.sum(axis=0)
        dX[:, t, :] = np.dot(dz, W)
        dh_next = np.dot(dz, U)
    return dX, dW, dU, db


lstm_forward_numpy = _lstm_forward
lstm_backward_numpy = _lstm_backward
lstm_forward_numba = jit(_lstm_forward) if NUMBA_INSTALLED else None
lstm_backward_numba = jit(_lstm_backward) if NUMBA_INSTALLED else None
lstm_forward = lstm_forward_numpy
lstm_backward = lstm_backward_numpy


# --------------------------------------------------------------------------
# Per-row statistics: mean, std, var, median, range, max, min (population)
# --------------------------------------------------------------------------


def window_stats_numpy(X):
    X = np.asarray(X, dtype=np.float64)
    mean = X.mean(axis=-1)
    var = np.mean((X - mean[..., None]) ** 2, axis=-1)
    mx = X.max(axis=-1)
    mn = X.min(axis=-1)
    return np.stack([mean, np.sqrt(var), var, np.median(X, axis=-1), np.abs(mx - mn), mx, mn], axis=-1)


def _window_stats_loop(X):
    n, tau = X.shape
    out = np.empty((n, 7))
    for r in range(n):
        s = 0.0
        mx = X[r, 0]
        mn = X[r, 0]
        for j in range(tau):
            v = X[r, j]
            s += v
            if v > mx:
                mx = v
            if v < mn:
                mn = v
        mean = s / tau
        ss = 0.0
        for j in range(tau):
            d = X[r, j] - mean
            ss += d * d
        var = ss / tau
        med = np.median(X[r])
        out[r, 0] = mean
        out[r, 1] = np.sqrt(var)
        out[r, 2] = var
        out[r, 3] = med
        out[r, 4] = abs(mx - mn)
        out[r, 5] = mx
        out[r, 6] = mn
    return out


_window_stats_jit = jit(_window_stats_loop) if NUMBA_INSTALLED else None


def window_stats_numba(X):
    X = np.asarray(X, dtype=np.float64)
    lead = X.shape[:-1]
    flat = np.ascontiguousarray(X.reshape(-1, X.shape[-1]))
    return _window_stats_jit(flat).reshape(*lead, 7)


window_stats = pick(window_stats_numba, window_stats_numpy)


# --------------------------------------------------------------------------
# k nearest neighbours within one point set (self excluded)
# --------------------------------------------------------------------------


def knn_numpy(A, k, block=1024):
    """Indices of the ``k`` nearest rows of ``A`` for every row, self excluded.

    Squared Euclidean distance; ties broken by lower index.
    """
    A = np.asarray(A, dtype=np.float64)
    m = A.shape[0]
    sq = np.einsum("ij,ij->i", A, A)
    out = np.empty((m, k), dtype=np.int64)
    for a in range(0, m, block):
        rows = A[a : a + block]
        d = sq[a : a + block, None] - 2.0 * (rows @ A.T) + sq[None, :]
        np.maximum(d, 0.0, out=d)
        d[np.arange(len(rows)), np.arange(a, a + len(rows))] = np.inf
        order = np.argsort(d, axis=1, kind="stable")
        out[a : a + block] = order[:, :k]
    return out


def _knn_loop(A, k):
    m, dim = A.shape
    out = np.empty((m, k), dtype=np.int64)
    best_d = np.empty(k)
    best_i = np.empty(k, dtype=np.int64)
    for r in range(m):
        for q in range(k):
            best_d[q] = np.inf
            best_i[q] = m
        for j in range(m):
            if j == r:
                continue
            d = 0.0
            for c in range(dim):
                diff = A[r, c] - A[j, c]
                d += diff * diff
            # insertion into the sorted top-k; strict < keeps lower index on ties
            if d < best_d[k - 1]:
                q = k - 1
                while q > 0 and d < best_d[q - 1]:
                    best_d[q] = best_d[q - 1]
                    best_i[q] = best_i[q - 1]
                    q -= 1
                best_d[q] = d
                best_i[q] = j
        for q in range(k):
            out[r, q] = best_i[q]
    return out


_knn_jit = jit(_knn_loop) if NUMBA_INSTALLED else None


def knn_numba(A, k):
    return _knn_jit(np.ascontiguousarray(A, dtype=np.float64), int(k))


knn = pick(knn_numba, knn_numpy)
