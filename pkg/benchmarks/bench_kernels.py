"""Time the numba and pure-numpy variants of each hot kernel.

    python benchmarks/bench_kernels.py [--repeat 5]

The first numba call (compile or cache load) is excluded from timings.
"""

import argparse
import timeit

import numpy as np

from fogrnn import _accel, kernels


def cases(rng):
    X = rng.normal(size=(64, 8, 20))
    W, U, b = rng.normal(size=(256, 20)) * 0.1, rng.normal(size=(256, 64)) * 0.1, np.zeros(256)
    fwd = kernels.lstm_forward_numpy(X, W, U, b)
    dhs = rng.normal(size=(64, 8, 64))
    windows = rng.normal(size=(2048, 256))
    pts = rng.normal(size=(3000, 40))
    return {
        "lstm_forward (B=64,T=8,F=20,H=64)": (
            lambda: kernels.lstm_forward_numpy(X, W, U, b),
            lambda: kernels.lstm_forward_numba(X, W, U, b),
        ),
        "lstm_backward (same shapes)": (
            lambda: kernels.lstm_backward_numpy(X, W, U, *fwd, dhs),
            lambda: kernels.lstm_backward_numba(X, W, U, *fwd, dhs),
        ),
        "window_stats (2048 x 256)": (
            lambda: kernels.window_stats_numpy(windows),
            lambda: kernels.window_stats_numba(windows),
        ),
        "knn k=5 (3000 x 40)": (
            lambda: kernels.knn_numpy(pts, 5),
            lambda: kernels.knn_numba(pts, 5),
        ),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.NUMBA_INSTALLED:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':38s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, (np_fn, nb_fn) in cases(rng).items():
        nb_fn()  # compile / load cache
        t_np = min(timeit.repeat(np_fn, number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(nb_fn, number=1, repeat=args.repeat)) * 1e3
        print(f"{name:38s} {t_np:10.2f} {t_nb:10.2f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
