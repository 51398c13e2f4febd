"""Optional numba acceleration.

Hot kernels are compiled with ``numba.njit`` when numba is importable and
``FOGRNN_DISABLE_NUMBA`` is unset (or ``0``).  Otherwise the same functions
run as plain numpy code, or a vectorized numpy variant is picked instead.
"""

import os

try:
    import numba

    NUMBA_INSTALLED = True
except ImportError:  # pragma: no cover - numba is optional
    numba = None
    NUMBA_INSTALLED = False


def _env_disabled():
    return os.environ.get("FOGRNN_DISABLE_NUMBA", "0").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = NUMBA_INSTALLED and not _env_disabled()


def jit(func):
    """Compile ``func`` with numba if available, else return it unchanged.

    The undecorated python function stays reachable as ``func.py_func`` in
    both cases, so callers (and the benchmark) can always pick either path.
    """
    if not NUMBA_INSTALLED:
        func.py_func = func
        return func
    return numba.njit(cache=True, nogil=True)(func)


def pick(compiled, fallback):
    """Return the compiled kernel when acceleration is active."""
    return compiled if USE_NUMBA else fallback
