"""Freezing-of-gait detection from wearable accelerometers.

Pipeline: :mod:`fogrnn.ingest` -> :mod:`fogrnn.windowing` ->
:mod:`fogrnn.features` (+ :mod:`fogrnn.select`) -> :mod:`fogrnn.balance` ->
:mod:`fogrnn.model` -> :mod:`fogrnn.eval`.
"""

from ._accel import USE_NUMBA

__version__ = "0.1.0"
__all__ = ["USE_NUMBA", "__version__"]
