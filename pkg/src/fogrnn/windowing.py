"""Fixed-length sliding windows over recording segments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import Annotation

LABEL_RULES = ("majority", "any_freeze")
NO_FREEZE = 0
FREEZE = 1


@dataclass(frozen=True)
class WindowSpec:
    length_samples: int = 256
    stride_samples: int = 32
    label_rule: str = "majority"

    def __post_init__(self):
        if not (0 < self.stride_samples <= self.length_samples):
            raise ValueError(
                f"need 0 < stride <= length, got stride={self.stride_samples} length={self.length_samples}"
            )
        if self.label_rule not in LABEL_RULES:
            raise ValueError(f"label_rule must be one of {LABEL_RULES}, got {self.label_rule!r}")


@dataclass(frozen=True, eq=False)
class Window:
    """A ``(12, length)`` view into a recording's channel array.

    ``segment`` is the segment index inside the source recording and
    ``recording`` the recording name; together they identify a contiguous run.
    """

    patient_id: int
    recording: str
    segment: int
    start_index: int
    data: np.ndarray
    label: int


def window_count(n, length, stride):
    if n < length:
        return 0
    return (n - length) // stride + 1


def label_window(annotations, rule="majority"):
    """Binary label from the per-sample annotations of one window.

    ``majority`` needs strictly more than half the samples frozen (ties go to
    no-freeze); ``any_freeze`` needs one frozen sample.
    """
    n_freeze = int(np.count_nonzero(np.asarray(annotations) == Annotation.FREEZE))
    if rule == "majority":
        return FREEZE if 2 * n_freeze > len(annotations) else NO_FREEZE
    if rule == "any_freeze":
        return FREEZE if n_freeze > 0 else NO_FREEZE
    raise ValueError(f"unknown label rule {rule!r}")


def segment(rec, spec=WindowSpec()):
    """Slice every segment of ``rec`` into left-aligned windows.

    A segment of ``N`` samples yields ``(N - W) // S + 1`` windows starting at
    segment offsets ``0, S, 2S, ...``; shorter segments yield none.
    ``start_index`` is the sample index in the recording.
    """
    if not isinstance(spec, WindowSpec):
        raise TypeError("spec must be a WindowSpec")
    channels = rec.channels()
    W, S = spec.length_samples, spec.stride_samples
    out = []
    for seg_id, (a, b) in enumerate(rec.segments):
        n_win = window_count(b - a, W, S)
        if n_win == 0:
            continue
        ann = rec.annotation[a:b]
        # prefix count of frozen samples for O(1) labels
        frozen = np.concatenate(([0], np.cumsum(ann == Annotation.FREEZE)))
        for j in range(n_win):
            s = j * S
            n_freeze = int(frozen[s + W] - frozen[s])
            if spec.label_rule == "majority":
                label = FREEZE if 2 * n_freeze > W else NO_FREEZE
            else:
                label = FREEZE if n_freeze > 0 else NO_FREEZE
            out.append(Window(rec.patient_id, rec.name, seg_id, a + s, channels[:, a + s : a + s + W], label))
    return out


def segment_all(recordings, spec=WindowSpec()):
    out = []
    for rec in recordings:
        out.extend(segment(rec, spec))
    return out
