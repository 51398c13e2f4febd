"""Daphnet recordings: parsing, annotation filtering, magnitudes, synthetic data.

A Daphnet file holds one sample per line as 11 whitespace-separated integers::

    time_ms ankle_x ankle_y ankle_z thigh_x thigh_y thigh_z trunk_x trunk_y trunk_z annotation

Accelerations are in milli-g.  Annotation 0 marks samples outside the
experiment protocol, 1 is "no freeze" and 2 is "freeze".
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import IntEnum
from pathlib import Path
from typing import NamedTuple

import numpy as np

SAMPLE_RATE_HZ = 64
SENSORS = ("ankle", "thigh", "trunk")
AXES = ("x", "y", "z", "mag")
RAW_COLUMNS = tuple(f"{s}_{a}" for s in SENSORS for a in AXES[:3])
N_FIELDS = 11

_FILENAME_RE = re.compile(r"S(\d+)R(\d+)\.txt$", re.IGNORECASE)


class Annotation(IntEnum):
    OUT_OF_EXPERIMENT = 0
    NO_FREEZE = 1
    FREEZE = 2


class Channel(NamedTuple):
    sensor: str
    axis: str

    @property
    def name(self):
        return f"{self.sensor}_{self.axis}"


# 12 channels, grouped per sensor: x, y, z, magnitude.
CHANNELS = tuple(Channel(s, a) for s in SENSORS for a in AXES)
# Positions of the 9 raw axes inside CHANNELS, in file column order.
RAW_CHANNEL_INDEX = tuple(i for i, c in enumerate(CHANNELS) if c.axis != "mag")


class Sample(NamedTuple):
    time_ms: int
    accel: tuple
    annotation: Annotation


class DaphnetFormatError(ValueError):
    """Malformed Daphnet input; ``lineno`` is 1-based."""

    def __init__(self, message, lineno=None, source=None):
        self.lineno = lineno
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if lineno is not None:
            where += f"{lineno}: "
        elif where:
            where += " "
        super().__init__(where + message)


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Recording:
    """One patient session.

    ``segments`` lists half-open ``(start, stop)`` sample ranges that are
    contiguous in time; windows never cross a segment boundary.
    ``magnitudes`` is ``None`` until :func:`compute_magnitudes` runs.
    """

    patient_id: int
    time_ms: np.ndarray
    accel: np.ndarray
    annotation: np.ndarray
    segments: tuple = ()
    magnitudes: np.ndarray | None = None
    name: str = ""
    sample_rate_hz: int = SAMPLE_RATE_HZ
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "time_ms", _frozen(np.asarray(self.time_ms, dtype=np.int64)))
        object.__setattr__(self, "accel", _frozen(np.asarray(self.accel, dtype=np.int64).reshape(-1, 9)))
        object.__setattr__(self, "annotation", _frozen(np.asarray(self.annotation, dtype=np.int8)))
        if self.magnitudes is not None:
            object.__setattr__(self, "magnitudes", _frozen(np.asarray(self.magnitudes, dtype=np.float64)))
        object.__setattr__(self, "segments", tuple((int(a), int(b)) for a, b in self.segments))

    def __len__(self):
        return len(self.time_ms)

    def sample(self, i):
        return Sample(int(self.time_ms[i]), tuple(int(v) for v in self.accel[i]), Annotation(int(self.annotation[i])))

    def samples(self):
        return [self.sample(i) for i in range(len(self))]

    def channels(self):
        """All 12 channels as a read-only ``(12, n)`` float64 array, ordered like ``CHANNELS``."""
        if self.magnitudes is None:
            raise ValueError("magnitudes not computed; call compute_magnitudes first")
        out = self._cache.get("channels")
        if out is None:
            out = np.empty((len(CHANNELS), len(self)), dtype=np.float64)
            for k in range(len(SENSORS)):
                out[4 * k : 4 * k + 3] = self.accel[:, 3 * k : 3 * k + 3].T
                out[4 * k + 3] = self.magnitudes[:, k]
            out.setflags(write=False)
            self._cache["channels"] = out
        return out


def _parse_lines(lines, source=None):
    times, accel, ann = [], [], []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != N_FIELDS:
            raise DaphnetFormatError(f"expected {N_FIELDS} fields, got {len(parts)}", lineno, source)
        try:
            values = [int(p) for p in parts]
        except ValueError:
            raise DaphnetFormatError("non-integer field", lineno, source) from None
        if values[-1] not in (0, 1, 2):
            raise DaphnetFormatError(f"annotation must be 0, 1 or 2, got {values[-1]}", lineno, source)
        if times and values[0] <= times[-1]:
            raise DaphnetFormatError("time_ms must be strictly increasing", lineno, source)
        times.append(values[0])
        accel.append(values[1:10])
        ann.append(values[10])
    return times, accel, ann


def parse_daphnet(text_stream, patient_id=0, name="", source=None):
    """Parse a Daphnet text stream (any iterable of lines) into a Recording.

    Annotation-0 samples are kept; see :func:`filter_annotation_zero`.
    """
    if isinstance(text_stream, str):
        text_stream = text_stream.splitlines()
    times, accel, ann = _parse_lines(text_stream, source)
    n = len(times)
    return Recording(
        patient_id=patient_id,
        time_ms=np.array(times, dtype=np.int64),
        accel=np.array(accel, dtype=np.int64).reshape(n, 9),
        annotation=np.array(ann, dtype=np.int8),
        segments=((0, n),) if n else (),
        name=name,
    )


def patient_from_filename(path):
    m = _FILENAME_RE.search(Path(path).name)
    if m is None:
        return None
    return int(m.group(1)), int(m.group(2))


def read_daphnet(path, patient_id=None):
    path = Path(path)
    if patient_id is None:
        ids = patient_from_filename(path)
        patient_id = ids[0] if ids else 0
    with open(path, "r", newline=None) as fh:
        return parse_daphnet(fh, patient_id=patient_id, name=path.stem, source=str(path))


def load_dataset(directory):
    """Read every ``S##R##.txt`` file below ``directory``.

    Returns ``{patient_id: [Recording, ...]}`` with runs in filename order.
    """
    directory = Path(directory)
    files = sorted(p for p in directory.rglob("*.txt") if patient_from_filename(p))
    if not files:
        raise FileNotFoundError(f"no Daphnet S##R##.txt files under {directory}")
    out = {}
    for p in files:
        pid, _ = patient_from_filename(p)
        out.setdefault(pid, []).append(read_daphnet(p, pid))
    return dict(sorted(out.items()))


def serialize_daphnet(rec):
    """Inverse of :func:`parse_daphnet` (LF line endings)."""
    block = np.column_stack([rec.time_ms, rec.accel, rec.annotation.astype(np.int64)])
    return "".join(" ".join(str(v) for v in row) + "\n" for row in block.tolist())


def filter_annotation_zero(rec):
    """Drop annotation-0 samples, splitting segments at every removed gap."""
    keep = rec.annotation != Annotation.OUT_OF_EXPERIMENT
    new_index = np.cumsum(keep) - 1
    segments = []
    for a, b in rec.segments:
        m = keep[a:b].astype(np.int8)
        edges = np.diff(np.concatenate(([0], m, [0])))
        starts = np.flatnonzero(edges == 1) + a
        stops = np.flatnonzero(edges == -1) + a
        for s, e in zip(starts, stops):
            segments.append((int(new_index[s]), int(new_index[e - 1]) + 1))
    mags = rec.magnitudes[keep] if rec.magnitudes is not None else None
    return Recording(
        patient_id=rec.patient_id,
        time_ms=rec.time_ms[keep],
        accel=rec.accel[keep],
        annotation=rec.annotation[keep],
        segments=tuple(segments),
        magnitudes=mags,
        name=rec.name,
        sample_rate_hz=rec.sample_rate_hz,
    )


def compute_magnitudes(rec):
    a = rec.accel.astype(np.float64).reshape(-1, 3, 3)
    mags = np.sqrt(np.sum(a * a, axis=2))
    return replace(rec, magnitudes=mags, _cache={})


def prepare(rec):
    """Filter annotation 0 and add magnitude channels."""
    return compute_magnitudes(filter_annotation_zero(rec))


def to_csv(rec):
    """CSV dump with header ``time_ms,<9 raw axes>,<3 magnitudes>,annotation``."""
    if rec.magnitudes is None:
        rec = compute_magnitudes(rec)
    header = ["time_ms", *RAW_COLUMNS, *(f"{s}_mag" for s in SENSORS), "annotation"]
    lines = [",".join(header)]
    for t, acc, mag, an in zip(rec.time_ms.tolist(), rec.accel.tolist(), rec.magnitudes.tolist(), rec.annotation.tolist()):
        lines.append(",".join([str(t), *map(str, acc), *(f"{m:.17g}" for m in mag), str(an)]))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SynthSpec:
    """Synthetic recording layout.

    ``freezes`` and ``excluded`` are ``(start_s, duration_s)`` spans; excluded
    spans get annotation 0.  ``noise`` is the Gaussian noise std in milli-g.
    """

    duration_s: float
    freezes: tuple = ()
    excluded: tuple = ()
    noise: float = 30.0
    walk_hz: float = 2.0
    freeze_hz: float = 6.0
    amplitude: float = 300.0
    freeze_amplitude: float = 150.0
    gravity: float = 1000.0


def _span_indices(start_s, dur_s, fs, n):
    a = int(round(start_s * fs))
    b = int(round((start_s + dur_s) * fs))
    return max(a, 0), min(b, n)


def generate_synthetic(spec, seed, patient_id=1, name=None):
    """Walking (locomotor-band sinusoid) interrupted by freeze spans (freeze-band sinusoid)."""
    if spec.duration_s <= 0:
        raise ValueError("duration_s must be positive")
    fs = SAMPLE_RATE_HZ
    n = int(round(spec.duration_s * fs))
    if n == 0:
        raise ValueError("duration_s too short for a single sample")
    rng = np.random.default_rng(seed)
    annotation = np.full(n, Annotation.NO_FREEZE, dtype=np.int8)
    for start, dur in spec.freezes:
        a, b = _span_indices(start, dur, fs, n)
        annotation[a:b] = Annotation.FREEZE

    t = np.arange(n) / fs
    freeze = annotation == Annotation.FREEZE
    # per-axis gains and phases; gravity sits on each sensor's first axis
    gains = rng.uniform(0.6, 1.4, size=9)
    phases = rng.uniform(0.0, 2 * np.pi, size=(2, 9))
    accel = np.empty((n, 9))
    for k in range(9):
        walk = spec.amplitude * gains[k] * np.sin(2 * np.pi * spec.walk_hz * t + phases[0, k])
        shake = spec.freeze_amplitude * gains[k] * np.sin(2 * np.pi * spec.freeze_hz * t + phases[1, k])
        accel[:, k] = np.where(freeze, shake, walk)
        if k % 3 == 0:
            accel[:, k] += spec.gravity
    if spec.noise > 0:
        accel += rng.normal(0.0, spec.noise, size=accel.shape)

    for start, dur in spec.excluded:
        a, b = _span_indices(start, dur, fs, n)
        annotation[a:b] = Annotation.OUT_OF_EXPERIMENT

    time_ms = np.rint(np.arange(n) * (1000.0 / fs)).astype(np.int64)
    if name is None:
        name = f"S{patient_id:02d}R01"
    return Recording(
        patient_id=patient_id,
        time_ms=time_ms,
        accel=np.rint(accel).astype(np.int64),
        annotation=annotation,
        segments=((0, n),),
        name=name,
    )


def synthetic_cohort(n_patients, seed, duration_s=240.0, n_freezes=4, noise=30.0):
    """A cohort of synthetic patients with randomly placed freeze episodes.

    Returns ``{patient_id: [Recording]}`` (patient ids start at 1).
    """
    rng = np.random.default_rng(seed)
    cohort = {}
    for pid in range(1, n_patients + 1):
        slots = np.linspace(10.0, duration_s - 20.0, n_freezes + 1)
        freezes = []
        for a, b in zip(slots[:-1], slots[1:]):
            dur = float(rng.uniform(6.0, min(16.0, b - a - 2.0)))
            start = float(rng.uniform(a, b - dur))
            freezes.append((round(start, 3), round(dur, 3)))
        spec = SynthSpec(duration_s=duration_s, freezes=tuple(freezes), noise=noise)
        cohort[pid] = [generate_synthetic(spec, seed=int(rng.integers(2**31)), patient_id=pid)]
    return cohort

