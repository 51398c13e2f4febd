"""Window features: 7 statistics and 5 spectral features per channel, plus FI_MC.

Per sensor there are 4 channels (x, y, z, magnitude), giving
7 x 12 = 84 statistical and 5 x 12 + 1 = 61 frequency features.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .ingest import AXES, CHANNELS, RAW_CHANNEL_INDEX, SAMPLE_RATE_HZ, SENSORS, Channel

STAT_NAMES = ("mean", "std", "var", "median", "range", "max", "min")
FREQ_NAMES = ("energy", "fi", "power", "p_h", "p_l")
FI_MC_NAME = "fi_mc"
GROUPS = ("statistical", "frequency", "both")
TAPERS = ("rectangular", "hann")
# stands in for P_H / 0
FI_CAP = 1e9

META_COLUMNS = ("patient_id", "recording", "segment", "start_index")


@dataclass(frozen=True)
class SpectralContext:
    fs: int = SAMPLE_RATE_HZ
    n_fft: int = 256
    taper: str = "rectangular"

    def __post_init__(self):
        if self.taper not in TAPERS:
            raise ValueError(f"taper must be one of {TAPERS}")
        if not (self.l < self.h1 < self.h2 <= self.n_fft // 2):
            raise ValueError(f"band indices out of order for fs={self.fs}, n_fft={self.n_fft}")

    @property
    def h1(self):
        return int(round(3 * self.n_fft / self.fs))

    @property
    def h2(self):
        return int(round(8 * self.n_fft / self.fs))

    @property
    def l(self):  # noqa: E743
        return int(round(0.5 * self.n_fft / self.fs))


class FeatureDescriptor(NamedTuple):
    name: str
    channel: Channel | None  # None for the all-axes FI_MC
    kind: str  # "statistical" | "frequency"


def power_spectrum(x, ctx=SpectralContext()):
    """One-sided periodogram ``|DFT(x)|^2`` for bins ``0..n_fft/2`` (last axis)."""
    x = np.asarray(x, dtype=np.float64)
    tau = x.shape[-1]
    if ctx.n_fft < tau:
        raise ValueError(f"n_fft={ctx.n_fft} shorter than window length {tau}")
    if ctx.taper == "hann":
        x = x * np.hanning(tau)
    F = np.fft.rfft(x, n=ctx.n_fft, axis=-1)
    return F.real**2 + F.imag**2


def band_power(pxx, lo_idx, hi_idx, fs):
    """Trapezoid-style band power ``(sum pxx[lo+1..hi] + sum pxx[lo..hi-1]) / (2 fs)``."""
    pxx = np.asarray(pxx, dtype=np.float64)
    n_bins = pxx.shape[-1]
    if not (0 <= lo_idx < hi_idx <= n_bins - 1):
        raise ValueError(f"need 0 <= lo < hi <= {n_bins - 1}, got lo={lo_idx} hi={hi_idx}")
    upper = pxx[..., lo_idx + 1 : hi_idx + 1].sum(axis=-1)
    lower = pxx[..., lo_idx:hi_idx].sum(axis=-1)
    return (upper + lower) / (2.0 * fs)


def freeze_ratio(p_h, p_l):
    """``p_h / p_l`` with 0/0 -> 0 and x/0 -> FI_CAP."""
    p_h = np.asarray(p_h, dtype=np.float64)
    p_l = np.asarray(p_l, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = p_h / p_l
    r = np.where(p_l > 0, r, np.where(p_h > 0, FI_CAP, 0.0))
    return np.minimum(r, FI_CAP)


def band_powers(x, ctx=SpectralContext()):
    pxx = power_spectrum(x, ctx)
    return pxx, band_power(pxx, ctx.h1, ctx.h2, ctx.fs), band_power(pxx, ctx.l, ctx.h1, ctx.fs)


def freq_features(x, ctx=SpectralContext()):
    """``(energy, FI, power, P_H, P_L)`` stacked on a new last axis."""
    x = np.asarray(x, dtype=np.float64)
    pxx, p_h, p_l = band_powers(x, ctx)
    energy = pxx.sum(axis=-1) / x.shape[-1]
    return np.stack([energy, freeze_ratio(p_h, p_l), p_h + p_l, p_h, p_l], axis=-1)


def multichannel_fi(x9, ctx=SpectralContext()):
    """FI over the 9 raw axes: summed P_H over summed P_L. ``x9`` is ``(..., 9, tau)``."""
    x9 = np.asarray(x9, dtype=np.float64)
    if x9.shape[-2] != 9:
        raise ValueError("expected 9 raw axes on the second-to-last axis")
    _, p_h, p_l = band_powers(x9, ctx)
    return freeze_ratio(p_h.sum(axis=-1), p_l.sum(axis=-1))


def stat_features(x):
    """Population mean, std, var, median, range, max, min over the last axis."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] < 2:
        raise ValueError("need at least 2 samples")
    return kernels.window_stats(x)


# ---------------------------------------------------------------------------
# catalog


def _normalize_sensors(sensors):
    if sensors is None or sensors == "all":
        return SENSORS
    if isinstance(sensors, str):
        sensors = [sensors]
    sensors = list(dict.fromkeys(sensors))
    bad = [s for s in sensors if s not in SENSORS]
    if bad:
        raise ValueError(f"unknown sensor(s) {bad}; choose from {SENSORS}")
    if not sensors:
        raise ValueError("empty sensor selection")
    return tuple(s for s in SENSORS if s in sensors)


def catalog(group="both", sensors="all"):
    """Ordered descriptors: statistical block, frequency block, then FI_MC."""
    if group not in GROUPS:
        raise ValueError(f"group must be one of {GROUPS}, got {group!r}")
    sensors = _normalize_sensors(sensors)
    out = []
    if group in ("statistical", "both"):
        for s in sensors:
            for a in AXES:
                out.extend(FeatureDescriptor(f"{s}_{a}_{f}", Channel(s, a), "statistical") for f in STAT_NAMES)
    if group in ("frequency", "both"):
        for s in sensors:
            for a in AXES:
                out.extend(FeatureDescriptor(f"{s}_{a}_{f}", Channel(s, a), "frequency") for f in FREQ_NAMES)
        if sensors == SENSORS:
            out.append(FeatureDescriptor(FI_MC_NAME, None, "frequency"))
    return out


def descriptor_from_name(name):
    if name == FI_MC_NAME:
        return FeatureDescriptor(name, None, "frequency")
    sensor, axis, feat = name.split("_", 2)
    kind = "statistical" if feat in STAT_NAMES else "frequency"
    if sensor not in SENSORS or axis not in AXES or feat not in STAT_NAMES + FREQ_NAMES:
        raise ValueError(f"unknown feature column {name!r}")
    return FeatureDescriptor(name, Channel(sensor, axis), kind)


# ---------------------------------------------------------------------------
# matrix


@dataclass(eq=False)
class FeatureMatrix:
    """Rows are windows, columns are catalog features.

    Row metadata locates each window in time: rows sharing
    ``(patient_id, recording, segment)`` are one contiguous run ordered by
    ``start_index``.  Synthetic (oversampled) rows carry ``patient_id = -1``.
    """

    values: np.ndarray
    labels: np.ndarray
    columns: tuple
    patient_id: np.ndarray = None
    recording: np.ndarray = None
    segment: np.ndarray = None
    start_index: np.ndarray = None
    stride: int | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("values must be 2-D")
        n = self.values.shape[0]
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(n)
        self.columns = tuple(c if isinstance(c, FeatureDescriptor) else descriptor_from_name(c) for c in self.columns)
        if len(self.columns) != self.values.shape[1]:
            raise ValueError("column count does not match values")
        self.patient_id = np.full(n, -1, np.int64) if self.patient_id is None else np.asarray(self.patient_id, np.int64)
        self.recording = np.full(n, "", object) if self.recording is None else np.asarray(self.recording, object)
        self.segment = np.full(n, -1, np.int64) if self.segment is None else np.asarray(self.segment, np.int64)
        self.start_index = np.full(n, -1, np.int64) if self.start_index is None else np.asarray(self.start_index, np.int64)

    def __len__(self):
        return self.values.shape[0]

    @property
    def names(self):
        return [c.name for c in self.columns]

    def take(self, rows):
        rows = np.asarray(rows)
        return FeatureMatrix(
            self.values[rows], self.labels[rows], self.columns,
            self.patient_id[rows], self.recording[rows], self.segment[rows], self.start_index[rows],
            self.stride,
        )

    def select(self, names):
        index = {c.name: i for i, c in enumerate(self.columns)}
        missing = [n for n in names if n not in index]
        if missing:
            raise KeyError(f"columns not in matrix: {missing[:5]}")
        cols = [index[n] for n in names]
        return FeatureMatrix(
            self.values[:, cols], self.labels, [self.columns[i] for i in cols],
            self.patient_id, self.recording, self.segment, self.start_index, self.stride,
        )

    def with_values(self, values):
        return FeatureMatrix(
            values, self.labels, self.columns,
            self.patient_id, self.recording, self.segment, self.start_index, self.stride,
        )

    @classmethod
    def concat(cls, parts):
        parts = list(parts)
        if not parts:
            raise ValueError("nothing to concatenate")
        names = parts[0].names
        for p in parts[1:]:
            if p.names != names:
                raise ValueError("column mismatch in concat")
        strides = {p.stride for p in parts if p.stride is not None}
        return cls(
            np.concatenate([p.values for p in parts]),
            np.concatenate([p.labels for p in parts]),
            parts[0].columns,
            np.concatenate([p.patient_id for p in parts]),
            np.concatenate([p.recording for p in parts]),
            np.concatenate([p.segment for p in parts]),
            np.concatenate([p.start_index for p in parts]),
            strides.pop() if len(strides) == 1 else None,
        )

    def patients(self):
        return sorted(int(p) for p in np.unique(self.patient_id) if p >= 0)

    # -- CSV -------------------------------------------------------------
    def to_csv(self, with_meta=False):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = (list(META_COLUMNS) if with_meta else []) + self.names + ["label"]
        w.writerow(header)
        for r in range(len(self)):
            row = []
            if with_meta:
                row += [int(self.patient_id[r]), self.recording[r], int(self.segment[r]), int(self.start_index[r])]
            row += [f"{v:.17g}" for v in self.values[r]]
            row.append(int(self.labels[r]))
            w.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, stride=None):
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty CSV")
        header = rows[0]
        if header[-1] != "label":
            raise ValueError("last CSV column must be 'label'")
        n_meta = len(META_COLUMNS) if tuple(header[: len(META_COLUMNS)]) == META_COLUMNS else 0
        names = header[n_meta:-1]
        body = rows[1:]
        values = np.array([[float(v) for v in r[n_meta:-1]] for r in body], dtype=np.float64).reshape(len(body), len(names))
        labels = np.array([int(r[-1]) for r in body], dtype=np.int64)
        meta = {}
        if n_meta:
            meta = dict(
                patient_id=[int(r[0]) for r in body],
                recording=[r[1] for r in body],
                segment=[int(r[2]) for r in body],
                start_index=[int(r[3]) for r in body],
            )
        return cls(values, labels, names, stride=stride, **meta)


def _chunk_features(data, ctx):
    """All 145 features for stacked windows ``data`` of shape ``(n, 12, tau)``."""
    stats = stat_features(data)  # (n, 12, 7)
    freq = freq_features(data, ctx)  # (n, 12, 5)
    fimc = multichannel_fi(data[:, list(RAW_CHANNEL_INDEX), :], ctx)
    return stats, freq, fimc


def _column_index(descriptors):
    """Map descriptors to (block, channel, feature) positions of ``_chunk_features``."""
    ch_index = {c: i for i, c in enumerate(CHANNELS)}
    out = []
    for d in descriptors:
        if d.channel is None:
            out.append(("fimc", 0, 0))
        else:
            feat = d.name[len(d.channel.name) + 1 :]
            if d.kind == "statistical":
                out.append(("stat", ch_index[d.channel], STAT_NAMES.index(feat)))
            else:
                out.append(("freq", ch_index[d.channel], FREQ_NAMES.index(feat)))
    return out


def build_matrix(windows, group="both", sensors="all", ctx=SpectralContext(), stride=None, chunk=2048):
    """Feature matrix over ``windows`` restricted to ``group`` and ``sensors``.

    Rows follow window order.  ``stride`` (in samples) is recorded so
    sequence builders can tell adjacent windows apart from gaps.
    """
    windows = list(windows)
    if not windows:
        raise ValueError("no windows")
    descriptors = catalog(group, sensors)
    if not descriptors:
        raise ValueError("empty feature selection")
    positions = _column_index(descriptors)
    values = np.empty((len(windows), len(descriptors)))
    for a in range(0, len(windows), chunk):
        part = windows[a : a + chunk]
        data = np.stack([w.data for w in part])
        stats, freq, fimc = _chunk_features(data, ctx)
        for j, (block, ch, f) in enumerate(positions):
            if block == "stat":
                values[a : a + len(part), j] = stats[:, ch, f]
            elif block == "freq":
                values[a : a + len(part), j] = freq[:, ch, f]
            else:
                values[a : a + len(part), j] = fimc
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("non-finite feature value")
    return FeatureMatrix(
        values,
        [w.label for w in windows],
        descriptors,
        [w.patient_id for w in windows],
        [w.recording for w in windows],
        [w.segment for w in windows],
        [w.start_index for w in windows],
        stride,
    )
