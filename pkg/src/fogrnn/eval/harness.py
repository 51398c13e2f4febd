"""End-to-end experiments: ingest -> windows -> features -> split -> SMOTE -> LSTM -> metrics."""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .. import ingest
from .._io import atomic_write_bytes, atomic_write_text
from ..balance import smote_arrays
from ..config import RFE_GROUP, ExperimentConfig
from ..features import FeatureMatrix, SpectralContext, build_matrix, catalog
from ..model import baseline
from ..model.lstm import (
    dumps_checkpoint,
    fit_scaler,
    gather_sequences,
    predict,
    sequence_index,
    standardize,
    train,
)
from ..select import rfe_select
from ..windowing import segment_all
from .metrics import confusion, roc_auc, sens_spec
from .split import dependent_splits, split

log = logging.getLogger(__name__)

GRID_SENSORS = (("ankle",), ("thigh",), ("trunk",), "all")
GRID = [(g, s) for g in ("statistical", "frequency", "both") for s in GRID_SENSORS] + [(RFE_GROUP, "all")]
MODES = ("subject_independent", "subject_dependent")


def grid_configs(base, modes=MODES):
    """The 13 feature configurations under each split mode."""
    out = []
    for mode in modes:
        for group, sensors in GRID:
            out.append(
                base.replace(
                    **{"features.group": group, "features.sensors": list(sensors) if sensors != "all" else "all",
                       "split.mode": mode}
                )
            )
    return out


# ---------------------------------------------------------------------------
# data


def load_cohort(config):
    if config.synthetic is not None:
        s = config.synthetic
        return ingest.synthetic_cohort(s["patients"], s["seed"], s["duration_s"], s["n_freezes"], s["noise"])
    return ingest.load_dataset(config.data_path)


def featurize_cohort(cohort, window, ctx=SpectralContext()):
    """Full 145-column matrix over every patient and run."""
    parts = []
    for pid, recs in cohort.items():
        windows = segment_all([ingest.prepare(r) for r in recs], window)
        if windows:
            parts.append(build_matrix(windows, "both", "all", ctx, stride=window.stride_samples))
        else:
            log.warning("patient %s yields no windows", pid)
    return FeatureMatrix.concat(parts)


def feature_columns(config):
    if config.feature_group == RFE_GROUP:
        return None
    return [d.name for d in catalog(config.feature_group, config.sensors)]


# ---------------------------------------------------------------------------
# one train/test evaluation


def _metric_block(scores, labels):
    c = confusion(scores, labels)
    sens, spec = sens_spec(c)
    out = {"auc": None, "sensitivity": sens, "specificity": spec, "confusion": c.to_dict()}
    roc = None
    if 0 < int(np.sum(labels)) < len(labels):
        roc, out["auc"] = roc_auc(scores, labels)
    return out, roc


def _baseline_block(train_m, test_m, channel):
    th = baseline.calibrate_from_matrix(train_m, channel)
    pred = baseline.predict_from_matrix(th, test_m)
    c = confusion(pred.astype(np.float64), test_m.labels)
    sens, spec = sens_spec(c)
    auc = None
    if 0 < int(np.sum(test_m.labels)) < len(test_m):
        _, auc = roc_auc(baseline.scores_from_matrix(th, test_m), test_m.labels)
    return {
        "channel": channel,
        "fi_threshold": th.fi_threshold,
        "power_threshold": th.power_threshold,
        "train_j": th.train_j,
        "sensitivity": sens,
        "specificity": spec,
        "youden_j": None if sens is None or spec is None else sens + spec - 1.0,
        "auc": auc,
        "confusion": c.to_dict(),
    }


def fit_and_score(train_m, test_m, config, columns=None):
    """Train the LSTM on ``train_m`` and score ``test_m``.

    ``columns=None`` runs RFE on the training rows to choose them.  SMOTE is
    applied to the flattened training sequences so synthetic samples keep a
    full window history.
    """
    notes = []
    rfe_info = None
    if columns is None:
        k = min(config.rfe_k, train_m.values.shape[1] - 1)
        res = rfe_select(train_m, k, seed=config.seed)
        columns = res.selected
        rfe_info = {"k": k, "selected": res.selected}
    tr = train_m.select(columns)
    te = test_m.select(columns)
    mean, std = fit_scaler(tr.values)
    T = config.model.seq_len
    X = gather_sequences(standardize(tr.values, mean, std), sequence_index(tr, T))
    y = tr.labels

    n_min = int(min(np.sum(y == 0), np.sum(y == 1)))
    if n_min == 0:
        raise ValueError("training split holds a single class")
    spec = config.smote
    if n_min < spec.k_neighbors + 1:
        spec = replace(spec, k_neighbors=max(1, n_min - 1))
        notes.append(f"smote k_neighbors lowered to {spec.k_neighbors} ({n_min} minority sequences)")
    if n_min >= 2:
        synth, minority = smote_arrays(X.reshape(len(X), -1), y, spec)
        Xb = np.concatenate([X, synth.reshape(-1, T, X.shape[2])])
        yb = np.concatenate([y, np.full(len(synth), minority)])
    else:
        notes.append("smote skipped: fewer than 2 minority sequences")
        Xb, yb = X, y

    model, tlog = train(Xb, yb, config.model, feature_names=columns, scaler=(mean, std))
    scores = predict(model, te)
    return {
        "scores": scores,
        "labels": te.labels,
        "model": model,
        "training": tlog.to_dict(),
        "columns": list(columns),
        "rfe": rfe_info,
        "n_train": len(tr),
        "n_train_balanced": len(Xb),
        "n_test": len(te),
        "notes": notes,
    }


def _roc_rows(roc):
    if roc is None:
        return []
    return [[float(f), float(t), None if not np.isfinite(h) else float(h)] for f, t, h in zip(*roc)]


def _mean(values):
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else None


def _to_builtin(obj):
    if isinstance(obj, dict):
        return {k: _to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_builtin(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def run_experiment(config: ExperimentConfig, matrix=None):
    """Run one configuration and return ``(report, artifacts)``.

    ``report`` is JSON-ready; ``artifacts`` holds trained models keyed by
    checkpoint suffix.  Subject-dependent reports average per-patient
    metrics; their ``roc`` pools all patients' test scores.
    """
    if matrix is None:
        matrix = featurize_cohort(load_cohort(config), config.window)
    columns = feature_columns(config)
    report = {
        "experiment": config.experiment_id,
        "mode": config.split.mode,
        "feature_group": config.feature_group,
        "sensors": config.sensors if config.sensors == "all" else list(config.sensors),
    }
    artifacts = {}
    if config.split.mode == "subject_independent":
        tr, te = split(matrix, config.split)
        res = fit_and_score(tr, te, config, columns)
        metrics, roc = _metric_block(res["scores"], res["labels"])
        report.update(n_features=len(res["columns"]), features=res["columns"], **metrics)
        report["baseline"] = _baseline_block(tr, te, config.baseline_channel)
        report["counts"] = {k: res[k] for k in ("n_train", "n_train_balanced", "n_test")}
        report["training"] = res["training"]
        report["rfe"] = res["rfe"]
        report["notes"] = res["notes"]
        report["skipped"] = []
        report["roc"] = _roc_rows(roc)
        artifacts["model"] = res["model"]
    else:
        done, skipped = dependent_splits(matrix, config.split)
        per_patient, pooled_s, pooled_y = [], [], []
        for pid, tr, te in done:
            res = fit_and_score(tr, te, config, columns)
            metrics, _ = _metric_block(res["scores"], res["labels"])
            entry = {"patient_id": pid, **metrics}
            entry["baseline"] = _baseline_block(tr, te, config.baseline_channel)
            entry["counts"] = {k: res[k] for k in ("n_train", "n_train_balanced", "n_test")}
            entry["training"] = {k: res["training"][k] for k in ("initial_loss", "epochs_run", "stopped_early")}
            entry["training"]["final_loss"] = res["training"]["epoch_loss"][-1]
            entry["features"] = res["columns"]
            entry["notes"] = res["notes"]
            per_patient.append(entry)
            pooled_s.append(res["scores"])
            pooled_y.append(res["labels"])
            artifacts[f"p{pid}"] = res["model"]
        if not per_patient:
            raise ValueError("no patient eligible for the subject-dependent split")
        n_feat = {len(e["features"]) for e in per_patient}
        report["n_features"] = n_feat.pop() if len(n_feat) == 1 else None
        report["features"] = per_patient[0]["features"] if columns is not None else None
        report["auc"] = _mean(e["auc"] for e in per_patient)
        report["sensitivity"] = _mean(e["sensitivity"] for e in per_patient)
        report["specificity"] = _mean(e["specificity"] for e in per_patient)
        sums = {k: sum(e["confusion"][k] for e in per_patient) for k in ("tp", "fp", "tn", "fn")}
        report["confusion"] = sums
        report["baseline"] = {
            "channel": config.baseline_channel,
            "sensitivity": _mean(e["baseline"]["sensitivity"] for e in per_patient),
            "specificity": _mean(e["baseline"]["specificity"] for e in per_patient),
            "youden_j": _mean(e["baseline"]["youden_j"] for e in per_patient),
            "auc": _mean(e["baseline"]["auc"] for e in per_patient),
        }
        report["per_patient"] = per_patient
        report["skipped"] = [{"patient_id": p, "reason": r} for p, r in skipped]
        s, y = np.concatenate(pooled_s), np.concatenate(pooled_y)
        roc = roc_auc(s, y)[0] if 0 < y.sum() < len(y) else None
        report["roc"] = _roc_rows(roc)
    report["config"] = config.to_dict()
    return _to_builtin(report), artifacts


# ---------------------------------------------------------------------------
# outputs


def report_json(report):
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def roc_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fpr", "tpr", "threshold"])
    for f, t, h in report["roc"]:
        w.writerow([f"{f:.17g}", f"{t:.17g}", "inf" if h is None else f"{h:.17g}"])
    return buf.getvalue()


def write_outputs(report, artifacts, out_dir):
    out_dir = Path(out_dir)
    stem = f"{report['experiment']}_{report['mode']}"
    paths = {"report": out_dir / f"report_{stem}.json", "roc": out_dir / f"roc_{stem}.csv"}
    atomic_write_text(paths["roc"], roc_csv(report))
    for key, model in artifacts.items():
        p = out_dir / (f"model_{stem}.npz" if key == "model" else f"model_{stem}_{key}.npz")
        atomic_write_bytes(p, dumps_checkpoint(model))
        paths[f"model:{key}"] = p
    # report last: its presence marks a finished run
    atomic_write_text(paths["report"], report_json(report))
    return paths


SUMMARY_COLUMNS = ("experiment", "mode", "auc", "sensitivity", "specificity")


def summary_csv(reports):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in reports:
        w.writerow([r["experiment"], r["mode"], *("" if r[k] is None else f"{r[k]:.6f}" for k in SUMMARY_COLUMNS[2:])])
    return buf.getvalue()


def _grid_job(args):
    config, matrix = args
    report, artifacts = run_experiment(config, matrix)
    write_outputs(report, artifacts, config.output_dir)
    return report


def run_grid(base, jobs=1, modes=MODES, matrix=None):
    """All 13 configurations per mode; writes per-run outputs plus ``summary.csv``."""
    configs = grid_configs(base, modes)
    if matrix is None:
        matrix = featurize_cohort(load_cohort(base), base.window)
    tasks = [(c, matrix) for c in configs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_grid_job, tasks))
    else:
        reports = [_grid_job(t) for t in tasks]
    atomic_write_text(Path(base.output_dir) / "summary.csv", summary_csv(reports))
    return reports
