import csv
import io
import json
import subprocess
import sys

import pytest

from fogrnn import ingest
from fogrnn.cli import main


def _header(path):
    return next(csv.reader(io.StringIO(path.read_text())))


@pytest.fixture(scope="module")
def recordings(tmp_path_factory):
    d = tmp_path_factory.mktemp("recs")
    assert main(["synth", "--duration", "60", "--freeze", "25:10", "--seed", "7", "-o", str(d / "S01R01.txt")]) == 0
    assert main(["synth", "--duration", "40", "--freeze", "5:8", "--seed", "8", "--patient-id", "2",
                 "-o", str(d / "S02R01.txt")]) == 0
    return d


def test_synth_lines_and_format(recordings):
    p = recordings / "S01R01.txt"
    lines = p.read_text().splitlines()
    assert len(lines) == 3840
    assert all(len(line.split()) == 11 for line in lines)
    rec = ingest.read_daphnet(p)
    assert rec.patient_id == 1 and set(rec.annotation.tolist()) == {1, 2}


def test_synth_deterministic(tmp_path):
    args = ["synth", "--duration", "20", "--freeze", "5:4", "--seed", "3"]
    main(args + ["-o", str(tmp_path / "a.txt")])
    main(args + ["-o", str(tmp_path / "b.txt")])
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()


def test_synth_zero_duration(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        main(["synth", "--duration", "0", "--seed", "1", "-o", str(tmp_path / "x.txt")])
    assert e.value.code != 0
    assert "usage" in capsys.readouterr().err
    assert not (tmp_path / "x.txt").exists()


def test_synth_cohort(tmp_path):
    assert main(["synth", "--patients", "3", "--duration", "60", "--n-freezes", "1", "--seed", "2", "-o", str(tmp_path)]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["S01R01.txt", "S02R01.txt", "S03R01.txt"]


@pytest.mark.parametrize("group, sensors, n", [("frequency", "all", 61), ("statistical", "trunk", 28), ("both", "all", 145)])
def test_featurize_columns(recordings, tmp_path, group, sensors, n):
    out = tmp_path / "m.csv"
    assert main(["featurize", str(recordings), "-o", str(out), "--group", group, "--sensors", sensors]) == 0
    header = _header(out)
    assert header[-1] == "label" and len(header) == n + 1


def test_featurize_with_meta(recordings, tmp_path):
    out = tmp_path / "m.csv"
    main(["featurize", str(recordings / "S02R01.txt"), "-o", str(out), "--group", "statistical",
          "--sensors", "ankle", "--with-meta"])
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0][:4] == ["patient_id", "recording", "segment", "start_index"]
    assert len(rows) - 1 == (2560 - 256) // 32 + 1


def test_featurize_missing_input(recordings, tmp_path, capsys):
    out = tmp_path / "m.csv"
    assert main(["featurize", str(recordings / "S01R01.txt"), str(tmp_path / "nope.txt"), "-o", str(out)]) != 0
    assert "nope.txt" in capsys.readouterr().err
    assert not out.exists()


def test_featurize_bad_file_reports_line(tmp_path, capsys):
    bad = tmp_path / "S01R01.txt"
    bad.write_text("0 1 2 3 4 5 6 7 8 9 1\n15 1 2 3\n")
    assert main(["featurize", str(bad), "-o", str(tmp_path / "m.csv")]) == 1
    assert "S01R01.txt:2" in capsys.readouterr().err


def _write_config(tmp_path, **extra):
    raw = {
        "seed": 5,
        "data": {"synthetic": {"patients": 10, "duration_s": 60, "n_freezes": 2}},
        "features": {"group": "frequency", "sensors": ["trunk"]},
        "model": {"hidden1": 4, "hidden2": 3, "seq_len": 2, "batch_size": 64, "epochs": 1},
        "smote": {"k_neighbors": 3},
        "output_dir": str(tmp_path / "out"),
    }
    raw.update(extra)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(raw))
    return p


def test_run_writes_outputs(tmp_path, capsys):
    cfg = _write_config(tmp_path)
    assert main(["run", str(cfg)]) == 0
    out = tmp_path / "out"
    names = sorted(p.name for p in out.iterdir())
    stem = "frequency_trunk_subject_independent"
    assert names == [f"model_{stem}.npz", f"report_{stem}.json", f"roc_{stem}.csv"]
    first = (out / f"report_{stem}.json").read_bytes()
    assert main(["run", str(cfg)]) == 0
    assert (out / f"report_{stem}.json").read_bytes() == first
    assert capsys.readouterr().out.strip().endswith(f"report_{stem}.json")


def test_run_overrides(tmp_path):
    cfg = _write_config(tmp_path)
    assert main(["run", str(cfg), "--set", "features.sensors=[\"ankle\"]", "--out", str(tmp_path / "o2")]) == 0
    report = json.loads((tmp_path / "o2" / "report_frequency_ankle_subject_independent.json").read_text())
    assert report["config"]["features"]["sensors"] == ["ankle"]


def test_run_unknown_group_fails_before_compute(tmp_path, capsys):
    cfg = _write_config(tmp_path, features={"group": "wavelet"})
    assert main(["run", str(cfg)]) == 1
    assert "features/group" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


@pytest.mark.slow
def test_run_grid(tmp_path):
    cfg = _write_config(tmp_path)
    assert main(["run", str(cfg), "--grid", "--jobs", "2"]) == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "out" / "summary.csv").read_text())))
    assert list(rows[0]) == ["experiment", "mode", "auc", "sensitivity", "specificity"]
    for mode in ("subject_independent", "subject_dependent"):
        assert len([r for r in rows if r["mode"] == mode]) == 13
    assert len(list((tmp_path / "out").glob("report_*.json"))) == 26


def test_help_exits_zero():
    r = subprocess.run([sys.executable, "-m", "fogrnn", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "featurize" in r.stdout


def test_invalid_flag_usage_on_stderr():
    r = subprocess.run([sys.executable, "-m", "fogrnn", "featurize", "--bogus"], capture_output=True, text=True)
    assert r.returncode != 0 and "usage" in r.stderr
