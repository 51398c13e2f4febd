"""Command-line front end: ``fogrnn synth | featurize | run``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import ingest
from ._io import atomic_write_text
from .config import ConfigError, load_config
from .features import GROUPS, build_matrix
from .ingest import SENSORS, DaphnetFormatError, SynthSpec
from .windowing import LABEL_RULES, WindowSpec, segment_all

log = logging.getLogger("fogrnn")


def _span(text):
    try:
        start, dur = text.split(":")
        start, dur = float(start), float(dur)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:DURATION in seconds, got {text!r}") from None
    if start < 0 or dur <= 0:
        raise argparse.ArgumentTypeError(f"bad span {text!r}")
    return start, dur


def _sensors(text):
    if text == "all":
        return "all"
    parts = [p.strip() for p in text.split(",") if p.strip()]
    bad = [p for p in parts if p not in SENSORS]
    if bad or not parts:
        raise argparse.ArgumentTypeError(f"sensors must be 'all' or a comma list of {','.join(SENSORS)}")
    return parts


def _override(text):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("expected KEY=VALUE")
    try:
        value = json.loads(value)
    except json.JSONDecodeError:
        pass
    return key, value


def build_parser():
    p = argparse.ArgumentParser(prog="fogrnn", description="Freezing-of-gait detection pipeline.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write synthetic Daphnet-format recordings")
    s.add_argument("--duration", type=float, help="seconds (default 240 with --patients)")
    s.add_argument("--freeze", type=_span, action="append", default=[], metavar="START:DUR")
    s.add_argument("--exclude", type=_span, action="append", default=[], metavar="START:DUR",
                   help="span written with annotation 0")
    s.add_argument("--noise", type=float, default=30.0, help="noise std in milli-g")
    s.add_argument("--walk-hz", type=float, default=2.0)
    s.add_argument("--freeze-hz", type=float, default=6.0)
    s.add_argument("--patient-id", type=int, default=1)
    s.add_argument("--patients", type=int, help="write a cohort of N patients into the -o directory")
    s.add_argument("--n-freezes", type=int, default=4, help="episodes per patient with --patients")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("-o", "--output", required=True)

    f = sub.add_parser("featurize", help="window recordings and write a feature matrix CSV")
    f.add_argument("inputs", nargs="+", help="Daphnet files or directories")
    f.add_argument("-o", "--output", required=True)
    f.add_argument("--group", choices=GROUPS, default="both")
    f.add_argument("--sensors", type=_sensors, default="all", help="'all' or e.g. ankle,trunk")
    f.add_argument("--window", type=int, default=256, help="window length in samples")
    f.add_argument("--stride", type=int, default=32, help="window stride in samples")
    f.add_argument("--label-rule", choices=LABEL_RULES, default="majority")
    f.add_argument("--with-meta", action="store_true", help="prepend patient/segment/start columns")

    r = sub.add_parser("run", help="run an experiment (or the 13-experiment grid) from a JSON config")
    r.add_argument("config")
    r.add_argument("--grid", action="store_true", help="run all 13 feature configs under both split modes")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--out", help="output directory (overrides output_dir)")
    r.add_argument("--seed", type=int)
    r.add_argument("--set", type=_override, action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key, e.g. model.epochs=20")
    return p


def cmd_synth(args, parser):
    out = Path(args.output)
    if args.patients is not None:
        if args.patients < 1:
            parser.error("--patients must be >= 1")
        duration = 240.0 if args.duration is None else args.duration
        if duration <= 40:
            parser.error("--duration must exceed 40 s for a cohort")
        cohort = ingest.synthetic_cohort(args.patients, args.seed, duration, args.n_freezes, args.noise)
        for pid, recs in cohort.items():
            for rec in recs:
                atomic_write_text(out / f"{rec.name}.txt", ingest.serialize_daphnet(rec))
        log.info("wrote %d recordings to %s", len(cohort), out)
        return 0
    if args.duration is None or args.duration <= 0:
        parser.error("--duration must be a positive number of seconds")
    spec = SynthSpec(
        duration_s=args.duration,
        freezes=tuple(args.freeze),
        excluded=tuple(args.exclude),
        noise=args.noise,
        walk_hz=args.walk_hz,
        freeze_hz=args.freeze_hz,
    )
    rec = ingest.generate_synthetic(spec, args.seed, patient_id=args.patient_id)
    atomic_write_text(out, ingest.serialize_daphnet(rec))
    return 0


def _collect_inputs(inputs):
    files = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            found = sorted(q for q in p.rglob("*.txt"))
            if not found:
                raise FileNotFoundError(f"{p}: no .txt recordings")
            files.extend(found)
        elif p.is_file():
            files.append(p)
        else:
            raise FileNotFoundError(f"{p}: no such file or directory")
    return files


def cmd_featurize(args, parser):
    try:
        spec = WindowSpec(args.window, args.stride, args.label_rule)
    except ValueError as e:
        parser.error(str(e))
    files = _collect_inputs(args.inputs)
    recs = [ingest.prepare(ingest.read_daphnet(f)) for f in files]
    windows = segment_all(recs, spec)
    if not windows:
        raise ValueError("inputs yield no complete window")
    matrix = build_matrix(windows, args.group, args.sensors, stride=spec.stride_samples)
    atomic_write_text(args.output, matrix.to_csv(with_meta=args.with_meta))
    log.info("wrote %d x %d matrix to %s", len(matrix), len(matrix.columns), args.output)
    return 0


def cmd_run(args, parser):
    from .eval import harness

    overrides = dict(args.set)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["output_dir"] = args.out
    config = load_config(args.config, overrides)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    if args.grid:
        reports = harness.run_grid(config, jobs=args.jobs)
        print(harness.summary_csv(reports), end="")
        return 0
    report, artifacts = harness.run_experiment(config)
    paths = harness.write_outputs(report, artifacts, config.output_dir)
    print(paths["report"])
    return 0


COMMANDS = {"synth": cmd_synth, "featurize": cmd_featurize, "run": cmd_run}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, parser)
    except (ConfigError, DaphnetFormatError, FileNotFoundError, ValueError, OSError) as e:
        print(f"fogrnn {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
