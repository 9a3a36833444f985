"""Command-line front end.

Exit codes: 0 success, 1 runtime/data error, 2 input/usage error (bad
arguments, unreadable or malformed inputs, representation mismatch).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np

from . import dataset as ds
from . import metrics, parser, predictor, synthetic
from .errors import (
    CellTypeError,
    DuplicateClassError,
    HccError,
    IdentityViolationError,
    MissingColumnError,
    ParseError,
    RepresentationMismatchError,
    SourceEncodingError,
)
from .study import StudyConfig, StudyError, run_study

log = logging.getLogger("hccmetrics")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INPUT = 2

# errors caused by what the user handed us, as opposed to what the data did
INPUT_ERRORS = (
    ParseError,
    SourceEncodingError,
    DuplicateClassError,
    MissingColumnError,
    CellTypeError,
    IdentityViolationError,
    RepresentationMismatchError,
    FileNotFoundError,
    IsADirectoryError,
    NotADirectoryError,
    PermissionError,
)


def _parse_one(path: Path) -> list[parser.ClassDecl] | Exception:
    # failures are returned, not raised, so every bad file gets reported
    try:
        return parser.parse_file(parser.load_source(path))
    except (ParseError, SourceEncodingError, ValueError) as exc:
        return exc


def cmd_analyze(args: argparse.Namespace) -> int:
    root = Path(args.source_dir)
    if not root.is_dir():
        raise NotADirectoryError(f"{root}: not a directory")
    paths = list(parser.iter_source_files(root, args.suffix))
    if args.jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_parse_one, paths))
    else:
        results = [_parse_one(p) for p in paths]

    failures = [r for r in results if isinstance(r, Exception)]
    if failures:
        for exc in failures:
            print(f"error: {exc}", file=sys.stderr)
        print(f"{len(failures)} of {len(paths)} file(s) failed to parse", file=sys.stderr)
        return EXIT_INPUT

    classes = [c for r in results for c in r]
    corpus = parser.merge_classes(classes)
    if not paths:
        log.warning("no %s files under %s; writing an empty metrics table", args.suffix, root)
    records = metrics.compute_all(corpus)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "metrics.csv").open("w", newline="", encoding="utf-8") as fh:
        metrics.write_metrics_csv(records, fh)
    parser.dump_corpus(corpus, out / "corpus.json")
    print(f"{len(records)} classes from {len(paths)} file(s) -> {out / 'metrics.csv'}", file=sys.stderr)
    return EXIT_OK


def _load_datasets(paths: Sequence[str], mapping: dict[str, str], on_violation: str) -> list[tuple[str, list[ds.RawRow]]]:
    return [(Path(p).stem, ds.read_dataset(p, mapping, on_violation=on_violation)) for p in paths]


def cmd_ingest(args: argparse.Namespace) -> int:
    loaded = _load_datasets(args.datasets, ds.parse_mapping(args.map), args.on_violation)
    rows: list[ds.RawRow] = []
    for _, r in loaded:
        rows = ds.merge_datasets(rows, r)
    result = ds.preprocess(rows)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "samples.csv").open("w", newline="", encoding="utf-8") as fh:
        ds.write_samples_csv(result.samples, fh)
    with (out / "stages.json").open("w", encoding="utf-8") as fh:
        ds.write_stage_report(result, fh)
    summary = ds.summarize(result.samples)
    print(
        f"{summary.total} samples ({summary.faulty} faulty, {summary.faulty_pct:.2f}%) -> {out / 'samples.csv'}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_study(args: argparse.Namespace) -> int:
    if not 0.0 < args.train_fraction < 1.0:
        raise argparse.ArgumentTypeError("--train-fraction must lie strictly between 0 and 1")
    if args.c <= 0:
        raise argparse.ArgumentTypeError("--c must be positive")
    loaded = _load_datasets(args.datasets, ds.parse_mapping(args.map), args.on_violation)
    config = StudyConfig(
        seed=args.seed,
        train_fraction=args.train_fraction,
        c=args.c,
        balance=args.balance,
        iterations=args.iterations,
        grid_size=args.grid_size,
    )
    report = run_study(loaded, config, args.out)
    for s in report["studies"]:
        r1, r2 = s["representations"]["R1"]["accuracy"], s["representations"]["R2"]["accuracy"]
        print(f"{s['dataset']}: accuracy R1={r1:.4f} R2={r2:.4f}", file=sys.stderr)
    return EXIT_OK


def _fmt(v: float) -> str:
    return f"{round(float(v), 4) + 0.0:.4f}"


def cmd_predict(args: argparse.Namespace) -> int:
    model = predictor.LinearSvmModel.load(args.model)
    if model.scaler is None:
        raise RepresentationMismatchError(f"{args.model}: model has no scaler parameters")
    mapping = ds.parse_mapping(args.map)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        with open(args.metrics_csv, newline="", encoding="utf-8-sig") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                return EXIT_OK  # nothing at all in the file, nothing to say
            header = {h.strip().lower(): h for h in reader.fieldnames}
            columns = {}
            for feature in ("name", *model.feature_names):
                source = mapping.get(feature, feature).lower()
                if source not in header:
                    raise RepresentationMismatchError(
                        f"{args.metrics_csv}: model {model.representation} needs column {source!r}, "
                        f"found {sorted(header)}"
                    )
                columns[feature] = header[source]
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(["name", "prediction", "decision_value"])
            for lineno, row in enumerate(reader, start=2):
                try:
                    x = np.array([float(row[columns[f]]) for f in model.feature_names])
                except (TypeError, ValueError) as exc:
                    raise CellTypeError(lineno, "feature", str(exc), "number") from exc
                z = model.scaler.transform(x[None, :])
                value = float(model.decision_function(z)[0])
                writer.writerow([row[columns["name"]], int(model.predict(z)[0]), _fmt(value)])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    rows = synthetic.study_rows(args.kind, args.n, args.seed)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    synthetic.write_rows_csv(rows, args.out, with_iwmc=not args.no_iwmc, with_hcc=not args.no_hcc)
    print(f"{len(rows)} rows -> {args.out}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hccmetrics", description="OO complexity metrics and defect-prediction study.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="compute class metrics from a source tree")
    p.add_argument("source_dir")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--suffix", default=".java", help="source file suffix (default: .java)")
    p.add_argument("--jobs", type=int, default=1, help="parse files in N processes")
    p.set_defaults(func=cmd_analyze)

    def dataset_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("datasets", nargs="+", help="metrics CSV file(s)")
        p.add_argument("--map", default=None, metavar="col=name,...", help="canonical=column renames, e.g. bug=bugs")
        p.add_argument(
            "--on-violation",
            choices=("raise", "drop"),
            default="raise",
            help="rows whose hcc != wmc + iwmc: fail (default) or drop with a warning",
        )
        p.add_argument("--out", default="out", help="output directory (default: out)")

    p = sub.add_parser("ingest", help="merge and preprocess datasets into labeled samples")
    dataset_args(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("study", help="run the full R1 vs R2 study and write a report bundle")
    dataset_args(p)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--c", type=float, default=1.0, help="SVM regularization constant C")
    p.add_argument("--balance", action="store_true", help="downsample the majority class before splitting")
    p.add_argument("--iterations", type=int, default=5000, help="subgradient iterations")
    p.add_argument("--grid-size", type=int, default=128, help="density grid points")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("predict", help="apply a saved model to a metrics CSV")
    p.add_argument("model", help="model JSON written by 'study'")
    p.add_argument("metrics_csv")
    p.add_argument("--map", default=None, metavar="col=name,...")
    p.add_argument("--out", default=None, help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("synth", help="write a synthetic labeled dataset")
    p.add_argument("kind", choices=synthetic.STUDY_KINDS)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--no-iwmc", action="store_true", help="omit the iwmc column")
    p.add_argument("--no-hcc", action="store_true", help="omit the hcc column")
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except StudyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT if isinstance(exc.cause, INPUT_ERRORS) else EXIT_RUNTIME
    except (*INPUT_ERRORS, argparse.ArgumentTypeError, ValueError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (HccError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
