"""End-to-end defect-prediction study and its report bundle.

For every input dataset, and for the union of all inputs when there is more
than one, a study runs: preprocess -> summarize -> correlations -> per-label
densities -> R1 vs R2 comparison. Results land in an output directory::

    report.json              all numbers, floats fixed to 4 decimals
    report.md                human-readable tables
    <dataset>/samples.csv    preprocessed samples
    <dataset>/stages.json    rows removed per preprocessing stage
    <dataset>/correlation.csv
    <dataset>/density_<feature>.csv / .svg
    <dataset>/model_R1.json, model_R2.json

Nothing time- or host-dependent is written, so identical inputs and seed give
byte-identical bundles.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

from . import dataset as ds
from . import predictor as pr
from . import stats as st
from .errors import DegenerateColumnError, EmptyGroupError, HccError

log = logging.getLogger(__name__)

UNIFIED = "unified"


@dataclass(frozen=True)
class StudyConfig:
    seed: int = 1
    train_fraction: float = 0.7
    c: float = 1.0
    balance: bool = False
    iterations: int = 5000
    grid_size: int = 128


def fixed(obj, places: int = 4):
    """Round every float in a JSON-able structure to ``places`` decimals."""
    if isinstance(obj, float):
        if obj != obj or obj in (float("inf"), float("-inf")):
            return None
        return round(obj, places) + 0.0
    if isinstance(obj, dict):
        return {k: fixed(v, places) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [fixed(v, places) for v in obj]
    return obj


class StudyError(HccError):
    def __init__(self, dataset: str, cause: Exception):
        super().__init__(f"dataset {dataset!r}: {cause}")
        self.dataset = dataset
        self.cause = cause


def run_single(name: str, rows: Sequence[ds.RawRow], config: StudyConfig, out_dir: Path | None = None) -> dict:
    try:
        return _run_single(name, rows, config, out_dir)
    except HccError as exc:
        raise StudyError(name, exc) from exc


def _run_single(name: str, rows: Sequence[ds.RawRow], config: StudyConfig, out_dir: Path | None) -> dict:
    prep = ds.preprocess(rows)
    samples = prep.samples
    summary = ds.summarize(samples)
    corr = st.correlation_matrix(samples, ds.FEATURES)

    densities: dict[str, dict] = {}
    curves_by_feature = {}
    for feature in ds.FEATURES:
        try:
            curves = st.density_by_label(samples, feature, config.grid_size)
        except (EmptyGroupError, DegenerateColumnError) as exc:
            densities[feature] = {"error": str(exc)}
            continue
        curves_by_feature[feature] = curves
        densities[feature] = {
            c.group_label: {
                "n": c.n,
                "bandwidth": c.bandwidth,
                "share": c.weight,
                "integral": c.integral(),
                "peak_at": c.peak()[0],
                "peak": c.peak()[1],
                "peak_scaled": c.peak(scaled=True)[1],
            }
            for c in curves
        }

    comparison = pr.compare_representations(
        samples, config.seed, config.c, config.train_fraction, config.balance, config.iterations
    )
    result = {
        "dataset": name,
        "rows_in": len(rows),
        "stages": prep.stage_report(),
        "summary": asdict(summary),
        "correlation": {"features": corr.feature_names, "values": corr.values, "degenerate": corr.degenerate},
        "density": densities,
        "split": {"train": comparison.n_train, "test": comparison.n_test},
        "representations": {
            run.representation.name: {
                "features": list(run.representation.feature_names),
                "objective": run.model.objective,
                **run.report.to_dict(),
            }
            for run in (comparison.r1, comparison.r2)
        },
        "delta_r2_minus_r1": comparison.deltas(),
    }

    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        with (out_dir / "samples.csv").open("w", newline="", encoding="utf-8") as fh:
            ds.write_samples_csv(samples, fh)
        with (out_dir / "stages.json").open("w", encoding="utf-8") as fh:
            ds.write_stage_report(prep, fh)
        with (out_dir / "correlation.csv").open("w", newline="", encoding="utf-8") as fh:
            st.write_correlation_csv(corr, fh)
        for feature, curves in curves_by_feature.items():
            with (out_dir / f"density_{feature}.csv").open("w", newline="", encoding="utf-8") as fh:
                st.write_density_csv(curves, fh)
            (out_dir / f"density_{feature}.svg").write_text(st.density_svg(curves, feature), encoding="utf-8")
        for run in (comparison.r1, comparison.r2):
            (out_dir / f"model_{run.representation.name}.json").write_text(run.model.to_json(), encoding="utf-8")
    return result


def _unique_names(names: Sequence[str]) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for n in names:
        base = n or "dataset"
        k = seen.get(base, 0)
        seen[base] = k + 1
        out.append(base if k == 0 else f"{base}-{k + 1}")
    return out


def run_study(datasets: Sequence[tuple[str, Sequence[ds.RawRow]]], config: StudyConfig, out: str | Path | None = None) -> dict:
    """Run one study per dataset plus a unified study when given several."""
    out_path = Path(out) if out is not None else None
    names = _unique_names([n for n, _ in datasets])
    if len(names) > 1 and UNIFIED in names:
        raise ValueError(f"dataset name {UNIFIED!r} is reserved for the merged study")
    jobs = list(zip(names, (rows for _, rows in datasets)))
    if len(jobs) > 1:
        merged: list[ds.RawRow] = []
        for _, rows in jobs:
            merged = ds.merge_datasets(merged, rows)
        jobs.append((UNIFIED, merged))

    studies = []
    for name, rows in jobs:
        log.info("study %s: %d rows", name, len(rows))
        studies.append(run_single(name, rows, config, out_path / name if out_path else None))

    report = {"config": asdict(config), "studies": studies}
    report = fixed(report)
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)
        (out_path / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        (out_path / "report.md").write_text(markdown_report(report), encoding="utf-8")
    return report


def _fmt(v) -> str:
    return "n/a" if v is None else f"{v:.4f}"


def markdown_report(report: dict) -> str:
    cfg = report["config"]
    studies = report["studies"]
    lines = [
        "# Defect prediction study",
        "",
        f"seed={cfg['seed']}, train_fraction={cfg['train_fraction']}, C={cfg['c']}, "
        f"balance={'on' if cfg['balance'] else 'off'}, iterations={cfg['iterations']}",
        "",
        "## Datasets",
        "",
        "| Dataset | Rows in | Removed (no inheritance) | Removed (unlabeled) | Samples | Faulty | Non-faulty | Faulty % | Non-faulty % |",
        "|---|---|---|---|---|---|---|---|---|",
    ]
    for s in studies:
        st_, sm = s["stages"], s["summary"]
        lines.append(
            f"| {s['dataset']} | {s['rows_in']} | {st_['removed_no_inheritance']} | {st_['removed_unlabeled']} | "
            f"{sm['total']} | {sm['faulty']} | {sm['non_faulty']} | {sm['faulty_pct']:.2f} | {sm['non_faulty_pct']:.2f} |"
        )

    for rep in ("R1", "R2"):
        features = studies[0]["representations"][rep]["features"]
        lines += ["", f"## Classification scores, {rep} ({', '.join(f.upper() for f in features)})", ""]
        header = "| Evaluation criteria |" + "".join(f" {s['dataset']} faulty | {s['dataset']} non-faulty |" for s in studies)
        lines += [header, "|---|" + "---|---|" * len(studies)]
        for metric in ("precision", "recall"):
            row = f"| {metric.capitalize()} |"
            for s in studies:
                r = s["representations"][rep]
                row += f" {_fmt(r[metric]['faulty'])} | {_fmt(r[metric]['non_faulty'])} |"
            lines.append(row)
        row = "| Accuracy |"
        for s in studies:
            row += f" {_fmt(s['representations'][rep]['accuracy'])} | |"
        lines.append(row)

    lines += ["", "## R2 minus R1", "", "| Dataset | Accuracy | Precision (faulty) | Recall (faulty) | Precision (non-faulty) | Recall (non-faulty) |", "|---|---|---|---|---|---|"]
    for s in studies:
        d = s["delta_r2_minus_r1"]
        lines.append(
            f"| {s['dataset']} | {_fmt(d['accuracy'])} | {_fmt(d['precision']['faulty'])} | {_fmt(d['recall']['faulty'])} | "
            f"{_fmt(d['precision']['non_faulty'])} | {_fmt(d['recall']['non_faulty'])} |"
        )

    lines += ["", "## Pearson correlations", ""]
    for s in studies:
        c = s["correlation"]
        lines += [f"### {s['dataset']}", "", "| |" + "".join(f" {f} |" for f in c["features"]), "|---|" + "---|" * len(c["features"])]
        for f, row in zip(c["features"], c["values"]):
            lines.append(f"| {f} |" + "".join(" n/a |" if v is None else f" {v:.2f} |" for v in row))
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"
