"""Loading, merging and preprocessing of labeled metric datasets.

Input files are Promise-style CSVs: one row per class with metric columns and
a bug count. Column names vary between dataset variants, so callers pass a
mapping from canonical names to the names used in the file.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, TextIO

from .errors import CellTypeError, EmptyDatasetError, IdentityViolationError, MissingColumnError

log = logging.getLogger(__name__)

FEATURES = ("wmc", "iwmc", "hcc", "lcom", "dit")
DEFAULT_COLUMNS = {
    "name": "name",
    "wmc": "wmc",
    "dit": "dit",
    "lcom": "lcom",
    "bug": "bug",
    "iwmc": "iwmc",
    "hcc": "hcc",
}
REQUIRED = ("name", "wmc", "dit", "lcom")
SAMPLES_HEADER = ("name", "wmc", "iwmc", "hcc", "lcom", "dit", "bug")


@dataclass(frozen=True)
class RawRow:
    name: str
    wmc: int
    dit: int
    lcom: float
    iwmc: int | None = None
    hcc: int | None = None
    bug: int | None = None
    source: str = ""


@dataclass(frozen=True)
class LabeledSample:
    name: str
    features: Mapping[str, float]
    label: int
    source: str = ""

    def vector(self, names: Iterable[str]) -> list[float]:
        return [float(self.features[n]) for n in names]

    def as_row(self) -> RawRow:
        f = self.features
        return RawRow(
            name=self.name,
            wmc=int(f["wmc"]),
            dit=int(f["dit"]),
            lcom=float(f["lcom"]),
            iwmc=int(f["iwmc"]),
            hcc=int(f["hcc"]),
            bug=self.label,
            source=self.source,
        )


@dataclass(frozen=True)
class DatasetSummary:
    total: int
    faulty: int
    non_faulty: int
    faulty_pct: float
    non_faulty_pct: float


@dataclass(frozen=True)
class PreprocessConfig:
    drop_no_inheritance: bool = True
    drop_unlabeled: bool = True


@dataclass(frozen=True)
class PreprocessResult:
    samples: list[LabeledSample]
    removed_no_inheritance: int
    removed_unlabeled: int

    @property
    def remaining(self) -> int:
        return len(self.samples)

    def stage_report(self) -> dict[str, int]:
        return {
            "removed_no_inheritance": self.removed_no_inheritance,
            "removed_unlabeled": self.removed_unlabeled,
            "remaining": self.remaining,
        }


def parse_mapping(spec: str | None) -> dict[str, str]:
    """Parse ``"bug=bugs,name=class"`` into a full column mapping."""
    mapping = dict(DEFAULT_COLUMNS)
    if not spec:
        return mapping
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        key, sep, col = item.partition("=")
        key, col = key.strip(), col.strip()
        if not sep or not col:
            raise ValueError(f"bad column mapping entry {item!r}, expected canonical=column")
        if key not in DEFAULT_COLUMNS:
            raise ValueError(f"unknown canonical column {key!r}; known: {', '.join(DEFAULT_COLUMNS)}")
        mapping[key] = col
    return mapping


def _int_cell(raw: str, row: int, column: str, optional: bool = False) -> int | None:
    text = raw.strip()
    if not text:
        if optional:
            return None
        raise CellTypeError(row, column, raw, "an integer")
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise CellTypeError(row, column, raw, "an integer") from None
    if not math.isfinite(value) or value != int(value):
        raise CellTypeError(row, column, raw, "an integer")
    return int(value)


def _float_cell(raw: str, row: int, column: str) -> float:
    try:
        value = float(raw.strip())
    except ValueError:
        raise CellTypeError(row, column, raw, "a number") from None
    if not math.isfinite(value):
        raise CellTypeError(row, column, raw, "a finite number")
    return value


def read_rows(
    stream: TextIO,
    column_mapping: Mapping[str, str] | None = None,
    source: str = "",
    on_violation: str = "raise",
) -> list[RawRow]:
    """Read typed rows from an open CSV stream.

    Exactly one of iwmc/hcc may be missing per row; it is derived from
    ``hcc = wmc + iwmc``. Rows where both are given and disagree are
    collected and either raised together (``on_violation="raise"``) or
    logged and dropped (``"drop"``).
    """
    mapping = dict(DEFAULT_COLUMNS)
    mapping.update(column_mapping or {})
    reader = csv.DictReader(stream)
    header = reader.fieldnames or []
    missing = [f"{k} (column {mapping[k]!r})" for k in REQUIRED if mapping[k] not in header]
    has_iwmc = mapping["iwmc"] in header
    has_hcc = mapping["hcc"] in header
    if not (has_iwmc or has_hcc):
        missing.append(f"iwmc or hcc (columns {mapping['iwmc']!r}/{mapping['hcc']!r})")
    if missing:
        raise MissingColumnError(f"{source or 'dataset'}: missing required columns: {', '.join(missing)}")
    has_bug = mapping["bug"] in header

    rows: list[RawRow] = []
    violations = []
    # row numbers count data rows from 1, matching spreadsheet lines minus the header
    for idx, rec in enumerate(reader, start=1):
        w = _int_cell(rec[mapping["wmc"]] or "", idx, mapping["wmc"])
        d = _int_cell(rec[mapping["dit"]] or "", idx, mapping["dit"])
        lc = _float_cell(rec[mapping["lcom"]] or "", idx, mapping["lcom"])
        iw = _int_cell(rec[mapping["iwmc"]] or "", idx, mapping["iwmc"], optional=True) if has_iwmc else None
        h = _int_cell(rec[mapping["hcc"]] or "", idx, mapping["hcc"], optional=True) if has_hcc else None
        bug = _int_cell(rec[mapping["bug"]] or "", idx, mapping["bug"], optional=True) if has_bug else None
        if bug is not None and bug < 0:
            raise CellTypeError(idx, mapping["bug"], rec[mapping["bug"]], "a non-negative integer")
        name = (rec[mapping["name"]] or "").strip()
        if iw is None and h is None:
            raise CellTypeError(idx, f"{mapping['iwmc']}/{mapping['hcc']}", "", "present in at least one column")
        if iw is None:
            iw = h - w
        elif h is None:
            h = w + iw
        elif h != w + iw:
            violations.append((idx, name, w, iw, h))
            continue
        rows.append(RawRow(name, w, d, lc, iw, h, bug, source))

    if violations:
        if on_violation == "raise":
            raise IdentityViolationError(violations)
        for idx, name, w, iw, h in violations:
            log.warning("%s row %d (%s): dropped, hcc=%d != wmc=%d + iwmc=%d", source, idx, name, h, w, iw)
    return rows


def read_dataset(
    path: str | Path,
    column_mapping: Mapping[str, str] | None = None,
    source: str | None = None,
    on_violation: str = "raise",
) -> list[RawRow]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        return read_rows(fh, column_mapping, source if source is not None else path.stem, on_violation)


def merge_datasets(a: Iterable[RawRow], b: Iterable[RawRow], tag_a: str | None = None, tag_b: str | None = None) -> list[RawRow]:
    """Concatenate two datasets. Optional tags override each row's provenance."""
    out = [replace(r, source=tag_a) if tag_a is not None else r for r in a]
    out.extend(replace(r, source=tag_b) if tag_b is not None else r for r in b)
    return out


def preprocess(rows: Iterable[RawRow], config: PreprocessConfig | None = None) -> PreprocessResult:
    config = config or PreprocessConfig()
    rows = list(rows)

    stage1 = [r for r in rows if r.hcc != r.wmc] if config.drop_no_inheritance else rows
    stage2 = [r for r in stage1 if r.bug is not None] if config.drop_unlabeled else stage1

    samples = []
    for r in stage2:
        label = min(r.bug, 1) if r.bug is not None else 0
        features = {"wmc": float(r.wmc), "iwmc": float(r.iwmc), "hcc": float(r.hcc), "lcom": float(r.lcom), "dit": float(r.dit)}
        samples.append(LabeledSample(r.name, features, label, r.source))
    if not samples:
        raise EmptyDatasetError(
            f"no rows left after preprocessing ({len(rows)} in, "
            f"{len(rows) - len(stage1)} without inheritance, {len(stage1) - len(stage2)} unlabeled)"
        )
    return PreprocessResult(samples, len(rows) - len(stage1), len(stage1) - len(stage2))


def summarize(samples: Iterable[LabeledSample]) -> DatasetSummary:
    samples = list(samples)
    total = len(samples)
    if not total:
        raise EmptyDatasetError("cannot summarize an empty dataset")
    faulty = sum(s.label for s in samples)
    return DatasetSummary(
        total=total,
        faulty=faulty,
        non_faulty=total - faulty,
        faulty_pct=round(100.0 * faulty / total, 2),
        non_faulty_pct=round(100.0 * (total - faulty) / total, 2),
    )


def write_samples_csv(samples: Iterable[LabeledSample], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SAMPLES_HEADER)
    for s in samples:
        f = s.features
        writer.writerow([s.name, int(f["wmc"]), int(f["iwmc"]), int(f["hcc"]), f"{f['lcom']:.4f}", int(f["dit"]), s.label])


def write_stage_report(result: PreprocessResult, out: TextIO) -> None:
    json.dump(result.stage_report(), out, indent=2, sort_keys=True)
    out.write("\n")
