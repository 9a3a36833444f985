from __future__ import annotations

import hashlib
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from conftest import DEMO_MODEL, TRANSFORMER_TABLE, TRANSFORMERS
from hccmetrics import synthetic
from hccmetrics.cli import main


def run(*argv: str) -> int:
    return main([str(a) for a in argv])


def tree_digest(root: Path) -> dict[str, str]:
    return {p.relative_to(root).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(root.rglob("*")) if p.is_file()}


# -- analyze ---------------------------------------------------------------------


def test_analyze_fixture(tmp_path):
    assert run("analyze", TRANSFORMERS, "--out", tmp_path) == 0
    lines = (tmp_path / "metrics.csv").read_text().splitlines()
    assert lines[0] == "name,wmc,dit,lcom,iwmc,hcc"
    rows = {ln.split(",")[0]: ln.split(",")[1:] for ln in lines[1:]}
    assert len(rows) == 4
    for name, want in TRANSFORMER_TABLE.items():
        wmc, dit, lcom, iwmc, hcc = rows[name]
        assert (int(wmc), int(dit), float(lcom), int(iwmc), int(hcc)) == (want["wmc"], want["dit"], want["lcom"], want["iwmc"], want["hcc"])
    corpus = json.loads((tmp_path / "corpus.json").read_text())
    assert len(corpus) == 4


def test_analyze_parallel_same_output(tmp_path):
    src = tmp_path / "src"
    for f in synthetic.random_hierarchy(12, n_classes=15):
        (src / f.path).parent.mkdir(parents=True, exist_ok=True)
        (src / f.path).write_text(f.content)
    assert run("analyze", src, "--out", tmp_path / "a") == 0
    assert run("analyze", src, "--out", tmp_path / "b", "--jobs", "3") == 0
    assert tree_digest(tmp_path / "a") == tree_digest(tmp_path / "b")


def test_analyze_empty_dir(tmp_path, caplog):
    (tmp_path / "empty").mkdir()
    with caplog.at_level("WARNING"):
        assert run("analyze", tmp_path / "empty", "--out", tmp_path / "out") == 0
    assert (tmp_path / "out" / "metrics.csv").read_text() == "name,wmc,dit,lcom,iwmc,hcc\n"
    assert any("no .java files" in r.message for r in caplog.records)


def test_analyze_malformed_file(tmp_path, capsys):
    src = tmp_path / "src"
    shutil.copytree(TRANSFORMERS, src)
    (src / "Broken.java").write_text("class Broken {\n  void m() {\n    if (x { }\n  }\n}\n")
    assert run("analyze", src, "--out", tmp_path / "out") == 2
    err = capsys.readouterr().err
    assert "Broken.java:3:" in err
    assert not (tmp_path / "out" / "metrics.csv").exists()


def test_analyze_missing_dir(tmp_path):
    assert run("analyze", tmp_path / "nope", "--out", tmp_path / "out") == 2


# -- ingest ----------------------------------------------------------------------


def test_ingest(tmp_path):
    synthetic.write_rows_csv(synthetic.study_rows("opposite", 300, 1), tmp_path / "a.csv")
    synthetic.write_rows_csv(synthetic.study_rows("lcom-only", 200, 2), tmp_path / "b.csv", with_hcc=False)
    assert run("ingest", tmp_path / "a.csv", tmp_path / "b.csv", "--out", tmp_path / "out") == 0
    stages = json.loads((tmp_path / "out" / "stages.json").read_text())
    samples = (tmp_path / "out" / "samples.csv").read_text().splitlines()
    assert samples[0] == "name,wmc,iwmc,hcc,lcom,dit,bug"
    assert stages["remaining"] == len(samples) - 1
    assert stages["remaining"] + stages["removed_no_inheritance"] + stages["removed_unlabeled"] == 500


def test_ingest_mapping(tmp_path):
    (tmp_path / "d.csv").write_text("class,wmc,dit,lcom,iwmc,bugs\nA,1,2,0.5,2,3\nB,2,2,0.1,1,0\n")
    assert run("ingest", tmp_path / "d.csv", "--map", "name=class,bug=bugs", "--out", tmp_path / "o") == 0
    assert (tmp_path / "o" / "samples.csv").read_text().splitlines()[1:] == ["A,1,2,3,0.5000,2,1", "B,2,1,3,0.1000,2,0"]


def test_ingest_identity_violation(tmp_path):
    (tmp_path / "d.csv").write_text("name,wmc,dit,lcom,iwmc,hcc,bug\nReplace,19,4,0.7777,21,31,1\nOk,1,2,0.5,1,2,0\n")
    assert run("ingest", tmp_path / "d.csv", "--out", tmp_path / "o") == 2
    assert run("ingest", tmp_path / "d.csv", "--on-violation", "drop", "--out", tmp_path / "o") == 0


def test_ingest_everything_filtered_is_data_error(tmp_path):
    (tmp_path / "d.csv").write_text("name,wmc,dit,lcom,iwmc,bug\nA,1,1,0.5,0,1\n")
    assert run("ingest", tmp_path / "d.csv", "--out", tmp_path / "o") == 1


# -- study -----------------------------------------------------------------------


@pytest.fixture
def two_datasets(tmp_path):
    a, b = tmp_path / "opposite.csv", tmp_path / "control.csv"
    synthetic.write_rows_csv(synthetic.study_rows("opposite", 400, 1), a)
    synthetic.write_rows_csv(synthetic.study_rows("lcom-only", 400, 2), b)
    return a, b


def test_study_two_datasets(tmp_path, two_datasets):
    out = tmp_path / "bundle"
    assert run("study", *two_datasets, "--out", out, "--iterations", "500") == 0
    report = json.loads((out / "report.json").read_text())
    assert [s["dataset"] for s in report["studies"]] == ["opposite", "control", "unified"]
    unified = report["studies"][2]
    assert unified["rows_in"] == 800
    for name in ("opposite", "control", "unified"):
        files = {p.name for p in (out / name).iterdir()}
        assert {"samples.csv", "stages.json", "correlation.csv", "model_R1.json", "model_R2.json"} <= files
        assert {f"density_{f}.csv" for f in ("wmc", "iwmc", "hcc", "lcom", "dit")} <= files
    md = (out / "report.md").read_text()
    assert "| Precision |" in md and "| Recall |" in md and "| Accuracy |" in md
    assert "opposite faulty" in md and "unified non-faulty" in md


def test_study_single_dataset(tmp_path, two_datasets):
    out = tmp_path / "bundle"
    assert run("study", two_datasets[0], "--out", out, "--iterations", "200") == 0
    report = json.loads((out / "report.json").read_text())
    assert [s["dataset"] for s in report["studies"]] == ["opposite"]
    assert not (out / "unified").exists()


def test_study_rerun_byte_identical(tmp_path, two_datasets):
    for name in ("r1", "r2"):
        assert run("study", *two_datasets, "--out", tmp_path / name, "--iterations", "300", "--seed", "7") == 0
    assert tree_digest(tmp_path / "r1") == tree_digest(tmp_path / "r2")


def test_study_floats_fixed_precision(tmp_path, two_datasets):
    out = tmp_path / "bundle"
    assert run("study", two_datasets[0], "--out", out, "--iterations", "200") == 0

    def walk(v):
        if isinstance(v, float):
            assert round(v, 4) == v
        elif isinstance(v, dict):
            for x in v.values():
                walk(x)
        elif isinstance(v, list):
            for x in v:
                walk(x)

    walk(json.loads((out / "report.json").read_text()))


def test_study_balance_flag(tmp_path, two_datasets):
    out = tmp_path / "bundle"
    assert run("study", two_datasets[0], "--out", out, "--balance", "--iterations", "200") == 0
    s = json.loads((out / "report.json").read_text())["studies"][0]
    assert s["split"]["train"] + s["split"]["test"] == 2 * min(s["summary"]["faulty"], s["summary"]["non_faulty"])


def test_study_single_label_is_data_error(tmp_path):
    p = tmp_path / "allgood.csv"
    p.write_text("name,wmc,dit,lcom,iwmc,bug\n" + "".join(f"C{k},{k + 1},2,0.5,{k % 3 + 1},0\n" for k in range(20)))
    assert run("study", p, "--out", tmp_path / "o") == 1


def test_study_bad_fraction(tmp_path, two_datasets):
    assert run("study", two_datasets[0], "--train-fraction", "1.5", "--out", tmp_path / "o") == 2


# -- predict ---------------------------------------------------------------------


def _demo_expected(row: dict[str, float]) -> float:
    # recompute the decision value by hand from the frozen model file
    model = json.loads(DEMO_MODEL.read_text())
    total = model["bias"]
    for f, w, mu, sd in zip(model["features"], model["weights"], model["scaler"]["means"], model["scaler"]["stds"]):
        total += w * (row[f] - mu) / sd
    return total


def test_predict_order_details(tmp_path, capsys):
    assert run("analyze", TRANSFORMERS, "--out", tmp_path) == 0
    capsys.readouterr()
    assert run("predict", DEMO_MODEL, tmp_path / "metrics.csv") == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "name,prediction,decision_value"
    rows = {ln.split(",")[0]: ln.split(",")[1:] for ln in lines[1:]}
    pred, value = rows["OrderDetailsTransformer"]
    expected = _demo_expected({"wmc": 1, "iwmc": 3, "hcc": 4, "lcom": 1.0, "dit": 4})
    assert value == f"{expected:.4f}"
    assert pred == str(int(expected > 0))
    assert value == "0.5881" and pred == "1"


def test_predict_to_file(tmp_path):
    assert run("analyze", TRANSFORMERS, "--out", tmp_path) == 0
    assert run("predict", DEMO_MODEL, tmp_path / "metrics.csv", "--out", tmp_path / "p.csv") == 0
    assert len((tmp_path / "p.csv").read_text().splitlines()) == 5


def test_predict_empty_csv(tmp_path, capsys):
    (tmp_path / "e.csv").write_text("")
    assert run("predict", DEMO_MODEL, tmp_path / "e.csv") == 0
    assert capsys.readouterr().out == ""


def test_predict_header_only(tmp_path, capsys):
    (tmp_path / "h.csv").write_text("name,wmc,dit,lcom,iwmc,hcc\n")
    assert run("predict", DEMO_MODEL, tmp_path / "h.csv") == 0
    assert capsys.readouterr().out == "name,prediction,decision_value\n"


def test_predict_missing_dit(tmp_path, capsys):
    (tmp_path / "m.csv").write_text("name,wmc,lcom,iwmc,hcc\nA,1,1.0,3,4\n")
    assert run("predict", DEMO_MODEL, tmp_path / "m.csv") == 2
    assert "dit" in capsys.readouterr().err


# -- misc ------------------------------------------------------------------------


def test_usage_error_exit_code():
    assert run("frobnicate") == 2
    assert run() == 2


def test_help_exit_zero(capsys):
    assert run("--help") == 0
    assert "analyze" in capsys.readouterr().out


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "hccmetrics.cli", "analyze", str(TRANSFORMERS), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "metrics.csv").exists()


def test_synth(tmp_path):
    assert run("synth", "opposite", "--n", "50", "--out", tmp_path / "s.csv", "--no-hcc") == 0
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "name,wmc,dit,lcom,iwmc,bug" and len(lines) == 51
