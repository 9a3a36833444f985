from __future__ import annotations

from pathlib import Path

import pytest

import hccmetrics

DATA = Path(hccmetrics.__file__).parent / "data"
TRANSFORMERS = DATA / "transformers"
DEMO_MODEL = DATA / "demo_model.json"

# reference metric values for the four transformer classes
TRANSFORMER_TABLE = {
    "OrderDetailsTransformer": {"hcc": 4, "lcom": 1.0, "dit": 4, "iwmc": 3, "wmc": 1},
    "OrderTransformer": {"hcc": 3, "lcom": 1.0, "dit": 3, "iwmc": 2, "wmc": 1},
    "CustomerTransformer": {"hcc": 2, "lcom": 1.0, "dit": 2, "iwmc": 1, "wmc": 1},
    "AddressTransformer": {"hcc": 1, "lcom": 1.0, "dit": 1, "iwmc": 0, "wmc": 1},
}


@pytest.fixture
def transformer_dir() -> Path:
    return TRANSFORMERS


@pytest.fixture
def transformer_corpus():
    from hccmetrics.parser import build_corpus, iter_source_files, load_source

    return build_corpus(load_source(p) for p in iter_source_files(TRANSFORMERS))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
