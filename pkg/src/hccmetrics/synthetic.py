"""Seeded generators for synthetic source corpora and labeled datasets.

Used by the test-suite and by ``hccmetrics synth`` to produce reproducible
inputs without shipping any third-party data.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable

import numpy as np

from .dataset import RawRow
from .parser import SourceFile

# --------------------------------------------------------------------------
# Method bodies


class BodyGenerator:
    """Random statement lists drawn from the supported grammar.

    Bodies reference the class fields (bare and via ``this.``), declare
    locals that may shadow fields, and sprinkle decision keywords inside
    string literals and comments, where they must not be counted.
    """

    def __init__(self, rng: np.random.Generator, fields: list[str], max_depth: int = 3):
        self.rng = rng
        self.fields = fields or ["f0"]
        self.max_depth = max_depth
        self.counter = 0

    def _name(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def _atom(self) -> str:
        r = self.rng.random()
        if r < 0.35:
            return str(int(self.rng.integers(0, 100)))
        if r < 0.65:
            return str(self.rng.choice(self.fields))
        if r < 0.8:
            return f"this.{self.rng.choice(self.fields)}"
        if r < 0.9:
            return "p0"
        return f"helper({int(self.rng.integers(0, 9))})"

    def value(self, depth: int = 0) -> str:
        r = self.rng.random()
        if depth < 2 and r < 0.15:
            return f"({self.cond(depth + 1)} ? {self.value(depth + 1)} : {self.value(depth + 1)})"
        if depth < 2 and r < 0.45:
            op = self.rng.choice(["+", "-", "*", "%", "&", "|", "^"])
            return f"{self.value(depth + 1)} {op} {self.value(depth + 1)}"
        return self._atom()

    def cond(self, depth: int = 0) -> str:
        r = self.rng.random()
        if depth < 3 and r < 0.25:
            return f"{self.cond(depth + 1)} && {self.cond(depth + 1)}"
        if depth < 3 and r < 0.45:
            return f"({self.cond(depth + 1)} || {self.cond(depth + 1)})"
        if depth < 3 and r < 0.52:
            return f"!({self.cond(depth + 1)})"
        op = self.rng.choice(["<", ">", "<=", ">=", "==", "!="])
        return f"{self.value(depth + 1)} {op} {self.value(depth + 1)}"

    def block(self, depth: int, indent: str) -> str:
        n = int(self.rng.integers(0, 3)) if depth >= self.max_depth else int(self.rng.integers(1, 4))
        inner = indent + "    "
        return "{\n" + "".join(self.statement(depth + 1, inner) for _ in range(n)) + indent + "}"

    def statement(self, depth: int, indent: str) -> str:
        rng = self.rng
        simple = depth >= self.max_depth or rng.random() < 0.35
        if simple:
            r = rng.random()
            if r < 0.3:
                return f"{indent}int {self._name('v')} = {self.value()};\n"
            if r < 0.4:
                # shadows a field for the rest of the enclosing block
                return f"{indent}int {rng.choice(self.fields)} = {self.value()};\n"
            if r < 0.5:
                return f'{indent}log("if (a && b) || while for case catch ?:"); // if && || while\n'
            if r < 0.6:
                return f"{indent}/* for (;;) if x ? y : z */ p0++;\n"
            target = rng.choice(self.fields) if rng.random() < 0.5 else f"this.{rng.choice(self.fields)}"
            return f"{indent}{target} = {self.value()};\n"

        kind = rng.integers(0, 7)
        if kind == 0:
            s = f"{indent}if ({self.cond()}) {self.block(depth, indent)}"
            if rng.random() < 0.5:
                s += f" else {self.block(depth, indent)}"
            return s + "\n"
        if kind == 1:
            i = self._name("i")
            return f"{indent}for (int {i} = 0; {i} < {self.value()}; {i}++) {self.block(depth, indent)}\n"
        if kind == 2:
            return f"{indent}while ({self.cond()}) {self.block(depth, indent)}\n"
        if kind == 3:
            return f"{indent}do {self.block(depth, indent)} while ({self.cond()});\n"
        if kind == 4:
            inner = indent + "    "
            labels = sorted(set(int(x) for x in rng.integers(0, 20, size=int(rng.integers(1, 4)))))
            body = ""
            for lbl in labels:
                body += f"{inner}case {lbl}:\n{self.statement(depth + 1, inner + '    ')}{inner}    break;\n"
            if rng.random() < 0.6:
                body += f"{inner}default:\n{self.statement(depth + 1, inner + '    ')}"
            return f"{indent}switch ({self.value()}) {{\n{body}{indent}}}\n"
        if kind == 5:
            s = f"{indent}try {self.block(depth, indent)}"
            catches = int(rng.integers(1, 3))
            for k in range(catches):
                exc = "RuntimeException | Error" if k == 1 else "Exception"
                s += f" catch ({exc} {self._name('e')}) {self.block(depth, indent)}"
            if rng.random() < 0.4:
                s += f" finally {self.block(depth, indent)}"
            return s + "\n"
        return f"{indent}for (int {self._name('x')} : data) {self.block(depth, indent)}\n"

    def body(self) -> str:
        n = int(self.rng.integers(1, 5))
        return "".join(self.statement(0, "        ") for _ in range(n))


def method_source(rng: np.random.Generator, name: str, fields: list[str], max_depth: int = 3) -> str:
    body = BodyGenerator(rng, fields, max_depth).body()
    return f"    int {name}(int p0) {{\n{body}        return p0;\n    }}\n"


def class_source(rng: np.random.Generator, name: str, parent: str | None, n_methods: int, n_fields: int, package: str = "") -> str:
    fields = [f"f{i}" for i in range(n_fields)]
    lines = [f"package {package};\n\n" if package else ""]
    ext = f" extends {parent}" if parent else ""
    lines.append(f"public class {name}{ext} {{\n")
    lines.append("    protected int[] data;\n")
    for f in fields:
        lines.append(f"    private int {f};\n")
    for k in range(n_methods):
        lines.append(method_source(rng, f"m{k}", fields))
    lines.append("}\n")
    return "".join(lines)


def random_hierarchy(seed: int, n_classes: int | None = None, max_depth: int = 10) -> list[SourceFile]:
    """A random forest of classes, one file each, with inheritance depth <= max_depth.

    Some roots extend a class that is not in the corpus, to exercise
    external-parent handling.
    """
    rng = np.random.default_rng(seed)
    n = n_classes if n_classes is not None else int(rng.integers(1, 25))
    depth: dict[str, int] = {}
    files = []
    for k in range(n):
        name = f"C{k}"
        eligible = [c for c, d in depth.items() if d < max_depth]
        parent = None
        if eligible and rng.random() < 0.75:
            parent = str(rng.choice(eligible))
            depth[name] = depth[parent] + 1
        else:
            depth[name] = 1
            if rng.random() < 0.2:
                parent = "ExternalBase"
        src = class_source(rng, name, parent, int(rng.integers(0, 4)), int(rng.integers(0, 4)), package="gen")
        files.append(SourceFile(f"gen/{name}.java", src))
    return files


def chain_sources(wmcs: Iterable[int]) -> list[SourceFile]:
    """A single inheritance chain; class k has ``wmcs[k]`` straight-line methods."""
    files = []
    prev = None
    for k, w in enumerate(wmcs):
        methods = "".join(f"    void m{j}() {{ }}\n" for j in range(w))
        ext = f" extends {prev}" if prev else ""
        files.append(SourceFile(f"K{k}.java", f"class K{k}{ext} {{\n{methods}}}\n"))
        prev = f"K{k}"
    return files


# --------------------------------------------------------------------------
# Labeled datasets

STUDY_KINDS = ("opposite", "lcom-only")


def study_rows(kind: str, n: int = 2000, seed: int = 1, source: str | None = None) -> list[RawRow]:
    """Synthetic Promise-style rows with a known label mechanism.

    ``opposite``: faultiness rises with WMC and falls with IWMC by the same
    amount, so their sum (HCC) carries almost no signal while the pair does.
    ``lcom-only``: faultiness depends on LCOM alone.

    About 5% of rows have no inheritance (``hcc == wmc``) and 5% carry no bug
    information, so preprocessing has something to remove.
    """
    if kind not in STUDY_KINDS:
        raise ValueError(f"unknown synthetic dataset kind {kind!r}; choose from {STUDY_KINDS}")
    rng = np.random.default_rng(seed)
    wmc = 1 + rng.poisson(8.0, size=n)
    iwmc = 1 + rng.poisson(8.0, size=n)
    dit = 2 + rng.integers(0, 5, size=n)
    lcom = np.round(rng.uniform(0.0, 1.2, size=n), 4)
    noise = rng.normal(0.0, 1.0, size=n)
    if kind == "opposite":
        score = (wmc - iwmc) / np.sqrt(8.0) + 0.5 * noise
    else:
        score = 4.0 * (lcom - 0.6) / 0.35 + 0.5 * noise
    faulty = score > 0.3
    bug_count = np.where(faulty, 1 + rng.poisson(0.7, size=n), 0)

    no_inheritance = rng.random(n) < 0.05
    unlabeled = rng.random(n) < 0.05
    tag = source if source is not None else f"synthetic-{kind}"
    rows = []
    for k in range(n):
        iw = 0 if no_inheritance[k] else int(iwmc[k])
        rows.append(
            RawRow(
                name=f"synth.{kind.replace('-', '_')}.Class{k:05d}",
                wmc=int(wmc[k]),
                dit=1 if iw == 0 else int(dit[k]),
                lcom=float(lcom[k]),
                iwmc=iw,
                hcc=int(wmc[k]) + iw,
                bug=None if unlabeled[k] else int(bug_count[k]),
                source=tag,
            )
        )
    return rows


def proportion_rows(total: int, faulty: int, source: str = "", seed: int = 0) -> list[RawRow]:
    """Rows with given totals; every row inherits and is labeled."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(total)
    rows = []
    for k in range(total):
        bug = int(order[k] < faulty)
        rows.append(RawRow(f"row{k}", 3, 2, 0.5, 2, 5, bug, source))
    return rows


def write_rows_csv(rows: Iterable[RawRow], path: str | Path, with_iwmc: bool = True, with_hcc: bool = True) -> None:
    header = ["name", "wmc", "dit", "lcom"]
    if with_iwmc:
        header.append("iwmc")
    if with_hcc:
        header.append("hcc")
    header.append("bug")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in rows:
            rec = [r.name, r.wmc, r.dit, f"{r.lcom:.4f}"]
            if with_iwmc:
                rec.append(r.iwmc)
            if with_hcc:
                rec.append(r.hcc)
            rec.append("" if r.bug is None else r.bug)
            writer.writerow(rec)
