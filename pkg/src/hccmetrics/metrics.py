"""Class-level complexity metrics over a parsed corpus.

Definitions used throughout:

* CC(method)  = 1 + number of decision points
* WMC(class)  = sum of CC over the class's own declared methods (constructors included)
* IWMC(class) = sum of WMC over every ancestor found in the corpus
* HCC(class)  = WMC + IWMC
* DIT(class)  = 1 + number of corpus-resolvable ancestors
* LCOM(class) = Henderson-Sellers lack of cohesion, 1.0 when m <= 1 or a == 0

Parents that cannot be found in the corpus (library classes) end the walk:
they add nothing to IWMC and do not deepen DIT.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, TextIO, Union

from .errors import CycleError
from .parser import ClassDecl, MethodDecl

Corpus = Union[Sequence[ClassDecl], Mapping[str, ClassDecl]]

CSV_HEADER = ("name", "wmc", "dit", "lcom", "iwmc", "hcc")


@dataclass(frozen=True)
class MetricsRecord:
    name: str
    wmc: int
    iwmc: int
    hcc: int
    dit: int
    lcom: float
    method_count: int


@dataclass
class InheritanceGraph:
    nodes: set[str] = field(default_factory=set)
    parent_of: dict[str, str] = field(default_factory=dict)
    external_parents: set[str] = field(default_factory=set)

    def ancestors(self, name: str) -> list[str]:
        """Corpus-resolvable ancestors, nearest first."""
        if name not in self.nodes:
            raise KeyError(name)
        chain = [name]
        seen = {name}
        node = name
        while node in self.parent_of:
            node = self.parent_of[node]
            if node in seen:
                raise CycleError(chain + [node])
            seen.add(node)
            chain.append(node)
        return chain[1:]

    def children_of(self, name: str) -> list[str]:
        return sorted(c for c, p in self.parent_of.items() if p == name)


def _as_mapping(corpus: Corpus) -> Mapping[str, ClassDecl]:
    if isinstance(corpus, Mapping):
        return corpus
    return {c.qualified_name: c for c in corpus}


def _resolve_parent(cls: ClassDecl, by_qualified: Mapping[str, ClassDecl], by_simple: dict[str, list[str]]) -> str | None:
    ref = cls.parent_name
    if ref is None:
        return None
    if "." in ref:
        return ref if ref in by_qualified else None
    if cls.package:
        same_package = f"{cls.package}.{ref}"
        if same_package in by_qualified:
            return same_package
    candidates = by_simple.get(ref, [])
    return candidates[0] if len(candidates) == 1 else None


def build_graph(corpus: Corpus) -> InheritanceGraph:
    """Resolve declared parent names against the corpus.

    Dotted parent names must match a qualified name exactly. A simple name
    resolves to a class in the same package, else to the unique class with
    that simple name; anything else is recorded as an external parent.
    """
    by_qualified = _as_mapping(corpus)
    by_simple: dict[str, list[str]] = {}
    for qn, c in by_qualified.items():
        by_simple.setdefault(c.name, []).append(qn)

    graph = InheritanceGraph(nodes=set(by_qualified))
    for qn, c in by_qualified.items():
        parent = _resolve_parent(c, by_qualified, by_simple)
        if parent is not None:
            graph.parent_of[qn] = parent
        elif c.parent_name is not None:
            graph.external_parents.add(c.parent_name)
    return graph


def cyclomatic_complexity(method: MethodDecl) -> int:
    return 1 + sum(method.decision_points.values())


def wmc(cls: ClassDecl) -> int:
    return sum(cyclomatic_complexity(m) for m in cls.methods)


def dit(name: str, graph: InheritanceGraph) -> int:
    return 1 + len(graph.ancestors(name))


def iwmc(name: str, graph: InheritanceGraph, corpus: Corpus) -> int:
    classes = _as_mapping(corpus)
    return sum(wmc(classes[a]) for a in graph.ancestors(name))


def hcc(name: str, graph: InheritanceGraph, corpus: Corpus) -> int:
    classes = _as_mapping(corpus)
    return wmc(classes[name]) + iwmc(name, graph, classes)


def lcom(cls: ClassDecl) -> float:
    """Henderson-Sellers LCOM: ((1/a) * sum_j mu(A_j) - m) / (1 - m).

    ``mu(A_j)`` is the number of methods touching field ``j``. Only the
    class's own fields take part; accesses to inherited names are ignored.
    """
    m = len(cls.methods)
    a = len(cls.fields)
    if m <= 1 or a == 0:
        return 1.0
    own = set(cls.fields)
    incidence = sum(len(meth.accessed_fields & own) for meth in cls.methods)
    mean_mu = incidence / a
    # + 0.0 turns the -0.0 of a perfectly cohesive class into 0.0
    return (mean_mu - m) / (1 - m) + 0.0


def compute_all(corpus: Corpus) -> list[MetricsRecord]:
    classes = _as_mapping(corpus)
    graph = build_graph(classes)
    own = {qn: wmc(c) for qn, c in classes.items()}
    records = []
    for qn in sorted(classes):
        ancestors = graph.ancestors(qn)
        inherited = sum(own[a] for a in ancestors)
        records.append(
            MetricsRecord(
                name=qn,
                wmc=own[qn],
                iwmc=inherited,
                hcc=own[qn] + inherited,
                dit=1 + len(ancestors),
                lcom=lcom(classes[qn]),
                method_count=len(classes[qn].methods),
            )
        )
    return records


def write_metrics_csv(records: Iterable[MetricsRecord], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([r.name, r.wmc, r.dit, f"{r.lcom:.4f}", r.iwmc, r.hcc])


def metrics_csv(records: Iterable[MetricsRecord]) -> str:
    buf = io.StringIO()
    write_metrics_csv(records, buf)
    return buf.getvalue()
