from __future__ import annotations

import io
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import TRANSFORMER_TABLE
from hccmetrics import synthetic
from hccmetrics.errors import CycleError
from hccmetrics.metrics import (
    build_graph,
    compute_all,
    cyclomatic_complexity,
    dit,
    hcc,
    iwmc,
    lcom,
    metrics_csv,
    wmc,
)
from hccmetrics.parser import ClassDecl, DecisionKind, MethodDecl, SourceFile, build_corpus, parse_file
from oracles import brute_force_metrics, henderson_sellers, lexical_cc


def method(name="m", decisions=None, fields=()):
    return MethodDecl(name, dict(decisions or {}), set(fields), False)


def klass(name, parent=None, methods=(), fields=()):
    return ClassDecl(name, name, parent, list(fields), list(methods), f"{name}.java")


# -- the transformer example -------------------------------------------------


def test_transformer_table(transformer_corpus):
    got = {r.name: r for r in compute_all(transformer_corpus)}
    assert set(got) == set(TRANSFORMER_TABLE)
    for name, row in TRANSFORMER_TABLE.items():
        r = got[name]
        assert (r.hcc, r.lcom, r.dit, r.iwmc, r.wmc) == (row["hcc"], row["lcom"], row["dit"], row["iwmc"], row["wmc"])


def test_transformer_table_csv(transformer_corpus):
    text = metrics_csv(compute_all(transformer_corpus))
    assert text.splitlines() == [
        "name,wmc,dit,lcom,iwmc,hcc",
        "AddressTransformer,1,1,1.0000,0,1",
        "CustomerTransformer,1,2,1.0000,1,2",
        "OrderDetailsTransformer,1,4,1.0000,3,4",
        "OrderTransformer,1,3,1.0000,2,3",
    ]


def test_transformer_methods_cc_one(transformer_corpus):
    for cls in transformer_corpus:
        assert [cyclomatic_complexity(m) for m in cls.methods] == [1]


# -- CC / WMC -----------------------------------------------------------------


def test_cc_straight_line():
    assert cyclomatic_complexity(method()) == 1


def test_cc_if_and_cases():
    body = "if (x > 0 && y > 0) { } switch (x) { case 1: break; case 2: break; }"
    m = parse_file(SourceFile("A.java", f"class A {{ void m(int x, int y) {{ {body} }} }}"))[0].methods[0]
    assert cyclomatic_complexity(m) == 5 == lexical_cc(body)


def test_wmc_empty_and_sum():
    assert wmc(klass("A")) == 0
    ms = [method("a"), method("b", {DecisionKind.IF: 1}), method("c", {DecisionKind.LOOP: 2, DecisionKind.TERNARY: 1})]
    assert wmc(klass("A", methods=ms)) == 1 + 2 + 4


# -- DIT / IWMC / HCC ----------------------------------------------------------


def test_isolated_class():
    corpus = [klass("A", methods=[method()] * 7)]
    g = build_graph(corpus)
    assert dit("A", g) == 1
    assert iwmc("A", g, corpus) == 0
    assert hcc("A", g, corpus) == 7


def test_chain_example():
    corpus = build_corpus(synthetic.chain_sources([4, 2, 5]))
    g = build_graph(corpus)
    oracle = brute_force_metrics_chain([4, 2, 5])
    assert iwmc("K2", g, corpus) == 6 == oracle[2][0]
    assert hcc("K2", g, corpus) == 11 == 5 + oracle[2][0]


def brute_force_metrics_chain(wmcs):
    # (iwmc, dit) per position: every earlier class is an ancestor
    return [(sum(wmcs[:k]), k + 1) for k in range(len(wmcs))]


def test_chain_depth_ten():
    wmcs = [random.Random(3).randint(0, 4) for _ in range(10)]
    corpus = build_corpus(synthetic.chain_sources(wmcs))
    records = {r.name: r for r in compute_all(corpus)}
    for k, (inherited, depth) in enumerate(brute_force_metrics_chain(wmcs)):
        r = records[f"K{k}"]
        assert (r.iwmc, r.dit) == (inherited, depth)
    assert records["K9"].dit == 10


def test_external_parent_contributes_nothing():
    corpus = [klass("A", "java.util.AbstractList", [method()]), klass("B", "A", [method()])]
    g = build_graph(corpus)
    assert g.external_parents == {"java.util.AbstractList"}
    assert (dit("A", g), iwmc("A", g, corpus)) == (1, 0)
    assert (dit("B", g), iwmc("B", g, corpus)) == (2, 1)


def test_parent_resolution_prefers_same_package():
    files = [
        SourceFile("p/Base.java", "package p; class Base { void a() { } }"),
        SourceFile("q/Base.java", "package q; class Base { void a() { } void b() { } }"),
        SourceFile("p/Kid.java", "package p; class Kid extends Base { }"),
        SourceFile("r/Kid2.java", "package r; class Kid2 extends Base { }"),
        SourceFile("r/Kid3.java", "package r; class Kid3 extends q.Base { }"),
    ]
    records = {r.name: r for r in compute_all(build_corpus(files))}
    assert records["p.Kid"].iwmc == 1
    assert records["r.Kid2"].iwmc == 0  # ambiguous simple name stays external
    assert records["r.Kid3"].iwmc == 2


def test_cycle_detected():
    corpus = [klass("A", "B"), klass("B", "A")]
    with pytest.raises(CycleError):
        compute_all(corpus)


# -- LCOM ------------------------------------------------------------------------


def test_lcom_transformer_like():
    assert lcom(klass("A", methods=[method()])) == 1.0


def test_lcom_perfect_cohesion():
    cls = klass("A", methods=[method("a", fields="xy"), method("b", fields="xy")], fields="xy")
    assert lcom(cls) == 0.0
    assert str(lcom(cls)) == "0.0"


def test_lcom_three_methods_two_fields():
    cls = klass("A", methods=[method("a", fields="x"), method("b", fields="y"), method("c")], fields="xy")
    assert lcom(cls) == henderson_sellers([[1, 0], [0, 1], [0, 0]]) == 1.0


def test_lcom_upper_bound_reached():
    # two methods, one field, neither touches it: (0 - 2) / (1 - 2) = 2
    cls = klass("A", methods=[method("a"), method("b")], fields="x")
    assert lcom(cls) == 2.0


def test_lcom_ignores_inherited_names():
    cls = klass("A", methods=[method("a", fields={"x", "inherited"}), method("b", fields={"x"})], fields="x")
    assert lcom(cls) == 0.0


@settings(max_examples=200, deadline=None)
@given(
    st.integers(min_value=2, max_value=6).flatmap(
        lambda m: st.integers(min_value=1, max_value=5).flatmap(
            lambda a: st.lists(st.lists(st.integers(0, 1), min_size=a, max_size=a), min_size=m, max_size=m)
        )
    )
)
def test_lcom_matches_incidence_oracle(incidence):
    a = len(incidence[0])
    names = [f"f{j}" for j in range(a)]
    methods = [method(f"m{i}", fields={names[j] for j in range(a) if row[j]}) for i, row in enumerate(incidence)]
    value = lcom(klass("A", methods=methods, fields=names))
    assert value == pytest.approx(henderson_sellers(incidence), abs=1e-12)
    assert 0.0 <= value <= 2.0
    assert (value == 0.0) == all(all(row) for row in incidence)


# -- properties over generated hierarchies ---------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_identity_and_oracle(seed):
    files = synthetic.random_hierarchy(seed)
    corpus = build_corpus(files)
    records = {r.name: r for r in compute_all(corpus)}
    graph = build_graph(corpus)
    oracle = brute_force_metrics([f.content for f in files])
    for name, r in records.items():
        assert r.hcc == r.wmc + r.iwmc
        parent = graph.parent_of.get(name)
        if parent is None:
            assert r.dit == 1 and r.iwmc == 0
        else:
            p = records[parent]
            assert r.dit == p.dit + 1
            assert r.iwmc == p.iwmc + p.wmc
        simple = name.split(".")[-1]
        assert (r.wmc, r.iwmc, r.hcc, r.dit) == tuple(oracle[simple][k] for k in ("wmc", "iwmc", "hcc", "dit"))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=100_000), st.integers(min_value=0, max_value=4))
def test_adding_parent_method_raises_descendant_hcc(seed, extra_decisions):
    corpus = build_corpus(synthetic.random_hierarchy(seed, n_classes=8))
    graph = build_graph(corpus)
    target = corpus[0].qualified_name
    added = method("added", {DecisionKind.IF: extra_decisions} if extra_decisions else {})
    bumped = [
        ClassDecl(c.name, c.qualified_name, c.parent_name, c.fields, c.methods + [added], c.source_path)
        if c.qualified_name == target
        else c
        for c in corpus
    ]
    before = {r.name: r for r in compute_all(corpus)}
    after = {r.name: r for r in compute_all(bumped)}
    for name in before:
        if name == target:
            continue
        if target in graph.ancestors(name):
            assert after[name].hcc == before[name].hcc + 1 + extra_decisions
        else:
            assert after[name].hcc == before[name].hcc
        assert after[name].wmc == before[name].wmc


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=100_000), st.randoms(use_true_random=False))
def test_file_order_independent(seed, shuffler):
    files = synthetic.random_hierarchy(seed)
    shuffled = list(files)
    shuffler.shuffle(shuffled)
    assert compute_all(build_corpus(files)) == compute_all(build_corpus(shuffled))


def test_compute_all_empty():
    assert compute_all([]) == []
    assert metrics_csv([]) == "name,wmc,dit,lcom,iwmc,hcc\n"


def test_fifty_generated_classes():
    rng = np.random.default_rng(50)
    files = synthetic.random_hierarchy(int(rng.integers(0, 1000)), n_classes=50)
    oracle = brute_force_metrics([f.content for f in files])
    records = compute_all(build_corpus(files))
    assert len(records) == 50
    for r in records:
        o = oracle[r.name.split(".")[-1]]
        assert (r.wmc, r.iwmc, r.hcc, r.dit) == (o["wmc"], o["iwmc"], o["hcc"], o["dit"])
        assert r.hcc == r.wmc + r.iwmc


def test_csv_stream(transformer_corpus):
    from hccmetrics.metrics import write_metrics_csv

    buf = io.StringIO()
    write_metrics_csv(compute_all(transformer_corpus), buf)
    assert buf.getvalue() == metrics_csv(compute_all(transformer_corpus))
