"""Object-oriented complexity metrics (CC, WMC, IWMC, HCC, DIT, LCOM) and a
linear-SVM defect-prediction study built on them."""

from .dataset import FEATURES, LabeledSample, RawRow, preprocess, read_dataset, summarize
from .metrics import MetricsRecord, build_graph, compute_all
from .parser import ClassDecl, DecisionKind, MethodDecl, SourceFile, build_corpus, parse_file
from .predictor import R1, R2, LinearSvmModel, compare_representations, evaluate, split, train_svm
from .stats import correlation_matrix, density_by_label, kde, pearson

__version__ = "0.1.0"

__all__ = [
    "FEATURES",
    "ClassDecl",
    "DecisionKind",
    "LabeledSample",
    "LinearSvmModel",
    "MethodDecl",
    "MetricsRecord",
    "R1",
    "R2",
    "RawRow",
    "SourceFile",
    "build_corpus",
    "build_graph",
    "compare_representations",
    "compute_all",
    "correlation_matrix",
    "density_by_label",
    "evaluate",
    "kde",
    "parse_file",
    "pearson",
    "preprocess",
    "read_dataset",
    "split",
    "summarize",
    "train_svm",
]
