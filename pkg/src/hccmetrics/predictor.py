"""Linear soft-margin SVM defect classifier and its evaluation protocol.

Training minimizes the primal objective

    F(w, b) = 1/2 ||w||^2 + C * sum_i max(0, 1 - y_i (w . x_i + b))

with labels encoded +1 (faulty) / -1 (non-faulty). The solver runs full-batch
projected subgradient descent on F / (C n) with step 1/sqrt(t) and keeps the best
iterate. Subgradient descent crawls once the data are (nearly) separable, so
an exact finish follows: the dual is solved by SMO and the resulting
margin/violator partition is re-solved as a KKT linear system. A candidate
replaces the iterate only when it lowers F; both objectives are recorded.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import LabeledSample
from .errors import (
    DimensionMismatchError,
    InsufficientDataError,
    NonFiniteError,
    RepresentationMismatchError,
    SingleClassError,
)


@dataclass(frozen=True)
class Representation:
    name: str
    feature_names: tuple[str, ...]


# relative size below which a decision value is treated as exactly zero
TIE_TOLERANCE = 1e-9

R1 = Representation("R1", ("hcc", "lcom", "dit"))
R2 = Representation("R2", ("wmc", "iwmc", "lcom", "dit"))
REPRESENTATIONS = {r.name: r for r in (R1, R2)}


def _round_half_up(x: float) -> int:
    # the epsilon keeps 0.7 * 40 = 28.000000000000004 and 0.35 * 10 = 3.4999999999999996 on the intended side
    return math.floor(x + 0.5 + 1e-9)


def balance_classes(samples: Sequence[LabeledSample], seed: int = 1) -> list[LabeledSample]:
    """Downsample the majority label to the minority's size."""
    rng = np.random.default_rng(seed)
    groups = [[s for s in samples if s.label == lbl] for lbl in (0, 1)]
    k = min(len(g) for g in groups)
    out: list[LabeledSample] = []
    for g in groups:
        if len(g) > k:
            keep = np.sort(rng.choice(len(g), size=k, replace=False))
            g = [g[i] for i in keep]
        out.extend(g)
    return out


def split(
    samples: Sequence[LabeledSample],
    train_fraction: float = 0.7,
    seed: int = 1,
    balance: bool = False,
) -> tuple[list[LabeledSample], list[LabeledSample]]:
    """Seeded split, stratified by label.

    The training side gets ``t = round_half_up(N * fraction)`` samples in
    total, of which ``round_half_up(N_faulty * t / N)`` are faulty; the rest
    of the quota is non-faulty. Tying the faulty count to the rounded total
    keeps both sides within half a sample of the full-set proportion.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    samples = list(samples)
    if balance:
        samples = balance_classes(samples, seed)
    groups = [[s for s in samples if s.label == lbl] for lbl in (0, 1)]
    for lbl, g in enumerate(groups):
        if len(g) < 2:
            raise InsufficientDataError(f"label {lbl} has {len(g)} samples; need at least 2 to split")

    n_train = _round_half_up(len(samples) * train_fraction)
    k_faulty = _round_half_up(len(groups[1]) * n_train / len(samples))
    quotas = [n_train - k_faulty, k_faulty]
    for lbl, (g, k) in enumerate(zip(groups, quotas)):
        if not 0 < k < len(g):
            raise InsufficientDataError(
                f"label {lbl}: {len(g)} samples cannot be split {k}/{len(g) - k} at fraction {train_fraction}"
            )

    rng = np.random.default_rng(seed)
    train: list[LabeledSample] = []
    test: list[LabeledSample] = []
    for g, k in zip(groups, quotas):
        perm = rng.permutation(len(g))
        train.extend(g[i] for i in perm[:k])
        test.extend(g[i] for i in perm[k:])
    return train, test


def design_matrix(samples: Sequence[LabeledSample], features: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([[s.features[f] for f in features] for s in samples], dtype=float).reshape(len(samples), len(features))
    y = np.array([s.label for s in samples], dtype=int)
    return X, y


# --------------------------------------------------------------------------
# Z-normalization


@dataclass(frozen=True)
class ScalerParams:
    feature_names: tuple[str, ...]
    means: tuple[float, ...]
    stds: tuple[float, ...]

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.means):
            raise DimensionMismatchError(f"expected {len(self.means)} features, got shape {X.shape}")
        mu = np.array(self.means)
        sd = np.array(self.stds)
        safe = np.where(sd > 0, sd, 1.0)
        return np.where(sd > 0, (X - mu) / safe, 0.0)


def fit_scaler(train: Sequence[LabeledSample] | np.ndarray, representation: Representation) -> ScalerParams:
    """Per-feature mean and population standard deviation of the training data."""
    if isinstance(train, np.ndarray):
        X = train
    else:
        X, _ = design_matrix(train, representation.feature_names)
    if X.shape[0] == 0:
        raise InsufficientDataError("cannot fit a scaler on an empty training set")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    for name, sd in zip(representation.feature_names, stds):
        if sd == 0:
            warnings.warn(f"feature {name!r} has zero variance in the training split; scaled to 0", RuntimeWarning, stacklevel=2)
    return ScalerParams(tuple(representation.feature_names), tuple(map(float, means)), tuple(map(float, stds)))


def apply_scaler(params: ScalerParams, samples: Sequence[LabeledSample] | np.ndarray) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        return params.transform(samples)
    X, _ = design_matrix(samples, params.feature_names)
    return params.transform(X)


# --------------------------------------------------------------------------
# SVM


def _signed(y01: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(y01) > 0, 1.0, -1.0)


def objective(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, c: float) -> float:
    """Primal soft-margin objective; ``y`` in {-1, +1}."""
    margins = y * (X @ w + b)
    return 0.5 * float(w @ w) + c * float(np.maximum(0.0, 1.0 - margins).sum())


def subgradient(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, c: float) -> tuple[np.ndarray, float]:
    """A subgradient of :func:`objective`; exact gradient away from kinks."""
    margins = y * (X @ w + b)
    active = margins < 1.0
    gw = w - c * (y[active, None] * X[active]).sum(axis=0)
    gb = -c * float(y[active].sum())
    return gw, gb


def _solve_partition(X: np.ndarray, y: np.ndarray, c: float, on: np.ndarray, viol: np.ndarray):
    """Solve the KKT system for a fixed margin/violator partition.

    Points in ``on`` sit exactly on the margin with free multipliers, points
    in ``viol`` have multiplier ``c``, all others have multiplier 0.
    """
    S = X[on]
    ys = y[on]
    d = X.shape[1]
    k = int(on.sum())
    # unknowns: w (d), b, alpha_on (k)
    A = np.zeros((d + 1 + k, d + 1 + k))
    rhs = np.zeros(d + 1 + k)
    A[:d, :d] = np.eye(d)
    A[:d, d + 1 :] = -(ys[:, None] * S).T
    rhs[:d] = c * (y[viol, None] * X[viol]).sum(axis=0)
    A[d, d + 1 :] = -ys
    rhs[d] = c * float(y[viol].sum())
    A[d + 1 :, :d] = ys[:, None] * S
    A[d + 1 :, d] = ys
    rhs[d + 1 :] = 1.0
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return sol[:d], float(sol[d]), sol[d + 1 :]


def _smo_dual(X: np.ndarray, y: np.ndarray, c: float, eps: float = 1e-10, max_iter: int | None = None) -> np.ndarray:
    """Solve the C-SVC dual for a linear kernel by SMO.

    Working pairs follow the second-order rule: ``i`` is the maximal
    violator, ``j`` maximizes the guaranteed decrease. Ties resolve to the
    lowest index, so the result is deterministic.
    """
    n = X.shape[0]
    max_iter = max_iter or max(10_000, 200 * n)
    alpha = np.zeros(n)
    w = np.zeros(X.shape[1])
    sq = np.einsum("ij,ij->i", X, X)
    for _ in range(max_iter):
        G = y * (X @ w) - 1.0
        score = -y * G
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        m_up = score[i]
        if m_up - score[low].min() < eps:
            break
        cand = low & (score < m_up)
        idx = np.flatnonzero(cand)
        gap = m_up - score[idx]
        curv = sq[i] + sq[idx] - 2.0 * (X[idx] @ X[i])
        curv = np.where(curv > 0, curv, 1e-12)
        j = int(idx[np.argmax(gap * gap / curv)])

        ai, aj = alpha[i], alpha[j]
        kij = float(X[i] @ X[j])
        if y[i] != y[j]:
            quad = sq[i] + sq[j] - 2.0 * kij
            quad = quad if quad > 0 else 1e-12
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > c:
                    ni, nj = c, c - diff
            elif nj > c:
                nj, ni = c, c + diff
        else:
            quad = sq[i] + sq[j] - 2.0 * kij
            quad = quad if quad > 0 else 1e-12
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > c:
                if ni > c:
                    ni, nj = c, total - c
                if nj > c:
                    nj, ni = c, total - c
            else:
                if nj < 0:
                    nj, ni = 0.0, total
                if ni < 0:
                    ni, nj = 0.0, total
        alpha[i], alpha[j] = ni, nj
        w += (ni - ai) * y[i] * X[i] + (nj - aj) * y[j] * X[j]
    return alpha


def _dual_bias(X: np.ndarray, y: np.ndarray, alpha: np.ndarray, w: np.ndarray, c: float) -> float:
    G = y * (X @ w) - 1.0
    yG = y * G
    free = (alpha > 0) & (alpha < c)
    if free.any():
        return -float(yG[free].mean())
    # no free multipliers: any b in the feasible interval is optimal; take its midpoint
    up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
    hi = float(yG[up].max()) if up.any() else float(yG.max())
    lo = float(yG[low].min()) if low.any() else float(yG.min())
    return -(hi + lo) / 2.0


def _exact_candidates(X: np.ndarray, y: np.ndarray, c: float):
    """Dual SMO solution, then the same point re-solved from its KKT partition."""
    alpha = _smo_dual(X, y, c)
    w = (alpha * y) @ X
    b = _dual_bias(X, y, alpha, w, c)
    yield w, b
    bound_tol = 1e-9 * c
    on = (alpha > bound_tol) & (alpha < c - bound_tol)
    if on.any():
        viol = alpha >= c - bound_tol
        pw, pb, _ = _solve_partition(X, y, c, on, viol)
        if np.all(np.isfinite(pw)) and math.isfinite(pb):
            yield pw, pb


@dataclass
class LinearSvmModel:
    representation: str
    feature_names: tuple[str, ...]
    weights: np.ndarray
    bias: float
    c: float = 1.0
    seed: int = 1
    iterations: int = 5000
    objective: float = float("nan")
    scaler: ScalerParams | None = None
    subgradient_objective: float = float("nan")

    def decision_function(self, X_scaled: np.ndarray) -> np.ndarray:
        X_scaled = np.asarray(X_scaled, dtype=float)
        if X_scaled.ndim == 1:
            X_scaled = X_scaled[None, :]
        if X_scaled.shape[1] != len(self.weights):
            raise DimensionMismatchError(f"model expects {len(self.weights)} features, got {X_scaled.shape[1]}")
        return X_scaled @ self.weights + self.bias

    def predict(self, X_scaled: np.ndarray) -> np.ndarray:
        """Labels, with ties going to non-faulty.

        A decision value counts as a tie when it is zero up to rounding noise
        relative to the magnitude of its terms. Integer-valued features put
        many points exactly on the boundary, and without the tolerance their
        labels would depend on the last bit of the arithmetic.
        """
        X_scaled = np.asarray(X_scaled, dtype=float)
        scores = self.decision_function(X_scaled)
        if X_scaled.ndim == 1:
            X_scaled = X_scaled[None, :]
        magnitude = (np.abs(X_scaled) + 1.0) @ np.abs(self.weights) + abs(self.bias)
        return (scores > TIE_TOLERANCE * magnitude).astype(int)

    def decision_raw(self, X_raw: np.ndarray) -> np.ndarray:
        if self.scaler is None:
            raise ValueError("model has no scaler attached")
        return self.decision_function(self.scaler.transform(X_raw))

    def to_dict(self) -> dict:
        return {
            "representation": self.representation,
            "features": list(self.feature_names),
            "weights": [float(v) for v in self.weights],
            "bias": float(self.bias),
            "c": float(self.c),
            "seed": int(self.seed),
            "iterations": int(self.iterations),
            "objective": float(self.objective),
            "subgradient_objective": float(self.subgradient_objective),
            "scaler": None
            if self.scaler is None
            else {"means": list(self.scaler.means), "stds": list(self.scaler.stds)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "LinearSvmModel":
        rep = data["representation"]
        features = tuple(data.get("features") or REPRESENTATIONS[rep].feature_names)
        weights = np.array(data["weights"], dtype=float)
        if len(weights) != len(features):
            raise RepresentationMismatchError(f"model has {len(weights)} weights for {len(features)} features")
        scaler = None
        if data.get("scaler"):
            scaler = ScalerParams(features, tuple(data["scaler"]["means"]), tuple(data["scaler"]["stds"]))
        return cls(
            representation=rep,
            feature_names=features,
            weights=weights,
            bias=float(data["bias"]),
            c=float(data.get("c", 1.0)),
            seed=int(data.get("seed", 1)),
            iterations=int(data.get("iterations", 0)),
            objective=float(data.get("objective", float("nan"))),
            subgradient_objective=float(data.get("subgradient_objective", float("nan"))),
            scaler=scaler,
        )

    @classmethod
    def load(cls, path: str | Path) -> "LinearSvmModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def train_svm(
    X: np.ndarray,
    y01: np.ndarray,
    representation: Representation,
    c: float = 1.0,
    seed: int = 1,
    iterations: int = 5000,
    refine: bool = True,
) -> LinearSvmModel:
    """Fit a linear SVM on already-scaled features.

    The full-batch solver starts from zero and uses no randomness; ``seed``
    is recorded in the model for provenance. ``refine=False`` skips the exact
    dual finish and returns the best subgradient iterate.
    """
    X = np.asarray(X, dtype=float)
    y01 = np.asarray(y01)
    if X.ndim != 2 or X.shape[1] != len(representation.feature_names):
        raise DimensionMismatchError(f"{representation.name} expects {len(representation.feature_names)} features, got shape {X.shape}")
    if X.shape[0] != y01.shape[0]:
        raise DimensionMismatchError("X and labels differ in length")
    if c <= 0:
        raise ValueError("C must be positive")
    if len(set(y01.tolist())) < 2:
        raise SingleClassError("training data contains a single label")

    y = _signed(y01)
    n, d = X.shape
    lam = 1.0 / (c * n)
    radius = math.sqrt(2.0 / lam)
    w = np.zeros(d)
    b = 0.0
    best_f = objective(w, b, X, y, c)
    best_w, best_b = w.copy(), b
    for t in range(1, iterations + 1):
        margins = y * (X @ w + b)
        active = margins < 1.0
        gw = lam * w - (y[active, None] * X[active]).sum(axis=0) / n
        gb = -float(y[active].sum()) / n
        eta = 1.0 / math.sqrt(t)
        w = w - eta * gw
        b = b - eta * gb
        norm = float(np.linalg.norm(w))
        if norm > radius:
            w *= radius / norm
        f = objective(w, b, X, y, c)
        if not math.isfinite(f):
            raise NonFiniteError(f"objective diverged at iteration {t}")
        if f < best_f:
            best_f, best_w, best_b = f, w.copy(), b

    subgradient_f = best_f
    if refine:
        for pw, pb in _exact_candidates(X, y, c):
            f = objective(pw, pb, X, y, c)
            if f < best_f:
                best_f, best_w, best_b = f, pw, pb

    return LinearSvmModel(
        representation.name,
        representation.feature_names,
        best_w,
        best_b,
        c,
        seed,
        iterations,
        best_f,
        subgradient_objective=subgradient_f,
    )


# --------------------------------------------------------------------------
# Evaluation


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


@dataclass(frozen=True)
class EvaluationReport:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: dict[str, float | None] = field(default_factory=dict)
    recall: dict[str, float | None] = field(default_factory=dict)
    accuracy: float = 0.0

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int) -> "EvaluationReport":
        total = tp + fp + fn + tn
        if not total:
            raise InsufficientDataError("cannot evaluate on an empty test set")
        return cls(
            tp,
            fp,
            fn,
            tn,
            precision={"faulty": _ratio(tp, tp + fp), "non_faulty": _ratio(tn, tn + fn)},
            recall={"faulty": _ratio(tp, tp + fn), "non_faulty": _ratio(tn, tn + fp)},
            accuracy=(tp + tn) / total,
        )

    @classmethod
    def from_predictions(cls, y_true: Sequence[int], y_pred: Sequence[int]) -> "EvaluationReport":
        yt = np.asarray(y_true).astype(bool)
        yp = np.asarray(y_pred).astype(bool)
        if yt.shape != yp.shape:
            raise DimensionMismatchError("label vectors differ in length")
        return cls.from_counts(int((yt & yp).sum()), int((~yt & yp).sum()), int((yt & ~yp).sum()), int((~yt & ~yp).sum()))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def to_dict(self) -> dict:
        return {
            "confusion": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
            "precision": dict(self.precision),
            "recall": dict(self.recall),
            "accuracy": self.accuracy,
        }


def predict(model: LinearSvmModel, sample_scaled: np.ndarray) -> int:
    return int(model.predict(np.asarray(sample_scaled, dtype=float).reshape(1, -1))[0])


def evaluate(model: LinearSvmModel, X_scaled: np.ndarray, y01: Sequence[int]) -> EvaluationReport:
    X_scaled = np.asarray(X_scaled, dtype=float)
    if X_scaled.shape[0] == 0:
        raise InsufficientDataError("empty test set")
    return EvaluationReport.from_predictions(y01, model.predict(X_scaled))


@dataclass
class RepresentationRun:
    representation: Representation
    model: LinearSvmModel
    report: EvaluationReport


def run_representation(
    train: Sequence[LabeledSample],
    test: Sequence[LabeledSample],
    representation: Representation,
    c: float = 1.0,
    seed: int = 1,
    iterations: int = 5000,
) -> RepresentationRun:
    """Fit the scaler on ``train``, train, and evaluate on ``test``."""
    X_train, y_train = design_matrix(train, representation.feature_names)
    X_test, y_test = design_matrix(test, representation.feature_names)
    scaler = fit_scaler(X_train, representation)
    model = train_svm(scaler.transform(X_train), y_train, representation, c, seed, iterations)
    model.scaler = scaler
    return RepresentationRun(representation, model, evaluate(model, scaler.transform(X_test), y_test))


@dataclass
class Comparison:
    r1: RepresentationRun
    r2: RepresentationRun
    n_train: int
    n_test: int

    def deltas(self) -> dict:
        """R2 minus R1 for accuracy and each defined per-label ratio."""
        a, b = self.r1.report, self.r2.report
        out: dict = {"accuracy": b.accuracy - a.accuracy, "precision": {}, "recall": {}}
        for metric in ("precision", "recall"):
            for label in ("faulty", "non_faulty"):
                va, vb = getattr(a, metric)[label], getattr(b, metric)[label]
                out[metric][label] = None if va is None or vb is None else vb - va
        return out


def compare_representations(
    samples: Sequence[LabeledSample],
    seed: int = 1,
    c: float = 1.0,
    train_fraction: float = 0.7,
    balance: bool = False,
    iterations: int = 5000,
) -> Comparison:
    train, test = split(samples, train_fraction, seed, balance)
    runs = [run_representation(train, test, rep, c, seed, iterations) for rep in (R1, R2)]
    return Comparison(runs[0], runs[1], len(train), len(test))
