"""Exploratory statistics: Pearson correlations and per-label density curves."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .dataset import LabeledSample
from .errors import DegenerateColumnError, EmptyGroupError, LengthMismatchError

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

NON_FAULTY = "non-faulty"
FAULTY = "faulty"


@dataclass(frozen=True)
class CorrelationMatrix:
    feature_names: list[str]
    values: list[list[float | None]]  # None marks a cell involving a zero-variance column
    degenerate: list[str]

    def get(self, a: str, b: str) -> float | None:
        return self.values[self.feature_names.index(a)][self.feature_names.index(b)]


@dataclass(frozen=True)
class DensityCurve:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    group_label: str
    weight: float = 1.0  # share of the pooled sample this group represents
    n: int = 0

    @property
    def scaled_density(self) -> np.ndarray:
        return self.density * self.weight

    def integral(self) -> float:
        return float(_trapezoid(self.density, self.grid))

    def peak(self, scaled: bool = False) -> tuple[float, float]:
        """(location, height) of the curve's maximum."""
        dens = self.scaled_density if scaled else self.density
        i = int(np.argmax(dens))
        return float(self.grid[i]), float(dens[i])


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise LengthMismatchError(f"pearson needs two equal-length vectors, got {xa.shape} and {ya.shape}")
    if xa.size < 2:
        raise LengthMismatchError("pearson needs at least two observations")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateColumnError("zero-variance input to pearson")
    # sqrt(sxx * syy) keeps r(x, x) exactly 1; the split form only steps in
    # when the product under- or overflows
    prod = sxx * syy
    denom = math.sqrt(prod) if prod > 0.0 and math.isfinite(prod) else math.sqrt(sxx) * math.sqrt(syy)
    r = float(dx @ dy) / denom
    return max(-1.0, min(1.0, r))


def correlation_matrix(samples: Sequence[LabeledSample], feature_names: Sequence[str]) -> CorrelationMatrix:
    names = list(feature_names)
    if len(samples) < 2:
        raise LengthMismatchError("correlation matrix needs at least two samples")
    cols = {n: np.array([s.features[n] for s in samples], dtype=float) for n in names}
    degenerate = [n for n in names if float(np.ptp(cols[n])) == 0.0]
    k = len(names)
    values: list[list[float | None]] = [[None] * k for _ in range(k)]
    for i in range(k):
        if names[i] not in degenerate:
            values[i][i] = 1.0
        for j in range(i + 1, k):
            try:
                r = pearson(cols[names[i]], cols[names[j]])
            except DegenerateColumnError:
                r = None
            values[i][j] = values[j][i] = r
    return CorrelationMatrix(names, values, degenerate)


def scott_bandwidth(values: Sequence[float]) -> float:
    v = np.asarray(values, dtype=float)
    return float(v.std(ddof=1) * v.size ** (-1.0 / 5.0))


def _gaussian_density(data: np.ndarray, grid: np.ndarray, h: float) -> np.ndarray:
    z = (grid[:, None] - data[None, :]) / h
    return np.exp(-0.5 * z * z).sum(axis=1) / (data.size * h * math.sqrt(2.0 * math.pi))


def _check_kde_input(values: Sequence[float], what: str = "kde") -> np.ndarray:
    data = np.asarray(values, dtype=float)
    if data.ndim != 1 or data.size < 2:
        raise DegenerateColumnError(f"{what} needs at least two values")
    if float(np.ptp(data)) == 0.0:
        raise DegenerateColumnError(f"{what} input is constant")
    return data


def kde(values: Sequence[float], grid_size: int = 256, group_label: str = "") -> DensityCurve:
    """Gaussian KDE with Scott's bandwidth on a grid spanning [min - 4h, max + 4h]."""
    data = _check_kde_input(values)
    h = scott_bandwidth(data)
    grid = np.linspace(data.min() - 4 * h, data.max() + 4 * h, grid_size)
    return DensityCurve(grid, _gaussian_density(data, grid, h), h, group_label, 1.0, data.size)


def density_by_label(samples: Sequence[LabeledSample], feature: str, grid_size: int = 256) -> tuple[DensityCurve, DensityCurve]:
    """Per-group curves (non-faulty, faulty) evaluated on one shared grid.

    The grid covers both groups' ``[min - 4h, max + 4h]`` ranges, each group
    using its own bandwidth. ``weight`` holds the group's share of samples so
    callers can overlay proportion-scaled curves.
    """
    groups = {0: [], 1: []}
    for s in samples:
        groups[s.label].append(s.features[feature])
    for label, name in ((0, NON_FAULTY), (1, FAULTY)):
        if not groups[label]:
            raise EmptyGroupError(f"no {name} samples for feature {feature!r}")
    data = {lbl: _check_kde_input(v, f"{feature} ({NON_FAULTY if lbl == 0 else FAULTY})") for lbl, v in groups.items()}
    bw = {lbl: scott_bandwidth(d) for lbl, d in data.items()}
    lo = min(d.min() - 4 * bw[lbl] for lbl, d in data.items())
    hi = max(d.max() + 4 * bw[lbl] for lbl, d in data.items())
    grid = np.linspace(lo, hi, grid_size)
    total = sum(d.size for d in data.values())
    curves = tuple(
        DensityCurve(grid, _gaussian_density(data[lbl], grid, bw[lbl]), bw[lbl], name, data[lbl].size / total, data[lbl].size)
        for lbl, name in ((0, NON_FAULTY), (1, FAULTY))
    )
    return curves  # type: ignore[return-value]


def write_correlation_csv(matrix: CorrelationMatrix, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["", *matrix.feature_names])
    for name, row in zip(matrix.feature_names, matrix.values):
        writer.writerow([name, *("" if v is None else f"{v:.2f}" for v in row)])


def write_density_csv(curves: Iterable[DensityCurve], out: TextIO, scaled: bool = False) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["grid", "density", "label"])
    for c in curves:
        dens = c.scaled_density if scaled else c.density
        for g, d in zip(c.grid, dens):
            writer.writerow([f"{g:.4f}", f"{d:.6f}", c.group_label])


def density_svg(curves: Sequence[DensityCurve], feature: str, width: int = 480, height: int = 300, scaled: bool = True) -> str:
    """Minimal two-polyline SVG for eyeballing the per-label curves."""
    pad = 40
    colors = {NON_FAULTY: "#1f77b4", FAULTY: "#d62728"}
    xs = np.concatenate([c.grid for c in curves])
    ys = [c.scaled_density if scaled else c.density for c in curves]
    x0, x1 = float(xs.min()), float(xs.max())
    y1 = max(float(y.max()) for y in ys) or 1.0

    def px(x: float) -> float:
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def py(y: float) -> float:
        return height - pad - y / y1 * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="{height - 8}" text-anchor="middle" font-size="12">{feature}</text>',
        f'<text x="12" y="{height / 2:.0f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 12 {height / 2:.0f})">{"scaled density" if scaled else "density"}</text>',
    ]
    for i, (c, y) in enumerate(zip(curves, ys)):
        pts = " ".join(f"{px(float(g)):.1f},{py(float(d)):.1f}" for g, d in zip(c.grid, y))
        color = colors.get(c.group_label, "#333333")
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        parts.append(f'<text x="{width - pad}" y="{pad + 14 * i}" text-anchor="end" font-size="11" fill="{color}">{c.group_label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
