"""Pearson correlation analysis and threshold-based variable selection."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset

TARGET_LABEL = "irradiance"


@dataclass
class CorrelationMatrix:
    """Symmetric matrix of pairwise Pearson coefficients with unit diagonal."""

    labels: list[str]
    values: np.ndarray  # (d, d)

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.labels.index(a), self.labels.index(b)])


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Sample Pearson coefficient r = S_xy / sqrt(S_xx * S_yy).

    Raises ValueError for vectors shorter than 2, mismatched lengths, or
    zero variance in either vector (the coefficient is undefined there and
    a silent NaN would poison downstream heatmap exports).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson needs two 1-D vectors of equal length")
    if x.size < 2:
        raise ValueError("pearson needs at least 2 observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("pearson is undefined for a zero-variance vector")
    return float((dx @ dy) / np.sqrt(sxx * syy))


def correlation_matrix(ds: Dataset) -> CorrelationMatrix:
    """Pairwise Pearson coefficients over all feature columns plus the
    irradiance target (appended as the last label)."""
    labels = list(ds.feature_names) + [TARGET_LABEL]
    columns = [ds.features[:, j] for j in range(ds.d)] + [ds.target]
    for label, col in zip(labels, columns):
        if col.size < 2 or float(np.ptp(col)) == 0.0:
            raise ValueError(f"column {label!r} has zero variance")
    d = len(labels)
    values = np.eye(d)
    for i in range(d):
        for j in range(i + 1, d):
            r = pearson(columns[i], columns[j])
            values[i, j] = r
            values[j, i] = r
    return CorrelationMatrix(labels, values)


def select_variables(cm: CorrelationMatrix, target_label: str, threshold: float = 0.1) -> list[str]:
    """Feature labels with |corr(feature, target)| >= threshold, sorted by
    descending |corr|; ties keep label order. The 0.1 default retains the
    weakly-correlated hour-of-day variable alongside temperature."""
    if target_label not in cm.labels:
        raise ValueError(f"unknown target label {target_label!r}")
    t = cm.labels.index(target_label)
    scored = []
    for pos, label in enumerate(cm.labels):
        if label == target_label:
            continue
        strength = abs(float(cm.values[pos, t]))
        if strength >= threshold:
            scored.append((strength, pos, label))
    # Stable sort on -strength keeps label order among exact ties.
    scored.sort(key=lambda item: (-item[0], item[1]))
    return [label for _, _, label in scored]


def correlation_matrix_to_csv(cm: CorrelationMatrix) -> str:
    """CSV rendering with labels as first row and first column, for
    external heatmap tooling."""
    buf = io.StringIO()
    buf.write("," + ",".join(cm.labels) + "\n")
    for i, label in enumerate(cm.labels):
        row = ",".join(repr(float(v)) for v in cm.values[i])
        buf.write(f"{label},{row}\n")
    return buf.getvalue()
