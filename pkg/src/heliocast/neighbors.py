"""Distance-weighted K-Nearest Neighbors regression.

A lazy learner: fitting stores the training set verbatim. Queries run a
linear scan (no spatial index; the target scale of ~55k rows by 2 features
is comfortably within desk latency). No feature scaling is applied by
default, so Kelvin magnitudes dominate the hour-of-day axis; pass
``standardize=True`` to opt in to z-scoring for experimentation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class KnnModel:
    train_features: np.ndarray  # (n, d)
    train_targets: np.ndarray  # (n,)
    k: int
    standardize: bool = False
    feature_mean: np.ndarray | None = None
    feature_scale: np.ndarray | None = None
    metric: str = field(default="euclidean")
    weighting: str = field(default="inverse-distance")

    @property
    def effective_k(self) -> int:
        return min(self.k, self.train_features.shape[0])


def fit_knn(ds, k: int = 10, standardize: bool = False) -> KnnModel:
    """Store the training set; the effective neighbor count is capped at n."""
    if ds.n < 1:
        raise ValueError("cannot fit KNN on an empty dataset")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    X = np.array(ds.features, dtype=np.float64)
    mean = scale = None
    if standardize:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0
        X = (X - mean) / scale
    return KnnModel(
        train_features=X,
        train_targets=np.array(ds.target, dtype=np.float64),
        k=k,
        standardize=standardize,
        feature_mean=mean,
        feature_scale=scale,
    )


def _transform(model: KnnModel, rows: np.ndarray) -> np.ndarray:
    if model.standardize:
        return (rows - model.feature_mean) / model.feature_scale
    return rows


def predict_knn(model: KnnModel, query: np.ndarray) -> float:
    """Inverse-distance-weighted mean of the k nearest training targets.

    Distance ties are broken by lower training index. If any selected
    neighbor coincides with the query (distance 0), the prediction is the
    plain mean of the zero-distance neighbors' targets, since inverse
    distance is singular there.
    """
    query = np.asarray(query, dtype=np.float64)
    if query.ndim != 1 or query.shape[0] != model.train_features.shape[1]:
        raise ValueError(
            f"query dimension {query.shape} does not match "
            f"training dimension {model.train_features.shape[1]}"
        )
    q = _transform(model, query)
    diff = model.train_features - q
    dist = np.sqrt(np.sum(diff * diff, axis=1))
    order = np.argsort(dist, kind="stable")[: model.effective_k]
    nearest = dist[order]
    targets = model.train_targets[order]
    zero = nearest == 0.0
    if np.any(zero):
        return float(np.mean(targets[zero]))
    w = 1.0 / nearest
    return float(np.sum(targets * w) / np.sum(w))


def predict_knn_many(model: KnnModel, rows: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Vectorized multi-query prediction (chunked to bound the distance
    matrix size); matches predict_knn exactly."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    if rows.shape[1] != model.train_features.shape[1]:
        raise ValueError(
            f"query dimension {rows.shape[1]} does not match "
            f"training dimension {model.train_features.shape[1]}"
        )
    X = model.train_features
    y = model.train_targets
    k = model.effective_k
    out = np.empty(rows.shape[0], dtype=np.float64)
    for start in range(0, rows.shape[0], chunk):
        block = _transform(model, rows[start : start + chunk])
        # (m, n) squared distances via the expansion ||a-b||^2 = a.a - 2a.b + b.b
        d2 = (
            np.sum(block * block, axis=1)[:, None]
            - 2.0 * block @ X.T
            + np.sum(X * X, axis=1)[None, :]
        )
        np.maximum(d2, 0.0, out=d2)
        dist = np.sqrt(d2)
        order = np.argsort(dist, axis=1, kind="stable")[:, :k]
        nearest = np.take_along_axis(dist, order, axis=1)
        targets = y[order]
        zero = nearest == 0.0
        has_zero = zero.any(axis=1)
        with np.errstate(divide="ignore"):
            w = np.where(zero, 0.0, 1.0 / np.where(nearest == 0.0, 1.0, nearest))
        weighted = np.sum(targets * w, axis=1) / np.where(has_zero, 1.0, np.sum(w, axis=1))
        zero_mean = np.sum(np.where(zero, targets, 0.0), axis=1) / np.maximum(
            zero.sum(axis=1), 1
        )
        out[start : start + chunk] = np.where(has_zero, zero_mean, weighted)
    return out
