"""Regression evaluation metrics: MSE, RMSE, MAE and R²."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MetricsReport:
    """Scores for one model on one evaluation split.

    ``r2`` is None when the actual values have zero variance, where the
    coefficient of determination is undefined (its denominator is zero);
    an explicit marker keeps report sorting sane where ±inf would not.
    """

    mse: float
    rmse: float
    mae: float
    r2: float | None
    n: int


def score(actual: np.ndarray, predicted: np.ndarray) -> MetricsReport:
    """Compute MSE, RMSE, MAE and R² of predictions against observations.

    MSE  = mean((Y - Yhat)^2)
    RMSE = sqrt(MSE)
    MAE  = mean(|Y - Yhat|)
    R²   = 1 - sum((Y - Yhat)^2) / sum((Y - Ybar)^2)
    """
    actual = np.asarray(actual, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    if actual.shape != predicted.shape or actual.ndim != 1:
        raise ValueError(
            f"length mismatch: actual has shape {actual.shape}, predicted {predicted.shape}"
        )
    n = actual.size
    if n < 1:
        raise ValueError("need at least one observation")

    err = actual - predicted
    mse = float(np.mean(err * err))
    mae = float(np.mean(np.abs(err)))
    rmse = float(np.sqrt(mse))

    dev = actual - actual.mean()
    ss_tot = float(dev @ dev)
    if ss_tot == 0.0:
        r2 = None
    else:
        r2 = float(1.0 - (err @ err) / ss_tot)
    return MetricsReport(mse=mse, rmse=rmse, mae=mae, r2=r2, n=n)
