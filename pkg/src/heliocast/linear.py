"""Ordinary least squares and degree-2 polynomial regression.

The solve goes through a column-pivoted QR decomposition rather than the
normal equations: squared Kelvin temperatures (~9e4) give the expanded
design matrix a wide dynamic range, and the explicit inverse would square
its condition number.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular


@dataclass
class LinearModel:
    """Fitted coefficients over the expanded feature basis. The first
    coefficient multiplies the constant 1 (intercept)."""

    coefficients: np.ndarray
    feature_names: list[str]
    degree: int
    raw_dim: int

    def intercept(self) -> float:
        return float(self.coefficients[0])


def expanded_feature_names(names: list[str], degree: int) -> list[str]:
    if degree not in (1, 2):
        raise ValueError(f"unsupported polynomial degree {degree} (only 1 and 2)")
    out = ["1"] + list(names)
    if degree == 2:
        d = len(names)
        for i in range(d):
            for j in range(i, d):
                out.append(f"{names[i]}*{names[j]}")
    return out


def expand_polynomial(row: np.ndarray, degree: int) -> np.ndarray:
    """Expand one raw feature row into the polynomial basis.

    Degree 1: [1, x1..xd]. Degree 2 appends all monomials xi*xj with
    i <= j in lexicographic (i, j) order, interactions included.
    """
    row = np.asarray(row, dtype=np.float64)
    return _expand_matrix(row.reshape(1, -1), degree)[0]


def _expand_matrix(X: np.ndarray, degree: int) -> np.ndarray:
    if degree not in (1, 2):
        raise ValueError(f"unsupported polynomial degree {degree} (only 1 and 2)")
    n, d = X.shape
    blocks = [np.ones((n, 1)), X]
    if degree == 2:
        quad = [X[:, i : i + 1] * X[:, j : j + 1] for i in range(d) for j in range(i, d)]
        blocks.append(np.hstack(quad))
    return np.hstack(blocks)


def fit_ols(ds, degree: int = 1) -> LinearModel:
    """Least-squares fit of the degree-expanded basis to the target.

    Raises on rank deficiency (naming the dependent expanded columns) and
    when there are fewer rows than expanded columns.
    """
    phi = _expand_matrix(ds.features, degree)
    names = expanded_feature_names(ds.feature_names, degree)
    n, dprime = phi.shape
    if n < dprime:
        raise ValueError(f"need at least {dprime} rows to fit {dprime} coefficients, got {n}")

    q, r, piv = qr(phi, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = max(n, dprime) * np.finfo(np.float64).eps * (diag[0] if diag.size else 0.0)
    rank = int(np.sum(diag > tol))
    if rank < dprime:
        dependent = sorted(names[j] for j in piv[rank:])
        raise ValueError(f"design matrix is rank deficient; dependent columns: {dependent}")

    beta_piv = solve_triangular(r, q.T @ ds.target)
    beta = np.empty_like(beta_piv)
    beta[piv] = beta_piv
    return LinearModel(coefficients=beta, feature_names=names, degree=degree, raw_dim=ds.d)


def predict_linear(model: LinearModel, rows: np.ndarray) -> np.ndarray:
    """Evaluate beta . phi(x) for each raw feature row."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    if rows.shape[1] != model.raw_dim:
        raise ValueError(f"expected rows with {model.raw_dim} features, got {rows.shape[1]}")
    return _expand_matrix(rows, model.degree) @ model.coefficients
