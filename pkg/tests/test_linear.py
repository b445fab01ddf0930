"""Tests for polynomial expansion and QR-based least squares."""

import numpy as np
import pytest

from heliocast.dataset import Dataset
from heliocast.linear import (
    expand_polynomial,
    expanded_feature_names,
    fit_ols,
    predict_linear,
)
from oracles import normal_equations_ols


def test_expand_degree_two():
    assert expand_polynomial(np.array([2.0, 3.0]), 2).tolist() == [1.0, 2.0, 3.0, 4.0, 6.0, 9.0]


def test_expand_degree_two_zeros():
    assert expand_polynomial(np.array([0.0, 0.0]), 2).tolist() == [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]


def test_expand_degree_one():
    assert expand_polynomial(np.array([5.0]), 1).tolist() == [1.0, 5.0]


def test_expand_rejects_unsupported_degree():
    for degree in (0, 3, -1):
        with pytest.raises(ValueError):
            expand_polynomial(np.array([1.0]), degree)


def test_expanded_names():
    assert expanded_feature_names(["t", "h"], 2) == ["1", "t", "h", "t*t", "t*h", "h*h"]


def test_fit_exact_line():
    ds = Dataset(np.array([[1.0], [2.0], [3.0]]), np.array([2.0, 4.0, 6.0]), ["x"])
    model = fit_ols(ds, degree=1)
    assert model.coefficients == pytest.approx([0.0, 2.0], abs=1e-12)


def test_fit_matches_normal_equations_oracle():
    # slope 0.6, intercept 1.1, frozen from the normal-equations oracle
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([1.0, 2.0, 2.0, 3.0])
    phi = np.column_stack([np.ones(4), X[:, 0]])
    beta_oracle = normal_equations_ols(phi, y)
    assert beta_oracle == pytest.approx([1.1, 0.6], abs=1e-12)
    model = fit_ols(Dataset(X, y, ["x"]), degree=1)
    assert model.coefficients == pytest.approx([1.1, 0.6], abs=1e-12)


def test_quadratic_through_three_points_is_exact():
    # y = x^2 + 1 through three points: degree-2 fit is an interpolation.
    X = np.array([[0.0], [1.0], [2.0]])
    y = np.array([1.0, 2.0, 5.0])
    model = fit_ols(Dataset(X, y, ["x"]), degree=2)
    residual = y - predict_linear(model, X)
    assert np.max(np.abs(residual)) < 1e-12


def test_predict_intercept_only_and_simple_model():
    from heliocast.linear import LinearModel

    constant = LinearModel(np.array([5.0]), ["1"], degree=1, raw_dim=0)
    # degree-1 expansion of an empty row is just the intercept column
    assert predict_linear(constant, np.zeros((3, 0))).tolist() == [5.0, 5.0, 5.0]

    slope2 = LinearModel(np.array([0.0, 2.0]), ["1", "x"], degree=1, raw_dim=1)
    assert predict_linear(slope2, np.array([[10.0]])).tolist() == [20.0]


def test_predict_roundtrip_on_exact_fit():
    rng = np.random.default_rng(21)
    X = rng.normal(size=(20, 2))
    beta = np.array([1.5, -2.0, 0.5])
    y = beta[0] + X @ beta[1:]
    model = fit_ols(Dataset(X, y, ["a", "b"]), degree=1)
    assert np.max(np.abs(predict_linear(model, X) - y)) < 1e-9


def test_predict_dimension_mismatch():
    rng = np.random.default_rng(20)
    ds = Dataset(rng.normal(size=(5, 2)), np.arange(5.0), ["a", "b"])
    model = fit_ols(ds, degree=1)
    with pytest.raises(ValueError):
        predict_linear(model, np.array([[1.0, 2.0, 3.0]]))


def test_rank_deficiency_names_columns():
    X = np.column_stack([np.arange(5.0), np.arange(5.0)])
    ds = Dataset(X, np.arange(5.0), ["a", "dup"])
    with pytest.raises(ValueError, match="rank deficient"):
        fit_ols(ds, degree=1)


def test_too_few_rows():
    ds = Dataset(np.array([[1.0, 2.0]]), np.array([1.0]), ["a", "b"])
    with pytest.raises(ValueError):
        fit_ols(ds, degree=1)


def test_residual_orthogonality():
    rng = np.random.default_rng(22)
    for degree in (1, 2):
        X = rng.normal(size=(60, 2)) * np.array([4.0, 1.0]) + np.array([300.0, 12.0])
        y = rng.normal(size=60) * 100.0 + 200.0
        model = fit_ols(Dataset(X, y, ["t", "h"]), degree=degree)
        from heliocast.linear import _expand_matrix

        phi = _expand_matrix(X, degree)
        residual = y - phi @ model.coefficients
        norm = np.linalg.norm(y)
        assert np.max(np.abs(phi.T @ residual)) / max(np.abs(phi).max(), 1.0) < 1e-7 * norm


def test_degree_two_never_worse_on_train():
    rng = np.random.default_rng(23)
    for _ in range(20):
        X = rng.normal(size=(40, 2))
        y = rng.normal(size=40)
        ds = Dataset(X, y, ["a", "b"])
        mse = {}
        for degree in (1, 2):
            model = fit_ols(ds, degree=degree)
            mse[degree] = float(np.mean((y - predict_linear(model, X)) ** 2))
        assert mse[2] <= mse[1] + 1e-9


def test_noise_free_coefficient_recovery():
    rng = np.random.default_rng(24)
    X = rng.uniform(-2.0, 2.0, size=(80, 2))
    beta = np.array([0.7, -1.3, 2.9, 0.4, -0.8, 1.1])  # full degree-2 basis
    from heliocast.linear import _expand_matrix

    y = _expand_matrix(X, 2) @ beta
    model = fit_ols(Dataset(X, y, ["a", "b"]), degree=2)
    assert np.max(np.abs(model.coefficients - beta) / np.abs(beta)) < 1e-8
