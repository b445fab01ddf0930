"""Tests for the comparison harness, plot export and synthetic generator."""

from datetime import date, datetime

import numpy as np
import pytest

from heliocast.dataset import Dataset, FeatureSpec, Record, extract_features
from heliocast.harness import (
    dataset_fingerprint,
    export_plot_data,
    plot_series_to_csv,
    report_to_csv,
    report_to_text,
    run_comparison,
    stratified_subsample,
)
from heliocast.models import ModelSpec, fit_model
from heliocast.synthetic import generate_synthetic


def _random_ds(seed=81, n=400):
    rng = np.random.default_rng(seed)
    X = np.column_stack([rng.uniform(294.0, 304.0, n), rng.integers(0, 24, n).astype(float)])
    y = rng.normal(0.0, 50.0, n)
    return Dataset(X, y, ["temperature", "hour"])


def test_mean_predictor_row_scores_near_zero_r2():
    # a zero-stage GBR predicts the training mean
    suite = [ModelSpec("gbr", {"stage_count": 0}, "Mean Baseline")]
    report, trained = run_comparison(_random_ds(n=2000), suite, seed=1)
    row = report.rows[0]
    assert not row.failed
    assert row.metrics.r2 == pytest.approx(0.0, abs=0.05)
    assert list(trained) == ["Mean Baseline"]


def test_rows_preserve_request_order_and_count():
    suite = [
        ModelSpec("tree", {"max_depth": 2}, "B Tree"),
        ModelSpec("linear", {}, "A Linear"),
        ModelSpec("knn", {"k": 3}, "C KNN"),
    ]
    report, _ = run_comparison(_random_ds(), suite, seed=3)
    assert [r.display_name for r in report.rows] == ["B Tree", "A Linear", "C KNN"]


def test_report_is_deterministic():
    suite = [
        ModelSpec("linear", {}, "Linear Regression"),
        ModelSpec("tree", {"max_depth": 3, "seed": 42}, "Decision Tree Regressor"),
        ModelSpec("gbr", {"stage_count": 5, "seed": 42}, "Gradient Boosting Regressor"),
    ]
    ds = _random_ds()
    a, _ = run_comparison(ds, suite, seed=42)
    b, _ = run_comparison(ds, suite, seed=42)
    assert report_to_csv(a) == report_to_csv(b)
    assert report_to_text(a) == report_to_text(b)
    assert a.to_dict() == b.to_dict()


def test_failed_fit_flags_row_and_keeps_going():
    # constant temperature column makes OLS rank-deficient; KNN still works
    rng = np.random.default_rng(82)
    X = np.column_stack([np.full(50, 300.0), rng.integers(0, 24, 50).astype(float)])
    ds = Dataset(X, rng.normal(size=50), ["temperature", "hour"])
    suite = [ModelSpec("linear", {}, "Linear Regression"), ModelSpec("knn", {"k": 3}, "KNN")]
    report, trained = run_comparison(ds, suite, seed=5)
    assert report.rows[0].failed and "rank deficient" in report.rows[0].error
    assert report.rows[0].metrics is None
    assert not report.rows[1].failed
    assert list(trained) == ["KNN"]
    text = report_to_text(report)
    assert "FAILED" in text


def test_csv_header_and_blank_cells_for_failures():
    rng = np.random.default_rng(83)
    X = np.column_stack([np.full(50, 300.0), rng.integers(0, 24, 50).astype(float)])
    ds = Dataset(X, rng.normal(size=50), ["temperature", "hour"])
    suite = [ModelSpec("linear", {}, "Linear Regression"), ModelSpec("knn", {"k": 3}, "KNN")]
    report, _ = run_comparison(ds, suite, seed=5)
    lines = report_to_csv(report).splitlines()
    assert lines[0] == "model,mse,rmse,mae,r2"
    assert lines[1] == "Linear Regression,,,,"
    assert lines[2].startswith("KNN,")


def test_fingerprint_tracks_content():
    ds = _random_ds(seed=84)
    other = _random_ds(seed=85)
    assert dataset_fingerprint(ds) == dataset_fingerprint(ds)
    assert dataset_fingerprint(ds) != dataset_fingerprint(other)


def test_svr_subsample_policy_is_stamped():
    ds = _random_ds(n=300)
    suite = [ModelSpec("svr_linear", {"max_passes": 5}, "SVR Kernel Lineal")]
    report, _ = run_comparison(ds, suite, seed=7, svr_subsample=100)
    assert report.rows[0].note is not None and "subsample" in report.rows[0].note
    assert any("stratified subsample" in note for note in report.footnotes)


def test_stratified_subsample_properties():
    ds = _random_ds(n=1000)
    sub = stratified_subsample(ds, 200, seed=9)
    assert sub.n == 200
    again = stratified_subsample(ds, 200, seed=9)
    assert np.array_equal(sub.features, again.features)
    # stratification keeps the target distribution's location
    assert float(sub.target.mean()) == pytest.approx(float(ds.target.mean()), abs=5.0)
    small = stratified_subsample(ds, 2000, seed=9)
    assert small is ds


def _day_records():
    return [
        Record(datetime(2020, 5, 2, 10, 5 * i), 100.0 + i, 300.0 + 0.1 * i) for i in range(12)
    ] + [Record(datetime(2020, 5, 3, 10, 0), 50.0, 299.0)]


def test_export_plot_data_shape_and_order():
    records = _day_records()
    ds = extract_features(records, FeatureSpec())
    model = fit_model(ds, ModelSpec("gbr", {"stage_count": 0}, "Mean Baseline"), FeatureSpec())
    series = export_plot_data(model, records, date(2020, 5, 2))
    assert len(series.points) == 12
    stamps = [p.timestamp for p in series.points]
    assert stamps == sorted(stamps)
    # constant predictor: every predicted value identical
    assert len({p.predicted for p in series.points}) == 1
    assert series.points[0].actual == 100.0
    assert series.display_name == "Mean Baseline"


def test_export_plot_data_requires_records_on_day():
    records = _day_records()
    ds = extract_features(records, FeatureSpec())
    model = fit_model(ds, ModelSpec("gbr", {"stage_count": 0}, "Mean Baseline"), FeatureSpec())
    with pytest.raises(ValueError):
        export_plot_data(model, records, date(2021, 1, 1))


def test_plot_series_csv_format():
    records = _day_records()
    ds = extract_features(records, FeatureSpec())
    model = fit_model(ds, ModelSpec("gbr", {"stage_count": 0}, "Mean Baseline"), FeatureSpec())
    series = export_plot_data(model, records, date(2020, 5, 2))
    lines = plot_series_to_csv(series).splitlines()
    assert lines[0] == "timestamp,actual_wm2,predicted_wm2,temperature_k"
    assert len(lines) == 13
    assert lines[1].startswith("2020-05-02T10:00:00,100.0,")


def test_synthetic_shape_and_determinism():
    records = generate_synthetic(1, seed=7)
    assert len(records) == 288
    again = generate_synthetic(1, seed=7)
    assert records == again
    other = generate_synthetic(1, seed=8)
    assert records != other
    two_days = generate_synthetic(2, seed=7)
    assert len(two_days) == 576


def test_synthetic_night_and_bounds():
    records = generate_synthetic(3, seed=11)
    for r in records:
        assert -9.0 <= r.irradiance <= 1459.0
        assert r.temperature > 0.0
        if r.timestamp.hour < 6 or r.timestamp.hour >= 18:
            assert r.irradiance <= 0.0
    # at least some daylight signal
    assert max(r.irradiance for r in records) > 300.0


def test_synthetic_rejects_bad_days():
    with pytest.raises(ValueError):
        generate_synthetic(0)
