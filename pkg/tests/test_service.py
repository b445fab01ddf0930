"""Tests for the forecasting service: providers, store, HTTP contract."""

import json
from datetime import datetime

import httpx
import numpy as np
import pytest
from fastapi.testclient import TestClient

from heliocast.dataset import Dataset, FeatureSpec
from heliocast.models import ModelSpec, fit_model, save_model
from heliocast.service import (
    ConfigurationError,
    MeteoWeatherProvider,
    MockWeatherProvider,
    ProviderError,
    create_app,
    fetch_hourly_temperature,
    mock_temperature,
    next_full_hour,
    provider_from_env,
)

FROZEN = datetime(2020, 5, 2, 5, 30)


def _clock():
    return FROZEN


def _make_model_dir(tmp_path, kinds=("gbr",)):
    rng = np.random.default_rng(91)
    X = np.column_stack([rng.uniform(294.0, 304.0, 80), rng.integers(0, 24, 80).astype(float)])
    y = 20.0 * (X[:, 0] - 294.0) + rng.normal(0.0, 5.0, 80)
    ds = Dataset(X, y, ["temperature", "hour"])
    for kind in kinds:
        hp = {"stage_count": 5} if kind == "gbr" else {}
        model = fit_model(ds, ModelSpec(kind, hp, kind), FeatureSpec())
        model.trained_at = "2020-05-01T00:00:00"
        save_model(model, str(tmp_path / f"{kind}.hcm"))
    return str(tmp_path)


def test_mock_temperature_anchor_values():
    assert mock_temperature(6) == 296.0
    assert mock_temperature(12) == 302.0
    assert mock_temperature(0) == 296.0
    assert mock_temperature(18) == 296.0


def test_next_full_hour():
    assert next_full_hour(datetime(2020, 5, 2, 5, 30)) == datetime(2020, 5, 2, 6, 0)
    assert next_full_hour(datetime(2020, 5, 2, 5, 0)) == datetime(2020, 5, 2, 6, 0)


def test_fetch_hourly_temperature_mock():
    points = fetch_hourly_temperature(MockWeatherProvider(), 0.0, 0.0, 24, FROZEN)
    assert len(points) == 24
    assert [p.hour_offset for p in points] == list(range(24))
    assert points[0].timestamp == datetime(2020, 5, 2, 6, 0)
    assert points[0].temperature == 296.0  # local hour 6
    assert points[6].temperature == 302.0  # local hour 12
    # contiguous hourly timestamps, cycling past midnight
    hours = [p.timestamp.hour for p in points]
    assert hours == [(6 + i) % 24 for i in range(24)]


def test_fetch_hourly_temperature_validates_hours():
    for hours in (0, -1, 169):
        with pytest.raises(ValueError):
            fetch_hourly_temperature(MockWeatherProvider(), 0.0, 0.0, hours, FROZEN)


def _meteo_transport(payload=None, status=200, units="metric"):
    if payload is None:
        from datetime import timedelta

        base = datetime(2020, 5, 2, 6, 0)
        data = [
            {"date": (base + timedelta(hours=i)).isoformat(), "temperature": 20.0 + i}
            for i in range(30)
        ]
        # replayed shape of a captured hourly response
        payload = {"units": units, "hourly": {"data": data}}

    def handler(request):
        assert request.url.params["sections"] == "hourly"
        assert request.url.params["key"] == "test-key"
        return httpx.Response(status, json=payload)

    return httpx.MockTransport(handler)


def test_real_provider_converts_celsius_exactly():
    client = httpx.Client(transport=_meteo_transport())
    provider = MeteoWeatherProvider("http://weather.test", "test-key", client=client)
    points = fetch_hourly_temperature(provider, -1.0, -79.5, 3, FROZEN)
    assert [p.temperature for p in points] == [20.0 + 273.15, 21.0 + 273.15, 22.0 + 273.15]
    assert points[0].timestamp == datetime(2020, 5, 2, 6, 0)


def test_real_provider_missing_hours_is_parse_error():
    payload = {"units": "metric", "hourly": {"data": [{"date": "2020-05-02T06:00:00", "temperature": 20.0}]}}
    client = httpx.Client(transport=_meteo_transport(payload))
    provider = MeteoWeatherProvider("http://weather.test", "test-key", client=client)
    with pytest.raises(ProviderError, match="missing hour"):
        fetch_hourly_temperature(provider, 0.0, 0.0, 3, FROZEN)


def test_real_provider_http_error_is_retryable():
    client = httpx.Client(transport=_meteo_transport(status=503))
    provider = MeteoWeatherProvider("http://weather.test", "test-key", client=client)
    with pytest.raises(ProviderError) as err:
        provider.hourly_temperature(0.0, 0.0, 1, FROZEN)
    assert err.value.retryable and err.value.status == 503


def test_real_provider_malformed_payload():
    client = httpx.Client(transport=_meteo_transport({"nope": 1}))
    provider = MeteoWeatherProvider("http://weather.test", "test-key", client=client)
    with pytest.raises(ProviderError, match="malformed"):
        provider.hourly_temperature(0.0, 0.0, 1, FROZEN)


def test_real_provider_requires_key():
    with pytest.raises(ConfigurationError):
        MeteoWeatherProvider("http://weather.test", "")


def test_provider_from_env():
    assert isinstance(provider_from_env({}), MockWeatherProvider)
    assert isinstance(provider_from_env({"WEATHER_PROVIDER": "mock"}), MockWeatherProvider)
    real = provider_from_env(
        {"WEATHER_PROVIDER": "real", "WEATHER_API_KEY": "k", "WEATHER_BASE_URL": "http://x"}
    )
    assert isinstance(real, MeteoWeatherProvider)
    with pytest.raises(ConfigurationError):
        provider_from_env({"WEATHER_PROVIDER": "sometimes"})
    with pytest.raises(ConfigurationError):
        provider_from_env({"WEATHER_PROVIDER": "real"})  # no key


def test_health(tmp_path):
    app = create_app(_make_model_dir(tmp_path), clock=_clock)
    client = TestClient(app)
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}
    assert response.headers["content-type"].startswith("application/json")


def test_models_endpoint(tmp_path):
    app = create_app(_make_model_dir(tmp_path, kinds=("gbr", "linear")), clock=_clock)
    client = TestClient(app)
    payload = client.get("/models").json()
    assert [m["model_id"] for m in payload] == ["gbr", "linear"]
    assert payload[0]["kind"] == "gbr"
    assert payload[0]["trained_at"] == "2020-05-01T00:00:00"
    assert payload[0]["metrics"] is None or isinstance(payload[0]["metrics"], dict)


def test_forecast_contract(tmp_path):
    app = create_app(_make_model_dir(tmp_path), clock=_clock)
    client = TestClient(app)
    first = client.get("/forecast", params={"model": "gbr", "hours": 24})
    assert first.status_code == 200
    body = first.json()
    assert len(body) == 24
    assert body[0]["timestamp"] == "2020-05-02T06:00:00"
    assert body[0]["temperature_k"] == 296.0
    assert body[6]["temperature_k"] == 302.0
    assert all(np.isfinite(p["predicted_wm2"]) for p in body)
    # frozen clock + mock provider: byte-identical across calls
    second = client.get("/forecast", params={"model": "gbr", "hours": 24})
    assert second.content == first.content


def test_forecast_hours_cycle_past_midnight(tmp_path):
    app = create_app(_make_model_dir(tmp_path), clock=_clock)
    client = TestClient(app)
    body = client.get("/forecast", params={"model": "gbr", "hours": 30}).json()
    stamps = [p["timestamp"] for p in body]
    assert stamps[0].startswith("2020-05-02")
    assert stamps[-1].startswith("2020-05-03")
    assert len(body) == 30


def test_forecast_clamp_flag(tmp_path):
    # a linear model whose fit goes negative at the mock's cool night
    # temperatures; clamp floors it at zero
    rng = np.random.default_rng(93)
    X = np.column_stack([rng.uniform(294.0, 304.0, 80), rng.integers(0, 24, 80).astype(float)])
    y = 50.0 * (X[:, 0] - 300.0) + rng.normal(0.0, 1.0, 80)
    ds = Dataset(X, y, ["temperature", "hour"])
    model = fit_model(ds, ModelSpec("linear", {}, "linear"), FeatureSpec())
    save_model(model, str(tmp_path / "linear.hcm"))
    app = create_app(str(tmp_path), clock=_clock)
    client = TestClient(app)
    raw = client.get("/forecast", params={"model": "linear", "hours": 24}).json()
    clamped = client.get(
        "/forecast", params={"model": "linear", "hours": 24, "clamp": "true"}
    ).json()
    assert min(p["predicted_wm2"] for p in raw) < 0.0
    assert min(p["predicted_wm2"] for p in clamped) == 0.0


def test_forecast_errors(tmp_path):
    app = create_app(_make_model_dir(tmp_path), clock=_clock)
    client = TestClient(app)
    missing = client.get("/forecast", params={"hours": 24})
    assert missing.status_code == 400
    assert missing.json()["code"] == "bad_request"
    unknown = client.get("/forecast", params={"model": "nope"})
    assert unknown.status_code == 404
    assert unknown.json() == {
        "code": "model_not_found",
        "message": "no model named 'nope' in the store",
    }
    bad_hours = client.get("/forecast", params={"model": "gbr", "hours": 169})
    assert bad_hours.status_code == 400
    assert bad_hours.headers["content-type"].startswith("application/json")


def test_forecast_every_model_kind_returns_requested_hours(tmp_path):
    kinds = ("linear", "polynomial", "knn", "tree", "svr_linear", "svr_poly", "forest", "gbr")
    rng = np.random.default_rng(92)
    X = np.column_stack([rng.uniform(294.0, 304.0, 60), rng.integers(0, 24, 60).astype(float)])
    y = rng.normal(100.0, 30.0, 60)
    ds = Dataset(X, y, ["temperature", "hour"])
    for kind in kinds:
        hp = {}
        if kind == "forest":
            hp = {"tree_count": 3}
        if kind == "gbr":
            hp = {"stage_count": 3}
        if kind.startswith("svr"):
            hp = {"max_passes": 20}
        model = fit_model(ds, ModelSpec(kind, hp, kind), FeatureSpec())
        save_model(model, str(tmp_path / f"{kind}.hcm"))
    app = create_app(str(tmp_path), clock=_clock)
    client = TestClient(app)
    for kind in kinds:
        body = client.get("/forecast", params={"model": kind, "hours": 7}).json()
        assert len(body) == 7, kind


def test_store_picks_up_new_models(tmp_path):
    model_dir = _make_model_dir(tmp_path, kinds=("gbr",))
    app = create_app(model_dir, clock=_clock)
    client = TestClient(app)
    assert client.get("/forecast", params={"model": "late"}).status_code == 404
    # train a new model after startup; the store rescans on demand
    _make_model_dir(tmp_path, kinds=("linear",))
    import os
    os.rename(tmp_path / "linear.hcm", tmp_path / "late.hcm")
    assert client.get("/forecast", params={"model": "late"}).status_code == 200


def test_store_skips_unreadable_files(tmp_path):
    model_dir = _make_model_dir(tmp_path, kinds=("gbr",))
    (tmp_path / "broken.hcm").write_text("{{{")
    app = create_app(model_dir, clock=_clock)
    client = TestClient(app)
    ids = [m["model_id"] for m in client.get("/models").json()]
    assert ids == ["gbr"]


def test_evaluation_endpoint(tmp_path):
    model_dir = _make_model_dir(tmp_path)
    app = create_app(model_dir, clock=_clock)
    client = TestClient(app)
    assert client.get("/evaluation").status_code == 404
    report = {"rows": [{"display_name": "gbr", "metrics": {"rmse": 1.0}}], "footnotes": []}
    (tmp_path / "evaluation.json").write_text(json.dumps(report))
    response = client.get("/evaluation")
    assert response.status_code == 200
    assert response.json() == report
