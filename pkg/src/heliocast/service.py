"""HTTP forecasting service.

Turns hourly temperature forecasts (from a real weather provider or a
deterministic mock) into irradiance predictions using persisted models,
and serves them together with the latest evaluation report.

The current time is an injected dependency (never read ambiently inside
handlers), so forecasts are reproducible under test with a frozen clock.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Callable, Protocol

import httpx
import numpy as np
from fastapi import FastAPI, Query
from fastapi.responses import JSONResponse

from .models import ModelFileError, TrainedModel, load_model, predict_model

MAX_FORECAST_HOURS = 168

#: UTEQ central campus (Quevedo, Ecuador); the mock provider ignores it.
DEFAULT_LATITUDE = -1.0122
DEFAULT_LONGITUDE = -79.4626

CELSIUS_OFFSET = 273.15


class ProviderError(RuntimeError):
    """Weather provider failure; ``retryable`` marks transient faults."""

    def __init__(self, message: str, retryable: bool = False, status: int | None = None):
        super().__init__(message)
        self.retryable = retryable
        self.status = status


class ConfigurationError(RuntimeError):
    pass


@dataclass(frozen=True)
class TempPoint:
    hour_offset: int
    timestamp: datetime
    temperature: float  # Kelvin


@dataclass(frozen=True)
class ForecastPoint:
    timestamp: datetime
    temperature: float  # Kelvin
    predicted_irradiance: float
    model_id: str


class WeatherProvider(Protocol):
    def hourly_temperature(
        self, latitude: float, longitude: float, hours: int, start: datetime
    ) -> list[TempPoint]: ...


def mock_temperature(hour: float) -> float:
    """Deterministic diurnal temperature: 296 + 6*max(0, sin(pi(h-6)/12)) K."""
    return 296.0 + 6.0 * max(0.0, math.sin(math.pi * (hour - 6.0) / 12.0))


class MockWeatherProvider:
    """Offline provider evaluating the diurnal curve at each local hour."""

    def hourly_temperature(
        self, latitude: float, longitude: float, hours: int, start: datetime
    ) -> list[TempPoint]:
        return [
            TempPoint(
                hour_offset=i,
                timestamp=start + timedelta(hours=i),
                temperature=mock_temperature((start + timedelta(hours=i)).hour),
            )
            for i in range(hours)
        ]


class MeteoWeatherProvider:
    """Minimal client for a Meteosource-compatible hourly endpoint.

    Assumed payload shape (GET {base_url}/v1/point?lat=..&lon=..&
    sections=hourly&units=metric&key=..):

        {"units": "metric",
         "hourly": {"data": [{"date": "2020-05-02T13:00:00",
                              "temperature": 25.3}, ...]}}

    Metric temperatures are Celsius and are converted to Kelvin by adding
    273.15 exactly; a payload declaring "units": "kelvin" is passed
    through unchanged.
    """

    def __init__(self, base_url: str, api_key: str, client: httpx.Client | None = None):
        if not api_key:
            raise ConfigurationError("weather API key is not configured")
        if not base_url:
            raise ConfigurationError("weather base URL is not configured")
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self._client = client if client is not None else httpx.Client(timeout=10.0)

    def hourly_temperature(
        self, latitude: float, longitude: float, hours: int, start: datetime
    ) -> list[TempPoint]:
        try:
            response = self._client.get(
                f"{self.base_url}/v1/point",
                params={
                    "lat": latitude,
                    "lon": longitude,
                    "sections": "hourly",
                    "units": "metric",
                    "key": self.api_key,
                },
            )
        except httpx.HTTPError as exc:
            raise ProviderError(f"weather request failed: {exc}", retryable=True) from exc
        if response.status_code != 200:
            raise ProviderError(
                f"weather endpoint returned HTTP {response.status_code}",
                retryable=response.status_code >= 500,
                status=response.status_code,
            )
        try:
            payload = response.json()
            units = payload.get("units", "metric")
            entries = payload["hourly"]["data"]
            series = {}
            for entry in entries:
                ts = datetime.fromisoformat(entry["date"])
                value = float(entry["temperature"])
                if units != "kelvin":
                    value = value + CELSIUS_OFFSET
                series[ts] = value
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError(f"malformed weather payload: {exc}") from None

        points = []
        for i in range(hours):
            ts = start + timedelta(hours=i)
            if ts not in series:
                raise ProviderError(f"weather payload is missing hour {ts.isoformat()}")
            points.append(TempPoint(hour_offset=i, timestamp=ts, temperature=series[ts]))
        return points


def next_full_hour(now: datetime) -> datetime:
    return now.replace(minute=0, second=0, microsecond=0) + timedelta(hours=1)


def fetch_hourly_temperature(
    provider: WeatherProvider,
    latitude: float,
    longitude: float,
    hours: int,
    now: datetime,
) -> list[TempPoint]:
    """``hours`` contiguous temperature points starting at the next full hour."""
    if not 1 <= hours <= MAX_FORECAST_HOURS:
        raise ValueError(f"hours must be in [1, {MAX_FORECAST_HOURS}], got {hours}")
    return provider.hourly_temperature(latitude, longitude, hours, next_full_hour(now))


def build_feature_rows(model: TrainedModel, points: list[TempPoint]) -> np.ndarray:
    """Feature rows for forecast timestamps per the model's stored spec."""
    spec = model.feature_spec
    rows = []
    for p in points:
        row = []
        if spec.use_temperature:
            row.append(p.temperature)
        if spec.use_hour:
            row.append(float(p.timestamp.hour))
        if spec.use_month:
            row.append(float(p.timestamp.month))
        rows.append(row)
    return np.array(rows, dtype=np.float64)


def forecast_points(
    model: TrainedModel,
    model_id: str,
    temps: list[TempPoint],
    clamp: bool = False,
) -> list[ForecastPoint]:
    """Predict irradiance for each temperature point.

    Predictions are not clamped to >= 0 unless asked: linear models emit
    negative values at night, which faithfully exposes model behavior.
    """
    rows = build_feature_rows(model, temps)
    predictions = predict_model(model, rows)
    if clamp:
        predictions = np.maximum(predictions, 0.0)
    return [
        ForecastPoint(
            timestamp=p.timestamp,
            temperature=p.temperature,
            predicted_irradiance=float(v),
            model_id=model_id,
        )
        for p, v in zip(temps, predictions)
    ]


class ModelStore:
    """Directory of `.hcm` files; model_id is the file stem.

    Reloads swap in a freshly built dict (read-copy-update), so concurrent
    readers never observe a partially loaded store.
    """

    def __init__(self, directory: str):
        self.directory = directory
        self._models: dict[str, TrainedModel] = {}
        self.reload()

    def reload(self) -> None:
        loaded: dict[str, TrainedModel] = {}
        if os.path.isdir(self.directory):
            for name in sorted(os.listdir(self.directory)):
                if not name.endswith(".hcm"):
                    continue
                path = os.path.join(self.directory, name)
                try:
                    loaded[name[: -len(".hcm")]] = load_model(path)
                except ModelFileError:
                    continue  # an unreadable file must not sink the store
        self._models = loaded

    def ids(self) -> list[str]:
        return sorted(self._models)

    def get(self, model_id: str) -> TrainedModel | None:
        model = self._models.get(model_id)
        if model is None:
            self.reload()  # pick up models trained after startup
            model = self._models.get(model_id)
        return model

    def entries(self) -> list[tuple[str, TrainedModel]]:
        snapshot = self._models
        return [(mid, snapshot[mid]) for mid in sorted(snapshot)]


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def _parse_bool(text: str) -> bool:
    return text.strip().lower() in ("1", "true", "yes", "on")


def create_app(
    model_dir: str,
    provider: WeatherProvider | None = None,
    clock: Callable[[], datetime] | None = None,
    latitude: float = DEFAULT_LATITUDE,
    longitude: float = DEFAULT_LONGITUDE,
    evaluation_path: str | None = None,
) -> FastAPI:
    """Assemble the service with explicit dependencies (store directory,
    weather provider, clock), defaulting to the mock provider and the
    system clock."""
    store = ModelStore(model_dir)
    weather = provider if provider is not None else MockWeatherProvider()
    now = clock if clock is not None else datetime.now
    eval_path = (
        evaluation_path
        if evaluation_path is not None
        else os.path.join(model_dir, "evaluation.json")
    )

    app = FastAPI(title="heliocast", version="1.0")

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/models")
    def models():
        return [
            {
                "model_id": mid,
                "kind": model.kind,
                "display_name": model.display_name,
                "trained_at": model.trained_at,
                "metrics": model.metrics,
            }
            for mid, model in store.entries()
        ]

    @app.get("/forecast")
    def forecast(
        model: str = Query(default=""),
        hours: int = Query(default=24),
        clamp: str = Query(default="false"),
    ):
        if not model:
            return _error(400, "bad_request", "query parameter 'model' is required")
        if not 1 <= hours <= MAX_FORECAST_HOURS:
            return _error(
                400, "bad_request", f"hours must be in [1, {MAX_FORECAST_HOURS}], got {hours}"
            )
        trained = store.get(model)
        if trained is None:
            return _error(404, "model_not_found", f"no model named {model!r} in the store")
        try:
            temps = fetch_hourly_temperature(weather, latitude, longitude, hours, now())
            points = forecast_points(trained, model, temps, clamp=_parse_bool(clamp))
        except ConfigurationError as exc:
            return _error(500, "configuration_error", str(exc))
        except ProviderError as exc:
            return _error(502, "provider_error", str(exc))
        except ValueError as exc:
            return _error(400, "bad_request", str(exc))
        return [
            {
                "timestamp": p.timestamp.isoformat(),
                "temperature_k": p.temperature,
                "predicted_wm2": p.predicted_irradiance,
            }
            for p in points
        ]

    @app.get("/evaluation")
    def evaluation():
        if not os.path.isfile(eval_path):
            return _error(404, "evaluation_not_found", f"no evaluation report at {eval_path}")
        try:
            with open(eval_path, "r", encoding="utf-8") as fh:
                return json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            return _error(500, "evaluation_unreadable", f"cannot read evaluation report: {exc}")

    return app


def provider_from_env(env: dict[str, str] | None = None) -> WeatherProvider:
    """Build the provider selected by WEATHER_PROVIDER (mock by default)."""
    env = env if env is not None else dict(os.environ)
    choice = env.get("WEATHER_PROVIDER", "mock").strip().lower()
    if choice == "mock":
        return MockWeatherProvider()
    if choice == "real":
        return MeteoWeatherProvider(
            base_url=env.get("WEATHER_BASE_URL", "https://www.meteosource.com/api"),
            api_key=env.get("WEATHER_API_KEY", ""),
        )
    raise ConfigurationError(f"WEATHER_PROVIDER must be 'real' or 'mock', got {choice!r}")
