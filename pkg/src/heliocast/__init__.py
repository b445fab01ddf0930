"""Solar irradiance regression toolkit and forecasting service."""

__version__ = "0.1.0"
